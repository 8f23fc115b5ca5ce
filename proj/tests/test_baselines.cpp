#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "sgm/baselines.hpp"

using namespace sgm;

TEST_CASE("cosine scores") {
    const SparseVector a = testing::vec({{0, 1.0}, {1, 1.0}});
    CHECK(vsm_score(a, a) == doctest::Approx(1.0));
    CHECK(vsm_score(testing::vec({{0, 1.0}}), testing::vec({{1, 1.0}})) == 0.0);
    CHECK(vsm_score(a, testing::vec({{0, 1.0}})) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(vsm_score(SparseVector{}, a) == 0.0);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const SparseVector x = testing::random_vector(rng, 10, 5, true);
        const SparseVector y = testing::random_vector(rng, 10, 5, true);
        const double s = vsm_score(x, y);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0 + 1e-12);
        CHECK(s == doctest::Approx(vsm_score(y, x)));
    }
}

TEST_CASE("bm25 term factor") {
    Bm25Stats stats;
    stats.terms.df = {1.0, 2.0};
    stats.terms.num_docs = 4.0;
    stats.avg_length = 2.0;
    Bm25Params p;
    p.k1 = 1.2;
    p.b = 0.75;
    const SparseVector doc = testing::vec({{0, 1.0}, {1, 1.0}});  // length = A
    const double idf0 = std::log(3.5 / 1.5);
    CHECK(bm25_score(doc, testing::vec({{0, 1.0}}), p, stats) == doctest::Approx(idf0));
    p.k3 = 100.0;
    CHECK(bm25_score(doc, testing::vec({{0, 1.0}}), p, stats) == doctest::Approx(idf0));
    CHECK(bm25_score(doc, testing::vec({{0, 2.0}}), p, stats) == doctest::Approx(idf0 * 101.0 * 2.0 / 102.0));
    CHECK(bm25_score(doc, testing::vec({{5, 1.0}}), p, stats) == 0.0);

    // monotone and bounded in the document count
    double prev = 0.0;
    for (double w = 0.5; w < 50.0; w += 0.5) {
        const double s = bm25_score(testing::vec({{0, w}}), testing::vec({{0, 1.0}}), p, stats);
        CHECK(s > prev);
        CHECK(s <= (p.k1 + 1.0) * idf0);
        prev = s;
    }
    p.b = 1.5;
    CHECK_THROWS(p.validate());
}

TEST_CASE("baseline rankers score label prototypes") {
    const Collection c = testing::parse("1 0:2 1:1\n1 0:1\n2 2:3\n3 1:1 2:1\n");
    const BaselineRanker vsm(c, Scorer::vsm);
    CHECK(vsm.num_labels() == 3);
    CHECK(vsm.prototype(0) == testing::vec({{0, 3.0}, {1, 1.0}}));
    const SparseVector q = testing::vec({{0, 1.0}});
    const Vector s = vsm.scores(q);
    CHECK(s[0] == doctest::Approx(vsm_score(vsm.prototype(0), q)));
    CHECK(vsm.classify(q) == 1);
    CHECK(vsm.classify(testing::vec({{2, 1.0}})) == 2);

    const BaselineRanker bm(c, Scorer::bm25);
    const Bm25Stats stats = Bm25Stats::from(c);
    CHECK(stats.avg_length == doctest::Approx(9.0 / 4.0));
    const SparseVector q2 = testing::vec({{1, 1.0}, {2, 2.0}});
    const Vector s2 = bm.scores(q2);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(s2[static_cast<Eigen::Index>(k)] == doctest::Approx(bm25_score(bm.prototype(k), q2, {}, stats)));
    CHECK(bm.rank(q2, 10).size() == 3);
    CHECK_THROWS(BaselineRanker(c, Scorer::sgm));
    CHECK(parse_scorer("bm25") == Scorer::bm25);
    CHECK_THROWS(parse_scorer("svm"));
}
