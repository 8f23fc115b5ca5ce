#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace sgm;

TEST_CASE("toy MNB structure") {
    const GenerativeModel m = testing::toy_model();
    REQUIRE(m.num_labels() == 2);
    CHECK(m.label_ids == std::vector<LabelId>{1, 2});
    CHECK(m.depth() == 2);
    CHECK(m.prior[0] == doctest::Approx(0.5));
    const BackoffNode& a = m.nodes[static_cast<std::size_t>(m.leaves_by_label[0][0])];
    const BackoffNode& b = m.nodes[static_cast<std::size_t>(m.leaves_by_label[1][0])];
    CHECK(a.alpha == doctest::Approx(0.5));
    CHECK(b.alpha == doctest::Approx(0.5));
    CHECK(a.dist == testing::vec({{0, 1.0}}));
    CHECK(b.dist == testing::vec({{1, 1.0}}));
    CHECK(m.label_index(2) == 1);
    CHECK(m.label_index(7) == -1);
}

TEST_CASE("single label prior and empty collection") {
    const GenerativeModel m = train_mnb(testing::parse("4 0:1\n4 1:1\n"), testing::toy_smoothing());
    CHECK(m.prior.size() == 1);
    CHECK(m.prior[0] == 1.0);
    CHECK_THROWS(train_mnb(Collection{}, testing::toy_smoothing()));
}

TEST_CASE("training cost is one update per document term and label") {
    std::mt19937_64 rng(8);
    const Collection c = testing::random_collection(rng, 4, 30, 25, true, true);
    TrainingCounters counters;
    train_mnb(c, testing::toy_smoothing(), {}, &counters);
    std::size_t expect = 0;
    for (const Document& d : c.docs()) expect += d.vec.l0() * d.labels.size();
    CHECK(counters.count_updates == expect);
}

TEST_CASE("prior scaling") {
    GenerativeModel m = train_mnb(testing::parse("1 0:1\n1 0:1\n1 0:1\n1 0:1\n2 1:1\n"), testing::toy_smoothing());
    CHECK(m.prior[0] == doctest::Approx(0.8));
    GenerativeModel two = m;
    apply_prior_scaling(two, 2.0);
    CHECK(two.prior[0] == doctest::Approx(0.941176).epsilon(1e-6));
    CHECK(two.prior[1] == doctest::Approx(0.058824).epsilon(1e-5));
    GenerativeModel zero = m;
    apply_prior_scaling(zero, 0.0);
    CHECK(zero.prior[0] == doctest::Approx(0.5));
    GenerativeModel one = m;
    apply_prior_scaling(one, 1.0);
    CHECK(one.prior.isApprox(m.prior));
}

TEST_CASE("length model factor") {
    CHECK(log_poisson_factor(1.0, 0.0, 1.0) == doctest::Approx(-1.0));
    CHECK(log_poisson_factor(3.0, 5.0, 0.0) == 0.0);
    CHECK(log_poisson_factor(2.0, 3.0, 0.5) == doctest::Approx(0.5 * (3 * std::log(2.0) - 2.0 - std::log(6.0))));
    GenerativeModel m = testing::toy_model();
    fit_length_model(m, testing::toy_collection(), 1.0);
    REQUIRE(m.length);
    CHECK(m.length->mean_length[0] == doctest::Approx(2.0));
}

TEST_CASE("TDM tree shape") {
    const Collection c = testing::parse("1 0:1 1:2\n1 1:1 2:1\n2 0:3\n");
    TdmSmoothing s{testing::toy_smoothing(), testing::toy_smoothing(), testing::toy_smoothing()};
    s.document.discount = DiscountSpec::none();
    s.document.mu = 2.0;
    const GenerativeModel m = train_tdm(c, s);
    CHECK(m.depth() == 4);
    CHECK(m.nodes.size() == 1 + 1 + 2 + 3);
    CHECK(m.leaves_by_label[0].size() == 2);
    CHECK(m.leaves_by_label[1].size() == 1);
    const BackoffNode& leaf = m.nodes[static_cast<std::size_t>(m.leaves_by_label[0][0])];
    CHECK(leaf.kind == NodeKind::document);
    CHECK(leaf.alpha == doctest::Approx(2.0 / 5.0));
    CHECK(leaf.dist.weight(1) == doctest::Approx(2.0 / 3.0));
    // label node: mean of length-normalized documents
    const BackoffNode& label = m.nodes[static_cast<std::size_t>(leaf.parent)];
    CHECK(label.dist.weight(1) == doctest::Approx((2.0 / 3.0 + 0.5) / 2.0));
    CHECK_THROWS(train_tdm(testing::parse("1 0:1\n1\n"), s));
}

TEST_CASE("stored distributions are normalized and the tree validates") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const GenerativeModel m = testing::random_model(rng, static_cast<std::size_t>(trial), trial % 2 == 1);
        CHECK_NOTHROW(validate(m));
        for (const BackoffNode& n : m.nodes)
            if (!n.dist.empty()) CHECK(std::abs(n.dist.l1() - 1.0) < 1e-9);
        CHECK(std::abs(m.prior.sum() - 1.0) < 1e-12);
        for (const Vector& p : smoothed_node_distributions(m)) CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("model text round trip") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        GenerativeModel m = testing::random_model(rng, static_cast<std::size_t>(trial), trial % 2 == 0);
        if (trial % 3 == 0) m.codec = powerset_encode(testing::parse("1 0:1\n1,2 1:1\n")).second;
        std::stringstream ss;
        save_model(ss, m);
        const GenerativeModel back = load_model(ss);
        CHECK(back.nodes == m.nodes);
        CHECK(back.label_ids == m.label_ids);
        CHECK(back.prior.isApprox(m.prior, 0.0));
        CHECK(back.leaves_by_label == m.leaves_by_label);
        CHECK(back.codec.has_value() == m.codec.has_value());
        CHECK(back.length.has_value() == m.length.has_value());
    }
    std::istringstream bad("not a model\n");
    CHECK_THROWS(load_model(bad));
}
