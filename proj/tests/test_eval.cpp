#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sgm/eval.hpp"

using namespace sgm;

TEST_CASE("micro and macro F1") {
    const std::vector<LabelSet> refs = {{1}, {2}};
    CHECK(micro_f1(refs, refs) == 1.0);
    CHECK(micro_f1({{1}, {1}}, refs) == doctest::Approx(0.5));
    CHECK(micro_f1({{}, {}}, refs) == 0.0);
    CHECK_THROWS(micro_f1({{1}}, refs));
    CHECK(macro_f1(refs, refs) == 1.0);
    // label 2 always missed, label 1 perfect
    CHECK(macro_f1({{1}, {3}}, refs) == doctest::Approx(0.5));
    CHECK_THROWS(macro_f1({{}}, {{}}));
}

TEST_CASE("average precision") {
    RankedJudgment j;
    j.ranking = {4, 7};
    j.grades = {{4, 1}};
    CHECK(average_precision(j) == 1.0);
    j.grades = {{7, 1}};
    CHECK(average_precision(j) == doctest::Approx(0.5));
    j.ranking = {1, 2, 3};
    j.grades = {{1, 1}, {3, 2}};
    CHECK(average_precision(j) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    j.grades = {{9, 0}};
    CHECK(average_precision(j) == 0.0);
    CHECK(mean_average_precision({j, RankedJudgment{{1}, {{1, 1}}}}) == doctest::Approx(0.5));
}

TEST_CASE("ndcg") {
    RankedJudgment j;
    j.ranking = {1, 2, 3};
    j.grades = {{1, 2}, {2, 1}};
    CHECK(ndcg_at_k(j) == doctest::Approx(1.0));
    j.grades = {{2, 1}};
    CHECK(ndcg_at_k(j, 2) == doctest::Approx(1.0 / std::log2(3.0)));
    CHECK(ndcg_at_k(j, 2) == doctest::Approx(0.63093).epsilon(1e-5));
    CHECK(ndcg_at_k(j, 1) == 0.0);
    j.grades.clear();
    CHECK(ndcg_at_k(j) == 0.0);
    CHECK_THROWS(ndcg_at_k(j, 0));
}

TEST_CASE("relative measures") {
    CHECK(rer(100.0, 80.0, 90.0) == doctest::Approx(0.5));
    CHECK(rer(100.0, 80.0, 80.0) == 0.0);
    CHECK(ri(20.0, 22.0) == doctest::Approx(0.1));
    CHECK(ri(20.0, 20.0) == 0.0);
    CHECK_THROWS(rer(80.0, 80.0, 90.0));
    CHECK_THROWS(ri(0.0, 1.0));
}

TEST_CASE("paired one-tailed t-test") {
    const TTest r = paired_t_test_one_tailed({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0});
    CHECK(r.t == doctest::Approx(2.0 * std::sqrt(3.0)));
    // closed form for two degrees of freedom
    CHECK(r.p == doctest::Approx(0.5 * (1.0 - r.t / std::sqrt(2.0 + r.t * r.t))).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.0371).epsilon(1e-3));
    CHECK(significance_flag(r.p) == "‡");
    CHECK(significance_flag(0.001) == "†");
    CHECK(significance_flag(0.2) == "");

    CHECK_THROWS(paired_t_test_one_tailed({1, 1, 1, 1}, {0, 0, 0, 0}));
    CHECK_THROWS(paired_t_test_one_tailed({1}, {0}));
    CHECK(paired_t_test_one_tailed({1, 3}, {2, 2}).t == 0.0);
    CHECK(paired_t_test_one_tailed({1, 3}, {2, 2}).p == doctest::Approx(0.5));
    // one degree of freedom: Cauchy tail
    CHECK(student_t_upper_tail(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(student_t_upper_tail(-1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("incomplete beta edge values") {
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x; I_x(a,1) = x^a
    CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(incomplete_beta(3.0, 1.0, 0.6) == doctest::Approx(0.216).epsilon(1e-14));
}

TEST_CASE("judgment, ranking and prediction files") {
    std::istringstream j("0 5 1\n0 6 0\n1 2 2\n");
    std::istringstream r("0 2 6 -1.5\n0 1 5 -1.0\n1 1 3 -2\n");
    std::istringstream p("1 2,3 -4.0\n0 1 -3.5\n");
    const auto js = join_judgments(read_rankings(r), read_judgments(j));
    REQUIRE(js.size() == 2);
    CHECK(js[0].ranking == std::vector<LabelId>{5, 6});
    CHECK(average_precision(js[0]) == 1.0);
    CHECK(average_precision(js[1]) == 0.0);
    const auto preds = read_predictions(p);
    REQUIRE(preds.size() == 2);
    CHECK(preds[1] == LabelSet{2, 3});
    std::istringstream bad("0 1\n");
    CHECK_THROWS(read_judgments(bad));
}
