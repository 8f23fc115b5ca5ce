#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace sgm;

TEST_CASE("discount amounts") {
    CHECK(discount_amount(3.0, DiscountSpec::absolute(0.5)) == 0.5);
    CHECK(discount_amount(0.2, DiscountSpec::absolute(0.5)) == 0.2);
    CHECK(discount_amount(0.0, DiscountSpec::power_law(0.7)) == 0.0);
    CHECK(discount_amount(4.0, DiscountSpec::linear(0.3)) == doctest::Approx(1.2));
    CHECK(discount_amount(4.0, DiscountSpec::power_law(0.5)) == doctest::Approx(1.0));
    const double p = 0.5 * std::pow(4.0, 0.5);
    CHECK(discount_amount(4.0, DiscountSpec::combined(0.5, 0.2)) == doctest::Approx(p + 0.2 * (4.0 - p)));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
        const double c = testing::uniform(rng, 0.0, 5.0);
        const SmoothingConfig cfg = testing::random_smoothing(rng, static_cast<std::size_t>(i));
        const double d = discount_amount(c, cfg.discount);
        CHECK(d >= 0.0);
        CHECK(d <= c);
    }
}

TEST_CASE("smoothing weights per classic method") {
    const SparseVector counts = testing::vec({{0, 3.0}, {1, 6.0}});
    CHECK(smoothing_weight(counts, DiscountSpec::linear(0.3), 0.0) == doctest::Approx(0.3));
    CHECK(smoothing_weight(counts, DiscountSpec::none(), 1.0) == doctest::Approx(0.1));
    CHECK(smoothing_weight(testing::vec({{0, 3.0}, {1, 1.0}}), DiscountSpec::absolute(0.5), 0.0) ==
          doctest::Approx(0.25));
    CHECK(smoothing_weight(counts, DiscountSpec::linear(0.5), 9.0) == doctest::Approx(1.0 - 4.5 / 18.0));
    CHECK(smoothing_weight(SparseVector{}, DiscountSpec::linear(0.5), 0.0) == 1.0);
}

TEST_CASE("background models") {
    const std::map<LabelId, SparseVector> counts = {{0, testing::vec({{1, 2.0}, {2, 1.0}})},
                                                    {1, testing::vec({{1, 1.0}})}};
    BackgroundSpec s;
    s.kind = BackgroundKind::uniform;
    CHECK(background_model(counts, 4, s).isApprox(Vector::Constant(4, 0.25)));
    s.kind = BackgroundKind::collection;
    Vector coll = background_model(counts, 3, s);
    CHECK(coll[1] == doctest::Approx(0.75));
    CHECK(coll[2] == doctest::Approx(0.25));
    s.kind = BackgroundKind::kn_context;
    Vector kn = background_model(counts, 3, s);
    CHECK(kn[1] == doctest::Approx(2.0 / 3.0));
    CHECK(kn[2] == doctest::Approx(1.0 / 3.0));
    s.kind = BackgroundKind::uniform_smoothed_collection;
    s.upsilon = 0.4;
    Vector us = background_model(counts, 3, s);
    CHECK(us[0] == doctest::Approx(0.4 / 3.0));
    CHECK(us[1] == doctest::Approx(0.6 * 0.75 + 0.4 / 3.0));
    s.kind = BackgroundKind::power_residual;
    s.delta = 0.5;
    Vector pr = background_model(counts, 3, s);
    const double a = 0.5 * std::sqrt(2.0) + 0.5, b = 0.5;
    CHECK(pr[1] == doctest::Approx(a / (a + b)));

    s.kind = BackgroundKind::collection;
    CHECK_THROWS(background_model(std::map<LabelId, SparseVector>{}, 3, s));
}

TEST_CASE("kneser-ney discount estimate") {
    CHECK(kneser_ney_delta(2.0, 1.0) == doctest::Approx(0.5));
    CHECK(kneser_ney_delta(0.0, 3.0) == 0.0);
    CHECK(kneser_ney_delta(1.5, 0.0) == 1.0);
    CHECK(kneser_ney_delta(0.0, 0.0) == 0.0);
}

TEST_CASE("smoothed conditional examples") {
    SmoothingConfig cfg = testing::toy_smoothing();
    const Vector bg = Vector::Constant(2, 0.5);
    const Vector p = smooth_conditional(testing::vec({{0, 2.0}}), bg, cfg);
    CHECK(p[0] == doctest::Approx(0.75));
    CHECK(p[1] == doctest::Approx(0.25));
    CHECK(interpolate(testing::vec({{0, 1.0}}), 1.0, bg).isApprox(bg));
    CHECK(interpolate(testing::vec({{0, 0.25}, {1, 0.75}}), 0.0, bg).isApprox(Vector{{0.25, 0.75}}));
}

TEST_CASE("normalization across random configurations") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + testing::pick(rng, 30);
        const SmoothingConfig cfg = testing::random_smoothing(rng, static_cast<std::size_t>(trial));
        std::map<LabelId, SparseVector> table;
        for (LabelId l = 0; l < 4; ++l) table[l] = testing::random_vector(rng, n, 8, true);
        const Vector bg = background_model(table, n, cfg.background);
        CHECK(std::abs(bg.sum() - 1.0) < 1e-12);
        CHECK(bg.minCoeff() >= 0.0);
        for (const auto& [l, counts] : table) {
            const double alpha = smoothing_weight(counts, cfg);
            CHECK(alpha >= 0.0);
            CHECK(alpha <= 1.0);
            const Vector p = smooth_conditional(counts, bg, cfg);
            CHECK(std::abs(p.sum() - 1.0) < 1e-12);
            CHECK(p.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("generalized smoothing subsumes the dedicated formulas") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + testing::pick(rng, 20);
        const SparseVector counts = testing::random_vector(rng, n, 10, true);
        Vector bg = Vector::NullaryExpr(static_cast<Eigen::Index>(n), [&] { return testing::uniform(rng, 0.01, 1.0); });
        bg /= bg.sum();
        const double beta = testing::uniform(rng, 0.0, 1.0);
        const double delta = testing::uniform(rng, 0.0, 1.0);
        const double mu = testing::uniform(rng, 0.01, 20.0);

        auto general = [&](DiscountSpec d, double m) {
            SmoothingConfig c;
            c.discount = d;
            c.mu = m;
            return std::pair{smoothing_weight(counts, c), smooth_conditional(counts, bg, c)};
        };
        auto same = [](const classic::Smoothed& a, const std::pair<double, Vector>& b) {
            CHECK(std::abs(a.alpha - b.first) < 1e-12);
            CHECK((a.conditional - b.second).cwiseAbs().maxCoeff() < 1e-12);
        };
        if (beta > 0.0) same(classic::jelinek_mercer(counts, bg, beta), general(DiscountSpec::linear(beta), 0.0));
        same(classic::dirichlet(counts, bg, mu), general(DiscountSpec::none(), mu));
        same(classic::two_stage(counts, bg, beta, mu), general(DiscountSpec::linear(beta), mu));
        if (delta > 0.0) {
            same(classic::absolute(counts, bg, delta), general(DiscountSpec::absolute(delta), 0.0));
            same(classic::power_law(counts, bg, delta), general(DiscountSpec::power_law(delta), 0.0));
        }
        same(classic::pitman_yor(counts, bg, delta, mu), general(DiscountSpec::power_law(delta), mu));
    }
}

TEST_CASE("configuration validation") {
    SmoothingConfig c;
    CHECK_THROWS(c.validate());
    c.mu = 1.0;
    CHECK_NOTHROW(c.validate());
    c.discount = DiscountSpec::linear(1.5);
    CHECK_THROWS(c.validate());
    CHECK(parse_discount_kind("jm") == DiscountKind::linear);
    CHECK_THROWS(parse_discount_kind("wb"));
}
