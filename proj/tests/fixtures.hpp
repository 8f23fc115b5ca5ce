#pragma once

#include <random>
#include <sstream>
#include <string>

#include "sgm/index.hpp"
#include "sgm/inference.hpp"
#include "sgm/models.hpp"

namespace sgm::testing {

inline Collection parse(const std::string& text, bool expect_labels = true,
                        std::optional<std::size_t> dict_size = std::nullopt) {
    std::istringstream in(text);
    return parse_collection(in, expect_labels, dict_size);
}

inline SparseVector vec(std::vector<Entry> e) { return SparseVector::from_unsorted(std::move(e)); }

// Labels 1 and 2 with counts {t0:2} and {t1:2}; uniform background, JM 0.5.
inline Collection toy_collection() { return parse("1 0:2\n2 1:2\n"); }

inline SmoothingConfig toy_smoothing() {
    SmoothingConfig c;
    c.discount = DiscountSpec::linear(0.5);
    c.background.kind = BackgroundKind::uniform;
    return c;
}

inline GenerativeModel toy_model() { return train_mnb(toy_collection(), toy_smoothing()); }

// Two short snippets sharing "the" (term 1) and one other term.
inline Collection two_snippets() {
    return parse(
        "1 1:3 2:1 3:1 4:1 5:1 6:1 7:1 8:1 9:1 10:1\n"
        "2 1:2 5:1 11:1 12:1 13:1 14:1 15:1 16:1 17:1 18:1\n");
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline SparseVector random_vector(std::mt19937_64& rng, std::size_t num_terms, std::size_t max_l0, bool fractional,
                                  bool allow_empty = false) {
    std::vector<Entry> e;
    const std::size_t l0 = allow_empty ? pick(rng, max_l0 + 1) : 1 + pick(rng, max_l0);
    for (std::size_t k = 0; k < l0; ++k) {
        const auto t = static_cast<TermId>(pick(rng, num_terms));
        const double w = fractional ? uniform(rng, 0.05, 3.0) : static_cast<double>(1 + pick(rng, 4));
        e.push_back({t, w});
    }
    return SparseVector::from_unsorted(std::move(e));
}

inline Collection random_collection(std::mt19937_64& rng, std::size_t labels, std::size_t terms, std::size_t docs,
                                    bool fractional, bool multi_label = false) {
    std::vector<Document> out;
    for (std::size_t i = 0; i < docs; ++i) {
        Document d;
        d.vec = random_vector(rng, terms, 6, fractional);
        // every label gets at least one document
        std::vector<LabelId> ls{static_cast<LabelId>(i < labels ? i : pick(rng, labels))};
        if (multi_label && pick(rng, 3) == 0) ls.push_back(static_cast<LabelId>(pick(rng, labels)));
        d.labels = make_label_set(std::move(ls));
        out.push_back(std::move(d));
    }
    return Collection(std::move(out));
}

/// One of seven classic smoothing methods with random parameters.
inline SmoothingConfig random_smoothing(std::mt19937_64& rng, std::size_t row) {
    SmoothingConfig c;
    const double beta = uniform(rng, 0.05, 0.95);
    const double delta = uniform(rng, 0.05, 0.95);
    const double mu = uniform(rng, 0.1, 20.0);
    switch (row % 7) {
        case 0: c.discount = DiscountSpec::linear(beta); break;  // Jelinek-Mercer
        case 1: c.mu = mu; break;                                // Dirichlet
        case 2: c.discount = DiscountSpec::linear(beta); c.mu = mu; break;  // two-stage
        case 3: c.discount = DiscountSpec::absolute(delta); break;
        case 4: c.discount = DiscountSpec::power_law(delta); break;
        case 5: c.discount = DiscountSpec::power_law(delta); c.mu = mu; break;  // Pitman-Yor
        default: c.discount = DiscountSpec::combined(delta, beta); break;
    }
    c.background.kind = static_cast<BackgroundKind>(pick(rng, 5));
    c.background.upsilon = uniform(rng, 0.0, 1.0);
    c.background.delta = uniform(rng, 0.05, 1.0);
    if (pick(rng, 4) == 0) c.mu_scale = MuScale::per_label;
    return c;
}

inline GenerativeModel random_model(std::mt19937_64& rng, std::size_t row, bool tdm, std::size_t max_labels = 20,
                                    std::size_t max_terms = 50) {
    const std::size_t labels = 1 + pick(rng, max_labels);
    const std::size_t terms = 2 + pick(rng, max_terms - 1);
    const std::size_t docs = labels + pick(rng, 2 * labels + 1);
    const Collection c = random_collection(rng, labels, terms, docs, pick(rng, 2) == 0, pick(rng, 3) == 0);
    GenerativeModel m;
    if (tdm) {
        TdmSmoothing s{random_smoothing(rng, row), random_smoothing(rng, row + 1), random_smoothing(rng, row + 2)};
        m = train_tdm(c, s);
    } else {
        m = train_mnb(c, random_smoothing(rng, row));
    }
    if (pick(rng, 3) == 0) apply_prior_scaling(m, uniform(rng, 0.0, 2.0));
    if (pick(rng, 3) == 0) fit_length_model(m, c, uniform(rng, 0.0, 2.0));
    return m;
}

}  // namespace sgm::testing
