#pragma once

#include <map>
#include <string>

#include "sgm/corpus.hpp"

namespace sgm {

enum class DiscountKind { none, linear, absolute, power_law, combined };

/// D(c) subtracted from each observed count before normalization.
struct DiscountSpec {
    DiscountKind kind = DiscountKind::none;
    double beta = 0.0;
    double delta = 0.0;

    static DiscountSpec none() { return {}; }
    static DiscountSpec linear(double beta) { return {DiscountKind::linear, beta, 0.0}; }
    static DiscountSpec absolute(double delta) { return {DiscountKind::absolute, 0.0, delta}; }
    static DiscountSpec power_law(double delta) { return {DiscountKind::power_law, 0.0, delta}; }
    static DiscountSpec combined(double delta, double beta) { return {DiscountKind::combined, beta, delta}; }

    void validate() const;
};

enum class BackgroundKind { uniform, collection, uniform_smoothed_collection, kn_context, power_residual };

struct BackgroundSpec {
    BackgroundKind kind = BackgroundKind::collection;
    double upsilon = 0.0;  // uniform share for uniform_smoothed_collection
    double delta = 0.0;    // exponent for power_residual

    void validate() const;
};

/// How `mu` is read: as is, or multiplied by the label count.
enum class MuScale { raw, per_label };

struct SmoothingConfig {
    DiscountSpec discount;
    BackgroundSpec background;
    double mu = 0.0;
    MuScale mu_scale = MuScale::raw;

    void validate() const;
    double effective_mu(std::size_t num_labels) const {
        return mu_scale == MuScale::per_label ? mu * static_cast<double>(num_labels) : mu;
    }
};

/// 0 <= D(c) <= c for every spec.
double discount_amount(double count, const DiscountSpec& spec);

/// alpha = 1 - sum(C - D) / (mu + sum C); 1 for an empty count vector.
double smoothing_weight(const SparseVector& counts, const DiscountSpec& discount, double mu);
inline double smoothing_weight(const SparseVector& counts, const SmoothingConfig& cfg) {
    return smoothing_weight(counts, cfg.discount, cfg.mu);
}

/// (C - D) normalized over its support; empty when nothing survives.
SparseVector unsmoothed_distribution(const SparseVector& counts, const DiscountSpec& discount);

Vector background_model(const std::map<LabelId, SparseVector>& label_counts, std::size_t num_terms,
                        const BackgroundSpec& spec);
Vector background_model(const Collection& collection, const BackgroundSpec& spec);

/// n1 / (n1 + 2 n2), 0 when the denominator vanishes.
double kneser_ney_delta(double n1, double n2);

/// Dense (1 - alpha) p^u_l + alpha p^u.
Vector smooth_conditional(const SparseVector& counts, const Vector& background, const SmoothingConfig& cfg);

/// Interpolates a sparse distribution with a dense one.
Vector interpolate(const SparseVector& dist, double alpha, const Vector& background);

DiscountKind parse_discount_kind(const std::string& s);
BackgroundKind parse_background_kind(const std::string& s);
MuScale parse_mu_scale(const std::string& s);
std::string to_string(DiscountKind k);
std::string to_string(BackgroundKind k);
std::string to_string(MuScale s);

/// Textbook forms of the classic smoothing methods, written directly from
/// their own formulas rather than through discount_amount/smoothing_weight.
namespace classic {

struct Smoothed {
    double alpha;
    Vector conditional;
};

Smoothed jelinek_mercer(const SparseVector& counts, const Vector& background, double beta);
Smoothed dirichlet(const SparseVector& counts, const Vector& background, double mu);
Smoothed two_stage(const SparseVector& counts, const Vector& background, double beta, double mu);
Smoothed absolute(const SparseVector& counts, const Vector& background, double delta);
Smoothed power_law(const SparseVector& counts, const Vector& background, double delta);
Smoothed pitman_yor(const SparseVector& counts, const Vector& background, double delta, double mu);

}  // namespace classic

}  // namespace sgm
