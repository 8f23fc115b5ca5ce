#include "sgm/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgm {

namespace {

void check_unit(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
}

// delta * c^delta, with 0^delta = 0.
double power_term(double c, double delta) { return c > 0.0 ? delta * std::pow(c, delta) : 0.0; }

}  // namespace

void DiscountSpec::validate() const {
    check_unit(beta, "beta");
    check_unit(delta, "delta");
}

void BackgroundSpec::validate() const {
    check_unit(upsilon, "upsilon_bg");
    check_unit(delta, "background delta");
}

void SmoothingConfig::validate() const {
    discount.validate();
    background.validate();
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be finite and >= 0");
    if (discount.kind == DiscountKind::none && mu <= 0.0)
        throw std::invalid_argument("smoothing needs a discount or mu > 0");
}

double discount_amount(double c, const DiscountSpec& spec) {
    if (c <= 0.0) return 0.0;
    switch (spec.kind) {
        case DiscountKind::none:
            return 0.0;
        case DiscountKind::linear:
            return spec.beta * c;
        case DiscountKind::absolute:
            return std::min(spec.delta, c);
        case DiscountKind::power_law:
            return std::min(power_term(c, spec.delta), c);
        case DiscountKind::combined: {
            const double p = std::min(power_term(c, spec.delta), c);
            return p + spec.beta * (c - p);
        }
    }
    return 0.0;
}

double smoothing_weight(const SparseVector& counts, const DiscountSpec& discount, double mu) {
    double total = 0.0;
    double kept = 0.0;
    for (const Entry& e : counts) {
        total += e.weight;
        kept += e.weight - discount_amount(e.weight, discount);
    }
    if (total + mu <= 0.0) return 1.0;
    return std::clamp(1.0 - kept / (mu + total), 0.0, 1.0);
}

SparseVector unsmoothed_distribution(const SparseVector& counts, const DiscountSpec& discount) {
    std::vector<Entry> kept;
    kept.reserve(counts.l0());
    double total = 0.0;
    for (const Entry& e : counts) {
        const double c = e.weight - discount_amount(e.weight, discount);
        if (c > 0.0) {
            kept.push_back({e.term, c});
            total += c;
        }
    }
    for (Entry& e : kept) e.weight /= total;
    return SparseVector::from_sorted(std::move(kept));
}

Vector background_model(const std::map<LabelId, SparseVector>& label_counts, std::size_t num_terms,
                        const BackgroundSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(num_terms);
    if (n == 0) throw std::invalid_argument("background model over an empty dictionary");
    if (spec.kind == BackgroundKind::uniform) return Vector::Constant(n, 1.0 / static_cast<double>(n));

    Vector mass = Vector::Zero(n);
    for (const auto& [label, counts] : label_counts) {
        for (const Entry& e : counts) {
            if (e.term >= n) continue;
            switch (spec.kind) {
                case BackgroundKind::collection:
                case BackgroundKind::uniform_smoothed_collection:
                    mass[e.term] += e.weight;
                    break;
                case BackgroundKind::kn_context:
                    mass[e.term] += 1.0;
                    break;
                case BackgroundKind::power_residual:
                    mass[e.term] += std::min(power_term(e.weight, spec.delta), e.weight);
                    break;
                case BackgroundKind::uniform:
                    break;
            }
        }
    }
    const double total = mass.sum();
    if (!(total > 0.0)) throw std::invalid_argument("background statistics are all zero");
    mass /= total;
    if (spec.kind == BackgroundKind::uniform_smoothed_collection)
        mass = (1.0 - spec.upsilon) * mass.array() + spec.upsilon / static_cast<double>(n);
    return mass;
}

Vector background_model(const Collection& collection, const BackgroundSpec& spec) {
    return background_model(collection.joint_counts(), collection.num_terms(), spec);
}

double kneser_ney_delta(double n1, double n2) {
    const double den = n1 + 2.0 * n2;
    if (!(den > 0.0)) return 0.0;
    return std::clamp(n1 / den, 0.0, 1.0);
}

Vector interpolate(const SparseVector& dist, double alpha, const Vector& background) {
    Vector out = alpha * background;
    for (const Entry& e : dist) out[e.term] += (1.0 - alpha) * e.weight;
    return out;
}

Vector smooth_conditional(const SparseVector& counts, const Vector& background, const SmoothingConfig& cfg) {
    cfg.validate();
    const double alpha = smoothing_weight(counts, cfg);
    return interpolate(unsmoothed_distribution(counts, cfg.discount), alpha, background);
}

DiscountKind parse_discount_kind(const std::string& s) {
    if (s == "none") return DiscountKind::none;
    if (s == "linear" || s == "jm") return DiscountKind::linear;
    if (s == "absolute" || s == "ad") return DiscountKind::absolute;
    if (s == "power_law" || s == "pd") return DiscountKind::power_law;
    if (s == "combined" || s == "pd_jm") return DiscountKind::combined;
    throw std::invalid_argument("unknown discount '" + s + "'");
}

BackgroundKind parse_background_kind(const std::string& s) {
    if (s == "uniform") return BackgroundKind::uniform;
    if (s == "collection") return BackgroundKind::collection;
    if (s == "uniform_smoothed_collection") return BackgroundKind::uniform_smoothed_collection;
    if (s == "kn_context") return BackgroundKind::kn_context;
    if (s == "power_residual") return BackgroundKind::power_residual;
    throw std::invalid_argument("unknown background '" + s + "'");
}

MuScale parse_mu_scale(const std::string& s) {
    if (s == "raw") return MuScale::raw;
    if (s == "per_label") return MuScale::per_label;
    throw std::invalid_argument("unknown mu scale '" + s + "'");
}

std::string to_string(DiscountKind k) {
    switch (k) {
        case DiscountKind::none: return "none";
        case DiscountKind::linear: return "linear";
        case DiscountKind::absolute: return "absolute";
        case DiscountKind::power_law: return "power_law";
        case DiscountKind::combined: return "combined";
    }
    return "?";
}

std::string to_string(BackgroundKind k) {
    switch (k) {
        case BackgroundKind::uniform: return "uniform";
        case BackgroundKind::collection: return "collection";
        case BackgroundKind::uniform_smoothed_collection: return "uniform_smoothed_collection";
        case BackgroundKind::kn_context: return "kn_context";
        case BackgroundKind::power_residual: return "power_residual";
    }
    return "?";
}

std::string to_string(MuScale s) { return s == MuScale::raw ? "raw" : "per_label"; }

// --------------------------------------------------------------------- classic

namespace classic {

namespace {

double count_sum(const SparseVector& counts) {
    double s = 0.0;
    for (const Entry& e : counts) s += e.weight;
    return s;
}

// Normalizes C'(n) over its positive support, mixes with the background.
Smoothed mix(const SparseVector& counts, const Vector& background, double alpha,
             double (*discounted)(double, double), double param) {
    Vector pu = Vector::Zero(background.size());
    double z = 0.0;
    for (const Entry& e : counts) {
        const double c = std::max(0.0, discounted(e.weight, param));
        pu[e.term] = c;
        z += c;
    }
    if (z > 0.0) pu /= z;
    return {alpha, (1.0 - alpha) * pu + alpha * background};
}

double identity(double c, double) { return c; }
double minus_delta(double c, double delta) { return c - delta; }
double minus_power(double c, double delta) { return c - delta * std::pow(c, delta); }

double kept_sum(const SparseVector& counts, double (*discounted)(double, double), double param) {
    double s = 0.0;
    for (const Entry& e : counts) s += std::max(0.0, discounted(e.weight, param));
    return s;
}

}  // namespace

Smoothed jelinek_mercer(const SparseVector& counts, const Vector& background, double beta) {
    const double total = count_sum(counts);
    Vector p = beta * background;
    if (total > 0.0)
        for (const Entry& e : counts) p[e.term] += (1.0 - beta) * e.weight / total;
    else
        p = background;
    return {total > 0.0 ? beta : 1.0, p};
}

Smoothed dirichlet(const SparseVector& counts, const Vector& background, double mu) {
    const double total = count_sum(counts);
    Vector p = mu * background;
    for (const Entry& e : counts) p[e.term] += e.weight;
    p /= total + mu;
    return {mu / (mu + total), p};
}

Smoothed two_stage(const SparseVector& counts, const Vector& background, double beta, double mu) {
    const double total = count_sum(counts);
    const double alpha = 1.0 - (total - beta * total) / (mu + total);
    return mix(counts, background, alpha, identity, 0.0);
}

Smoothed absolute(const SparseVector& counts, const Vector& background, double delta) {
    const double total = count_sum(counts);
    const double alpha = 1.0 - kept_sum(counts, minus_delta, delta) / total;
    return mix(counts, background, alpha, minus_delta, delta);
}

Smoothed power_law(const SparseVector& counts, const Vector& background, double delta) {
    const double total = count_sum(counts);
    const double alpha = 1.0 - kept_sum(counts, minus_power, delta) / total;
    return mix(counts, background, alpha, minus_power, delta);
}

Smoothed pitman_yor(const SparseVector& counts, const Vector& background, double delta, double mu) {
    const double total = count_sum(counts);
    const double alpha = 1.0 - kept_sum(counts, minus_power, delta) / (mu + total);
    return mix(counts, background, alpha, minus_power, delta);
}

}  // namespace classic

}  // namespace sgm
