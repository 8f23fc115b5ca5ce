#include "sgm/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgm {

void WeightingConfig::validate() const {
    if (!std::isfinite(phi)) throw std::invalid_argument("weighting.phi must be finite");
    if (!std::isfinite(upsilon)) throw std::invalid_argument("weighting.upsilon must be finite");
}

TermStats TermStats::from(const Collection& collection) {
    return {collection.doc_freqs(), static_cast<double>(collection.num_docs())};
}

double lifted_idf(double num_docs, double doc_freq, double upsilon) {
    return std::log(std::max(1.0, upsilon + num_docs / doc_freq));
}

double idf(TermId term, const TermStats& stats, IdfVariant variant) {
    if (stats.num_docs < 1.0) throw std::invalid_argument("idf needs a non-empty collection");
    const double in = stats.doc_freq(term);
    if (in <= 0.0) throw std::invalid_argument("term " + std::to_string(term) + " absent from collection");
    const double i = stats.num_docs;
    switch (variant) {
        case IdfVariant::robertson_walker:
            return std::log(i / in);
        case IdfVariant::croft_harper_smoothed:
            return std::log((i - in + 0.5) / (in + 0.5));
        case IdfVariant::croft_harper_unsmoothed:
            return lifted_idf(i, in, -1.0);
    }
    return 0.0;
}

SparseVector tfidf_transform(const SparseVector& v, const TermStats& stats, const WeightingConfig& cfg) {
    std::vector<Entry> known;
    known.reserve(v.l0());
    for (const Entry& e : v)
        if (stats.doc_freq(e.term) > 0.0) known.push_back(e);
    if (known.empty()) return {};

    const double l0 = static_cast<double>(known.size());
    const double inner = std::pow(l0, cfg.phi);
    const double outer = std::pow(l0, 1.0 - cfg.phi);
    std::vector<Entry> out;
    out.reserve(known.size());
    for (const Entry& e : known) {
        const double w = std::log1p(e.weight / inner) / outer *
                         lifted_idf(stats.num_docs, stats.doc_freq(e.term), cfg.upsilon);
        if (w > 0.0) out.push_back({e.term, w});
    }
    return SparseVector::from_sorted(std::move(out));
}

SparseVector apply_weighting(const SparseVector& v, VectorRole role, const TermStats& stats,
                             const WeightingConfig& cfg) {
    switch (cfg.mode) {
        case WeightingMode::none:
            return v;
        case WeightingMode::document_and_train:
            return tfidf_transform(v, stats, cfg);
        case WeightingMode::query_only: {
            if (role == VectorRole::train_doc) return v;
            std::vector<Entry> out;
            out.reserve(v.l0());
            for (const Entry& e : v) {
                const double in = stats.doc_freq(e.term);
                if (in <= 0.0) continue;
                const double w = e.weight * lifted_idf(stats.num_docs, in, cfg.upsilon);
                if (w > 0.0) out.push_back({e.term, w});
            }
            return SparseVector::from_sorted(std::move(out));
        }
    }
    return v;
}

WeightingMode parse_weighting_mode(const std::string& s) {
    if (s == "none") return WeightingMode::none;
    if (s == "document_and_train" || s == "ti") return WeightingMode::document_and_train;
    if (s == "query_only" || s == "qidf") return WeightingMode::query_only;
    throw std::invalid_argument("unknown weighting mode '" + s + "'");
}

IdfVariant parse_idf_variant(const std::string& s) {
    if (s == "robertson_walker") return IdfVariant::robertson_walker;
    if (s == "croft_harper_smoothed") return IdfVariant::croft_harper_smoothed;
    if (s == "croft_harper_unsmoothed") return IdfVariant::croft_harper_unsmoothed;
    throw std::invalid_argument("unknown idf variant '" + s + "'");
}

std::string to_string(WeightingMode m) {
    switch (m) {
        case WeightingMode::none: return "none";
        case WeightingMode::document_and_train: return "document_and_train";
        case WeightingMode::query_only: return "query_only";
    }
    return "?";
}

std::string to_string(IdfVariant v) {
    switch (v) {
        case IdfVariant::robertson_walker: return "robertson_walker";
        case IdfVariant::croft_harper_smoothed: return "croft_harper_smoothed";
        case IdfVariant::croft_harper_unsmoothed: return "croft_harper_unsmoothed";
    }
    return "?";
}

}  // namespace sgm
