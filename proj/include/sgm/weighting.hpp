#pragma once

#include <string>
#include <vector>

#include "sgm/corpus.hpp"

namespace sgm {

enum class WeightingMode { none, document_and_train, query_only };
enum class IdfVariant { robertson_walker, croft_harper_smoothed, croft_harper_unsmoothed };
enum class VectorRole { train_doc, test_doc, query };

struct WeightingConfig {
    double phi = 0.0;      // length scaling
    double upsilon = 0.0;  // IDF lifting
    WeightingMode mode = WeightingMode::none;
    IdfVariant idf_variant = IdfVariant::robertson_walker;

    void validate() const;
};

/// Document frequencies of a training collection.
struct TermStats {
    std::vector<double> df;
    double num_docs = 0.0;

    static TermStats from(const Collection& collection);
    double doc_freq(TermId term) const {
        return (term >= 0 && static_cast<std::size_t>(term) < df.size()) ? df[term] : 0.0;
    }
};

double idf(TermId term, const TermStats& stats, IdfVariant variant);

/// ln(max(1, upsilon + I/I_n)).
double lifted_idf(double num_docs, double doc_freq, double upsilon);

/// Generalized TF-IDF: log-damped counts, phi-interpolated unique-length
/// normalization, lifted IDF. Terms absent from `stats` are dropped first.
SparseVector tfidf_transform(const SparseVector& v, const TermStats& stats, const WeightingConfig& cfg);

SparseVector apply_weighting(const SparseVector& v, VectorRole role, const TermStats& stats,
                             const WeightingConfig& cfg);

WeightingMode parse_weighting_mode(const std::string& s);
IdfVariant parse_idf_variant(const std::string& s);
std::string to_string(WeightingMode m);
std::string to_string(IdfVariant v);

}  // namespace sgm
