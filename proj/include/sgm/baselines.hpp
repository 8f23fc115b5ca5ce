#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sgm/inference.hpp"

namespace sgm {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    double k3 = 8.0;
    IdfVariant idf_variant = IdfVariant::croft_harper_smoothed;

    void validate() const;
};

/// Training-collection statistics for BM25: document frequencies and the
/// mean document L1 length A.
struct Bm25Stats {
    TermStats terms;
    double avg_length = 0.0;

    static Bm25Stats from(const Collection& collection);
};

/// Cosine of the two vectors; 0 when either is empty.
double vsm_score(const SparseVector& train_vec, const SparseVector& query);

/// (k1+1) w / (k1((1-b) + b|w|_1/A) + w) scaled by IDF, times the query
/// transform (k3+1) q / (k3 + q), summed over shared terms.
double bm25_score(const SparseVector& doc, const SparseVector& query, const Bm25Params& params,
                  const Bm25Stats& stats);

enum class Scorer { sgm, vsm, bm25 };
Scorer parse_scorer(const std::string& s);
std::string to_string(Scorer s);

/// One prototype per label (the sum of its training documents), scored
/// through term-keyed lists of precomputed per-label parameters.
class BaselineRanker {
  public:
    BaselineRanker(const Collection& collection, Scorer scorer, const Bm25Params& bm25 = {},
                   const WeightingConfig& weighting = {});

    Scorer scorer() const { return scorer_; }
    std::size_t num_labels() const { return label_ids_.size(); }
    const std::vector<LabelId>& label_ids() const { return label_ids_; }
    const SparseVector& prototype(std::size_t label) const { return prototypes_[label]; }

    /// Scores per class index, after query-side weighting.
    Vector scores(const SparseVector& query) const;
    std::vector<Ranked> rank(const SparseVector& query, std::size_t k) const;
    /// Highest score, ties to the lowest label id.
    LabelId classify(const SparseVector& query) const;

  private:
    Scorer scorer_;
    Bm25Params bm25_;
    Bm25Stats stats_;
    WeightingConfig weighting_;
    TermStats term_stats_;
    std::vector<LabelId> label_ids_;
    std::vector<SparseVector> prototypes_;
    std::vector<std::vector<std::pair<std::int32_t, double>>> lists_;  // term -> (class, theta)
};

}  // namespace sgm
