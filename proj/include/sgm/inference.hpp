#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sgm/index.hpp"

namespace sgm {

/// Per-class log-joints with their normalization. Indexed by class index.
struct Posterior {
    Vector log_joint;
    Vector log_posterior;
    double log_marginal = kNegInf;
};

struct InferenceCounters {
    std::size_t postings_visited = 0;
    std::size_t node_evaluations = 0;
    std::size_t labels_scored = 0;
};

/// The part of a query the index can score: terms inside the dictionary
/// with background mass. `length` is |v|_1 over the retained terms.
struct QueryTerms {
    std::vector<Entry> terms;
    double length = 0.0;
    double shared = 0.0;  // sum of w_n ln p''_root(n)
};

QueryTerms prepare_query(const InvertedIndex& index, const SparseVector& v);

/// Adds w_n * delta into `node_scores[node]` for every posting of every
/// query term. `node_scores` must have num_nodes() entries.
void accumulate_postings(const InvertedIndex& index, const QueryTerms& q, std::span<double> node_scores,
                         InferenceCounters* counters = nullptr);

/// Depth-2 (MNB) posterior: prior + W alpha'_l + shared base per label,
/// then a single pass over the query's postings.
Posterior sparse_posterior(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters = nullptr);

/// Log-joint of every leaf, in index.leaves() order, sharing the work of
/// matched ancestors.
Vector hierarchical_joint(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters = nullptr);

/// ln p(w, l) per class for any tree depth. Labels with several leaves
/// average them uniformly; unmatched leaves are summed per backoff-weight
/// group in closed form.
Vector label_log_joints(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters = nullptr);

Posterior posterior(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters = nullptr);

enum class MarginalMode { exact, approximate };

/// ln p(w). The approximate mode scores matched labels exactly and folds
/// the rest into one term using the root's mean child backoff weight; it
/// is exact when every leaf has the same weight. Trees deeper than two
/// levels and length-modelled indexes always use exact summation.
double sparse_marginal(const InvertedIndex& index, const SparseVector& v, MarginalMode mode = MarginalMode::exact,
                       InferenceCounters* counters = nullptr);

/// Arg-max class index; ties go to the lowest index.
std::size_t classify_index(const InvertedIndex& index, const SparseVector& v);
LabelSet classify(const InvertedIndex& index, const SparseVector& v);

struct Ranked {
    LabelId label;  // external id (class id under Powerset)
    double score;
};

/// Top-k by log-joint, descending, ties by ascending label id.
std::vector<Ranked> rank(const InvertedIndex& index, const SparseVector& v, std::size_t k);
std::vector<Ranked> top_k(const Vector& scores, const std::vector<LabelId>& ids, std::size_t k);

/// Direct evaluation over fully materialized smoothed conditionals.
Posterior dense_oracle(const GenerativeModel& model, const SparseVector& v);

/// Normalizes a vector of log-joints.
Posterior normalize(Vector log_joint);

}  // namespace sgm
