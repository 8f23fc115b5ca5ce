#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgm/models.hpp"

namespace sgm {

/// (node, ln p''_node(n) - ln(alpha_node p''_parent(n))).
struct Posting {
    NodeId node;
    double delta;
    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Leaves of one label sharing the same backoff weight.
struct AlphaGroup {
    double log_alpha;
    std::int32_t size;
    friend bool operator==(const AlphaGroup&, const AlphaGroup&) = default;
};

/// Precomputed log-domain decomposition of a GenerativeModel, with
/// term-keyed postings over the nodes whose unsmoothed distribution has
/// support on the term. Immutable once built.
class InvertedIndex {
  public:
    ModelKind kind() const { return kind_; }
    std::size_t num_terms() const { return static_cast<std::size_t>(root_logprob_.size()); }
    std::size_t num_nodes() const { return parent_.size(); }
    std::size_t num_labels() const { return label_ids_.size(); }
    std::size_t num_postings() const { return postings_.size(); }
    std::size_t depth() const { return depth_; }

    /// ln p''_root(n); -inf for terms without background mass or outside the dictionary.
    double root_logprob(TermId term) const {
        return (term >= 0 && term < root_logprob_.size()) ? root_logprob_[term] : kNegInf;
    }
    std::span<const Posting> postings(TermId term) const;

    NodeId parent(NodeId node) const { return parent_[node]; }
    double log_alpha(NodeId node) const { return log_alpha_[node]; }
    std::int32_t children_count(NodeId node) const { return children_count_[node]; }
    /// Mean ln alpha over the children of `node`, 0 for leaves.
    double default_child_log_alpha(NodeId node) const { return default_child_log_alpha_[node]; }
    /// Sum of ln alpha over the non-root nodes from the root down to `node`.
    double path_log_alpha(NodeId node) const { return path_log_alpha_[node]; }
    bool is_leaf(NodeId node) const { return children_count_[node] == 0; }
    /// Class index of a label-level or leaf node, -1 above.
    std::int32_t node_label(NodeId node) const { return node_label_[node]; }

    const std::vector<NodeId>& leaves() const { return leaves_; }
    std::span<const NodeId> leaves_of(std::size_t label) const;
    /// The common parent of a label's leaves, or the leaf itself for depth-2 trees.
    NodeId label_node(std::size_t label) const { return label_node_[label]; }
    std::span<const AlphaGroup> alpha_groups(std::size_t label) const;
    /// Position of a leaf's group within alpha_groups(label).
    std::int32_t leaf_group(NodeId leaf) const { return leaf_group_[leaf]; }
    /// False when leaves of some label have different parents.
    bool grouped_labels() const { return grouped_labels_; }

    double label_log_prior(std::size_t label) const { return label_log_prior_[static_cast<Eigen::Index>(label)]; }
    const Vector& label_log_priors() const { return label_log_prior_; }
    const std::vector<LabelId>& label_ids() const { return label_ids_; }
    const std::optional<PowersetCodec>& codec() const { return codec_; }
    const std::optional<LengthModel>& length_model() const { return length_; }
    const TermStats& term_stats() const { return term_stats_; }
    const WeightingConfig& weighting() const { return weighting_; }

    LabelSet decode(std::size_t label) const;

    friend InvertedIndex build_index(const GenerativeModel& model);
    friend void save_index(std::ostream& out, const InvertedIndex& index);
    friend InvertedIndex load_index(std::istream& in);

  private:
    ModelKind kind_ = ModelKind::mnb;
    std::size_t depth_ = 0;
    Vector root_logprob_;
    std::vector<std::int64_t> posting_offsets_;  // CSR over terms
    std::vector<Posting> postings_;
    std::vector<NodeId> parent_;
    std::vector<double> log_alpha_;
    std::vector<std::int32_t> children_count_;
    std::vector<double> default_child_log_alpha_;
    std::vector<double> path_log_alpha_;
    std::vector<std::int32_t> node_label_;
    std::vector<NodeId> leaves_;
    std::vector<std::int64_t> label_leaf_offsets_;  // CSR over labels
    std::vector<NodeId> label_leaves_;
    std::vector<NodeId> label_node_;
    std::vector<std::int64_t> group_offsets_;  // CSR over labels
    std::vector<AlphaGroup> groups_;
    std::vector<std::int32_t> leaf_group_;
    bool grouped_labels_ = true;
    Vector label_log_prior_;
    std::vector<LabelId> label_ids_;
    std::optional<PowersetCodec> codec_;
    std::optional<LengthModel> length_;
    TermStats term_stats_;
    WeightingConfig weighting_;
};

/// Smooths every node top-down and stores, for each node with p^u(n) > 0,
/// the log-ratio of its smoothed probability to its pure backoff value.
InvertedIndex build_index(const GenerativeModel& model);

struct IndexStats {
    std::size_t num_terms = 0;  // terms with at least one posting
    std::size_t num_postings = 0;
    std::size_t bytes_estimate = 0;
};

IndexStats index_stats(const InvertedIndex& index);

/// Applies the index's query-side weighting for the given role.
SparseVector weight_query(const InvertedIndex& index, const SparseVector& v, VectorRole role);

void save_index(std::ostream& out, const InvertedIndex& index);
InvertedIndex load_index(std::istream& in);
void save_index(const std::string& path, const InvertedIndex& index);
InvertedIndex load_index(const std::string& path);

/// Human-readable postings listing.
void dump_index(std::ostream& out, const InvertedIndex& index);

}  // namespace sgm
