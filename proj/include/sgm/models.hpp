#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgm/corpus.hpp"
#include "sgm/smoothing.hpp"
#include "sgm/weighting.hpp"

namespace sgm {

enum class ModelKind { mnb, tdm };
enum class NodeKind { root_background, collection, label, document };

/// One component of the backoff tree. `alpha` is the weight routed to the
/// parent; `dist` is the unsmoothed distribution over its support.
struct BackoffNode {
    NodeId id = 0;
    NodeId parent = -1;
    double alpha = 1.0;
    SparseVector dist;
    NodeKind kind = NodeKind::root_background;
    std::int32_t label_index = -1;  // class index, -1 above the label level
    std::int64_t doc = -1;          // training document id for TDM leaves

    friend bool operator==(const BackoffNode&, const BackoffNode&) = default;
};

/// Label-conditional Poisson length model.
struct LengthModel {
    Vector mean_length;  // lambda per class index
    double scale = 0.0;  // varsigma

    double log_factor(std::size_t label_index, double length) const;
};

/// ς · ln Poisson(J; λ).
double log_poisson_factor(double lambda, double length, double scale);

/// A trained MNB or TDM. Nodes are stored parents-first with the root at
/// index 0; classes are indexed 0..K-1 and map to external ids via
/// `label_ids`.
struct GenerativeModel {
    ModelKind kind = ModelKind::mnb;
    std::size_t num_terms = 0;
    std::vector<BackoffNode> nodes;
    std::vector<LabelId> label_ids;
    std::vector<std::vector<NodeId>> leaves_by_label;
    Vector base_prior;  // relative frequencies before scaling
    Vector prior;
    double prior_scale = 1.0;
    std::optional<LengthModel> length;
    std::optional<PowersetCodec> codec;
    TermStats term_stats;
    WeightingConfig weighting;

    std::size_t num_labels() const { return label_ids.size(); }
    std::size_t depth() const;
    /// Class index for an external label id, -1 when unknown.
    std::int32_t label_index(LabelId label) const;
    /// External label set predicted for a class index.
    LabelSet decode(std::size_t label_index) const;
};

struct TdmSmoothing {
    SmoothingConfig document;
    SmoothingConfig label;
    SmoothingConfig collection;
};

/// Instrumentation for training cost checks.
struct TrainingCounters {
    std::size_t count_updates = 0;
};

GenerativeModel train_mnb(const Collection& collection, const SmoothingConfig& smoothing,
                          const WeightingConfig& weighting = {}, TrainingCounters* counters = nullptr);

GenerativeModel train_tdm(const Collection& collection, const TdmSmoothing& smoothing,
                          const WeightingConfig& weighting = {});

/// p(l) proportional to p'(l)^theta.
void apply_prior_scaling(GenerativeModel& model, double theta);

/// lambda_l = mean weighted L1 length of the documents of l.
void fit_length_model(GenerativeModel& model, const Collection& collection, double scale);

/// Checks the structural invariants; throws std::logic_error on violation.
void validate(const GenerativeModel& model);

/// Dense fully smoothed distribution of every node, parents first.
std::vector<Vector> smoothed_node_distributions(const GenerativeModel& model);

void save_model(std::ostream& out, const GenerativeModel& model);
GenerativeModel load_model(std::istream& in);
void save_model(const std::string& path, const GenerativeModel& model);
GenerativeModel load_model(const std::string& path);

std::string to_string(ModelKind k);
std::string to_string(NodeKind k);

}  // namespace sgm
