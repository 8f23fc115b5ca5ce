#include "sgm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace sgm {

QueryTerms prepare_query(const InvertedIndex& index, const SparseVector& v) {
    QueryTerms q;
    q.terms.reserve(v.l0());
    for (const Entry& e : v) {
        const double root = index.root_logprob(e.term);
        if (root == kNegInf) continue;
        q.terms.push_back(e);
        q.length += e.weight;
        q.shared += e.weight * root;
    }
    return q;
}

void accumulate_postings(const InvertedIndex& index, const QueryTerms& q, std::span<double> node_scores,
                         InferenceCounters* counters) {
    std::size_t visited = 0;
    for (const Entry& e : q.terms) {
        const auto list = index.postings(e.term);
        for (const Posting& p : list) node_scores[static_cast<std::size_t>(p.node)] += e.weight * p.delta;
        visited += list.size();
    }
    if (counters) counters->postings_visited += visited;
}

Posterior normalize(Vector log_joint) {
    Posterior out;
    out.log_marginal = log_sum_exp(log_joint);
    out.log_posterior = log_joint.array() - out.log_marginal;
    out.log_joint = std::move(log_joint);
    return out;
}

namespace {

double length_term(const InvertedIndex& index, std::size_t label, double length) {
    const auto& lm = index.length_model();
    return lm ? lm->log_factor(label, length) : 0.0;
}

void require_flat(const InvertedIndex& index) {
    if (index.depth() != 2) throw std::invalid_argument("sparse posterior needs a depth-2 model");
}

// Sparse per-node sums of w_n * delta over matched postings.
std::unordered_map<NodeId, double> matched_scores(const InvertedIndex& index, const QueryTerms& q,
                                                  InferenceCounters* counters) {
    std::unordered_map<NodeId, double> scores;
    std::size_t visited = 0;
    for (const Entry& e : q.terms) {
        const auto list = index.postings(e.term);
        for (const Posting& p : list) scores[p.node] += e.weight * p.delta;
        visited += list.size();
    }
    if (counters) {
        counters->postings_visited += visited;
        counters->node_evaluations += scores.size();
    }
    return scores;
}

// Matched-delta total along the path from `node` up to the root.
double path_score(const InvertedIndex& index, const std::unordered_map<NodeId, double>& scores, NodeId node) {
    double s = 0.0;
    for (NodeId n = node; n > 0; n = index.parent(n)) {
        const auto it = scores.find(n);
        if (it != scores.end()) s += it->second;
    }
    return s;
}

}  // namespace

Posterior sparse_posterior(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters) {
    require_flat(index);
    const QueryTerms q = prepare_query(index, v);
    const double full_length = v.l1();
    const std::size_t n_labels = index.num_labels();

    Vector joint(static_cast<Eigen::Index>(n_labels));
    for (std::size_t k = 0; k < n_labels; ++k) {
        const NodeId leaf = index.label_node(k);
        joint[static_cast<Eigen::Index>(k)] = index.label_log_prior(k) + q.length * index.log_alpha(leaf) + q.shared +
                                              length_term(index, k, full_length);
    }
    std::size_t visited = 0;
    for (const Entry& e : q.terms) {
        const auto list = index.postings(e.term);
        for (const Posting& p : list) joint[index.node_label(p.node)] += e.weight * p.delta;
        visited += list.size();
    }
    if (counters) {
        counters->postings_visited += visited;
        counters->labels_scored += n_labels;
    }
    return normalize(std::move(joint));
}

Vector hierarchical_joint(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters) {
    const QueryTerms q = prepare_query(index, v);
    const double full_length = v.l1();
    const auto scores = matched_scores(index, q, counters);

    const auto& leaves = index.leaves();
    Vector out(static_cast<Eigen::Index>(leaves.size()));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const NodeId leaf = leaves[i];
        const auto label = static_cast<std::size_t>(index.node_label(leaf));
        out[static_cast<Eigen::Index>(i)] = index.label_log_prior(label) + q.shared +
                                            q.length * index.path_log_alpha(leaf) + path_score(index, scores, leaf) +
                                            length_term(index, label, full_length);
    }
    if (counters) counters->node_evaluations += leaves.size();
    return out;
}

Vector label_log_joints(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters) {
    const std::size_t n_labels = index.num_labels();
    if (index.depth() <= 2) {
        Posterior p = sparse_posterior(index, v, counters);
        return std::move(p.log_joint);
    }
    const QueryTerms q = prepare_query(index, v);
    const double full_length = v.l1();
    const auto scores = matched_scores(index, q, counters);
    Vector joint(static_cast<Eigen::Index>(n_labels));

    if (!index.grouped_labels()) {
        for (std::size_t k = 0; k < n_labels; ++k) {
            const auto leaves = index.leaves_of(k);
            Vector ll(static_cast<Eigen::Index>(leaves.size()));
            for (std::size_t i = 0; i < leaves.size(); ++i)
                ll[static_cast<Eigen::Index>(i)] =
                    q.length * index.path_log_alpha(leaves[i]) + path_score(index, scores, leaves[i]);
            joint[static_cast<Eigen::Index>(k)] = index.label_log_prior(k) + q.shared + log_sum_exp(ll) -
                                                  std::log(static_cast<double>(leaves.size())) +
                                                  length_term(index, k, full_length);
        }
        if (counters) {
            counters->node_evaluations += index.leaves().size();
            counters->labels_scored += n_labels;
        }
        return joint;
    }

    // Matched leaves per label.
    std::unordered_map<std::size_t, std::vector<NodeId>> matched;
    for (const auto& [node, s] : scores)
        if (index.is_leaf(node)) matched[static_cast<std::size_t>(index.node_label(node))].push_back(node);

    std::vector<double> terms;
    std::vector<std::int32_t> unmatched;
    std::size_t evaluations = 0;
    for (std::size_t k = 0; k < n_labels; ++k) {
        const NodeId top = index.label_node(k);
        const double above = path_score(index, scores, top);
        const double top_alpha = index.path_log_alpha(top);
        const auto groups = index.alpha_groups(k);
        unmatched.assign(groups.size(), 0);
        for (std::size_t g = 0; g < groups.size(); ++g) unmatched[g] = groups[g].size;

        terms.clear();
        if (const auto it = matched.find(k); it != matched.end()) {
            for (NodeId leaf : it->second) {
                unmatched[static_cast<std::size_t>(index.leaf_group(leaf))] -= 1;
                terms.push_back(q.length * (top_alpha + index.log_alpha(leaf)) + above + scores.at(leaf));
            }
            evaluations += it->second.size();
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (unmatched[g] == 0) continue;
            terms.push_back(std::log(static_cast<double>(unmatched[g])) + q.length * (top_alpha + groups[g].log_alpha) +
                            above);
            ++evaluations;
        }
        const auto n_leaves = static_cast<double>(index.leaves_of(k).size());
        joint[static_cast<Eigen::Index>(k)] =
            index.label_log_prior(k) + q.shared +
            log_sum_exp(Eigen::Map<const Vector>(terms.data(), static_cast<Eigen::Index>(terms.size()))) -
            std::log(n_leaves) + length_term(index, k, full_length);
    }
    if (counters) {
        counters->node_evaluations += evaluations;
        counters->labels_scored += n_labels;
    }
    return joint;
}

Posterior posterior(const InvertedIndex& index, const SparseVector& v, InferenceCounters* counters) {
    return normalize(label_log_joints(index, v, counters));
}

double sparse_marginal(const InvertedIndex& index, const SparseVector& v, MarginalMode mode,
                       InferenceCounters* counters) {
    if (mode == MarginalMode::exact || index.depth() != 2 || index.length_model())
        return log_sum_exp(label_log_joints(index, v, counters));

    const QueryTerms q = prepare_query(index, v);
    std::unordered_map<std::size_t, double> matched;
    std::size_t visited = 0;
    for (const Entry& e : q.terms) {
        const auto list = index.postings(e.term);
        for (const Posting& p : list) matched[static_cast<std::size_t>(index.node_label(p.node))] += e.weight * p.delta;
        visited += list.size();
    }
    std::vector<double> terms;
    terms.reserve(matched.size() + 1);
    double matched_prior = 0.0;
    for (const auto& [k, s] : matched) {
        matched_prior += std::exp(index.label_log_prior(k));
        terms.push_back(index.label_log_prior(k) + q.shared + q.length * index.log_alpha(index.label_node(k)) + s);
    }
    const double rest = std::max(0.0, 1.0 - matched_prior);
    if (rest > 0.0) terms.push_back(std::log(rest) + q.shared + q.length * index.default_child_log_alpha(0));
    if (counters) {
        counters->postings_visited += visited;
        counters->labels_scored += matched.size();
    }
    return log_sum_exp(Eigen::Map<const Vector>(terms.data(), static_cast<Eigen::Index>(terms.size())));
}

std::size_t classify_index(const InvertedIndex& index, const SparseVector& v) {
    if (index.num_labels() == 0) throw std::invalid_argument("index has no labels");
    const Vector joint = label_log_joints(index, v);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < joint.size(); ++k)
        if (joint[k] > joint[best]) best = k;
    return static_cast<std::size_t>(best);
}

LabelSet classify(const InvertedIndex& index, const SparseVector& v) {
    return index.decode(classify_index(index, v));
}

std::vector<Ranked> top_k(const Vector& scores, const std::vector<LabelId>& ids, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::vector<Ranked> all(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) all[i] = {ids[i], scores[static_cast<Eigen::Index>(i)]};
    const auto better = [](const Ranked& a, const Ranked& b) {
        return a.score != b.score ? a.score > b.score : a.label < b.label;
    };
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    return all;
}

std::vector<Ranked> rank(const InvertedIndex& index, const SparseVector& v, std::size_t k) {
    return top_k(label_log_joints(index, v), index.label_ids(), k);
}

Posterior dense_oracle(const GenerativeModel& model, const SparseVector& v) {
    const std::vector<Vector> dists = smoothed_node_distributions(model);
    const Vector& root = dists.front();
    std::vector<Entry> q;
    for (const Entry& e : v)
        if (e.term < root.size() && root[e.term] > 0.0) q.push_back(e);

    const std::size_t n_labels = model.num_labels();
    Vector joint(static_cast<Eigen::Index>(n_labels));
    for (std::size_t k = 0; k < n_labels; ++k) {
        const auto& leaves = model.leaves_by_label[k];
        Vector ll(static_cast<Eigen::Index>(leaves.size()));
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const Vector& p = dists[static_cast<std::size_t>(leaves[i])];
            double s = 0.0;
            for (const Entry& e : q) s += e.weight * std::log(p[e.term]);
            ll[static_cast<Eigen::Index>(i)] = s;
        }
        double j = std::log(model.prior[static_cast<Eigen::Index>(k)]) + log_sum_exp(ll) -
                   std::log(static_cast<double>(leaves.size()));
        if (model.length) j += model.length->log_factor(k, v.l1());
        joint[static_cast<Eigen::Index>(k)] = j;
    }
    return normalize(std::move(joint));
}

}  // namespace sgm
