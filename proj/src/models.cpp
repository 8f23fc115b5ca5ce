#include "sgm/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sgm {

double log_poisson_factor(double lambda, double length, double scale) {
    if (scale == 0.0) return 0.0;
    if (lambda <= 0.0) return length == 0.0 ? 0.0 : kNegInf;
    return scale * (length * std::log(lambda) - lambda - std::lgamma(length + 1.0));
}

double LengthModel::log_factor(std::size_t label_index, double length) const {
    return log_poisson_factor(mean_length[static_cast<Eigen::Index>(label_index)], length, scale);
}

std::size_t GenerativeModel::depth() const {
    std::vector<std::size_t> level(nodes.size(), 1);
    std::size_t deepest = nodes.empty() ? 0 : 1;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        level[i] = level[nodes[i].parent] + 1;
        deepest = std::max(deepest, level[i]);
    }
    return deepest;
}

std::int32_t GenerativeModel::label_index(LabelId label) const {
    auto it = std::find(label_ids.begin(), label_ids.end(), label);
    return it == label_ids.end() ? -1 : static_cast<std::int32_t>(it - label_ids.begin());
}

LabelSet GenerativeModel::decode(std::size_t index) const {
    const LabelId id = label_ids.at(index);
    if (codec) return codec->decode(id);
    return LabelSet{id};
}

namespace {

std::vector<SparseVector> weighted_vectors(const Collection& collection, const TermStats& stats,
                                           const WeightingConfig& weighting) {
    std::vector<SparseVector> out;
    out.reserve(collection.num_docs());
    for (const Document& d : collection.docs())
        out.push_back(apply_weighting(d.vec, VectorRole::train_doc, stats, weighting));
    return out;
}

// Classes are the labels that occur in training, in ascending id order.
void assign_labels(GenerativeModel& model, const Collection& collection) {
    std::map<LabelId, double> incidences;
    for (std::size_t i = 0; i < collection.num_docs(); ++i) {
        const Document& d = collection.doc(i);
        if (d.labels.empty())
            throw std::invalid_argument("training document " + std::to_string(i) + " has no labels");
        for (LabelId l : d.labels) incidences[l] += 1.0;
    }
    double total = 0.0;
    for (const auto& [l, c] : incidences) total += c;
    model.label_ids.clear();
    model.base_prior.resize(static_cast<Eigen::Index>(incidences.size()));
    Eigen::Index k = 0;
    for (const auto& [l, c] : incidences) {
        model.label_ids.push_back(l);
        model.base_prior[k++] = c / total;
    }
    model.prior = model.base_prior;
    model.prior_scale = 1.0;
    model.leaves_by_label.assign(model.label_ids.size(), {});
}

NodeId add_node(GenerativeModel& model, BackoffNode node) {
    node.id = static_cast<NodeId>(model.nodes.size());
    model.nodes.push_back(std::move(node));
    return model.nodes.back().id;
}

SparseVector dense_to_sparse(const Vector& v) {
    std::vector<Entry> entries;
    for (Eigen::Index n = 0; n < v.size(); ++n)
        if (v[n] > 0.0) entries.push_back({static_cast<TermId>(n), v[n]});
    return SparseVector::from_sorted(std::move(entries));
}

SparseVector length_normalized(const SparseVector& v) {
    const double len = v.l1();
    std::vector<Entry> entries(v.begin(), v.end());
    for (Entry& e : entries) e.weight /= len;
    return SparseVector::from_sorted(std::move(entries));
}

void add_into(std::map<TermId, double>& acc, const SparseVector& v) {
    for (const Entry& e : v) acc[e.term] += e.weight;
}

SparseVector to_sparse(const std::map<TermId, double>& acc) {
    std::vector<Entry> entries;
    entries.reserve(acc.size());
    for (const auto& [t, c] : acc) entries.push_back({t, c});
    return SparseVector::from_sorted(std::move(entries));
}

SmoothingConfig resolved(const SmoothingConfig& cfg, std::size_t num_labels) {
    cfg.validate();
    SmoothingConfig out = cfg;
    out.mu = cfg.effective_mu(num_labels);
    out.mu_scale = MuScale::raw;
    return out;
}

}  // namespace

GenerativeModel train_mnb(const Collection& collection, const SmoothingConfig& smoothing,
                          const WeightingConfig& weighting, TrainingCounters* counters) {
    if (collection.num_docs() == 0) throw std::invalid_argument("cannot train on an empty collection");
    weighting.validate();

    GenerativeModel model;
    model.kind = ModelKind::mnb;
    model.num_terms = collection.num_terms();
    model.weighting = weighting;
    model.term_stats = TermStats::from(collection);
    assign_labels(model, collection);
    const SmoothingConfig cfg = resolved(smoothing, model.num_labels());

    const auto vectors = weighted_vectors(collection, model.term_stats, weighting);
    CountTable table;
    for (std::size_t i = 0; i < vectors.size(); ++i) table.add(vectors[i], collection.doc(i).labels);
    if (counters) counters->count_updates = table.updates();
    const auto label_counts = table.finalize();

    BackoffNode root;
    root.kind = NodeKind::root_background;
    root.dist = dense_to_sparse(background_model(label_counts, model.num_terms, cfg.background));
    add_node(model, std::move(root));

    for (std::size_t k = 0; k < model.num_labels(); ++k) {
        const SparseVector& counts = label_counts.at(model.label_ids[k]);
        BackoffNode leaf;
        leaf.parent = 0;
        leaf.kind = NodeKind::label;
        leaf.label_index = static_cast<std::int32_t>(k);
        leaf.alpha = smoothing_weight(counts, cfg.discount, cfg.mu);
        leaf.dist = unsmoothed_distribution(counts, cfg.discount);
        model.leaves_by_label[k].push_back(add_node(model, std::move(leaf)));
    }
    return model;
}

GenerativeModel train_tdm(const Collection& collection, const TdmSmoothing& smoothing,
                          const WeightingConfig& weighting) {
    if (collection.num_docs() == 0) throw std::invalid_argument("cannot train on an empty collection");
    weighting.validate();

    GenerativeModel model;
    model.kind = ModelKind::tdm;
    model.num_terms = collection.num_terms();
    model.weighting = weighting;
    model.term_stats = TermStats::from(collection);
    assign_labels(model, collection);
    const std::size_t k_labels = model.num_labels();
    const SmoothingConfig doc_cfg = resolved(smoothing.document, k_labels);
    const SmoothingConfig label_cfg = resolved(smoothing.label, k_labels);
    const SmoothingConfig coll_cfg = resolved(smoothing.collection, k_labels);
    if (model.num_terms == 0) throw std::invalid_argument("empty dictionary");

    const auto vectors = weighted_vectors(collection, model.term_stats, weighting);
    std::vector<SparseVector> normalized;
    normalized.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].empty() || !(vectors[i].l1() > 0.0))
            throw std::invalid_argument("TDM training document " + std::to_string(i) + " is empty");
        normalized.push_back(length_normalized(vectors[i]));
    }

    BackoffNode root;
    root.kind = NodeKind::root_background;
    const double u = 1.0 / static_cast<double>(model.num_terms);
    root.dist = dense_to_sparse(Vector::Constant(static_cast<Eigen::Index>(model.num_terms), u));
    add_node(model, std::move(root));

    std::map<TermId, double> coll_acc;
    std::vector<std::map<TermId, double>> label_acc(k_labels);
    std::vector<std::vector<std::size_t>> docs_of(k_labels);
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        add_into(coll_acc, normalized[i]);
        for (LabelId l : collection.doc(i).labels) {
            const auto k = static_cast<std::size_t>(model.label_index(l));
            add_into(label_acc[k], normalized[i]);
            docs_of[k].push_back(i);
        }
    }

    BackoffNode coll;
    coll.parent = 0;
    coll.kind = NodeKind::collection;
    const SparseVector coll_counts = to_sparse(coll_acc);
    coll.alpha = smoothing_weight(coll_counts, coll_cfg.discount, coll_cfg.mu);
    coll.dist = unsmoothed_distribution(coll_counts, coll_cfg.discount);
    const NodeId coll_id = add_node(model, std::move(coll));

    for (std::size_t k = 0; k < k_labels; ++k) {
        BackoffNode label;
        label.parent = coll_id;
        label.kind = NodeKind::label;
        label.label_index = static_cast<std::int32_t>(k);
        const SparseVector counts = to_sparse(label_acc[k]);
        label.alpha = smoothing_weight(counts, label_cfg.discount, label_cfg.mu);
        label.dist = unsmoothed_distribution(counts, label_cfg.discount);
        const NodeId label_id = add_node(model, std::move(label));

        for (std::size_t i : docs_of[k]) {
            BackoffNode leaf;
            leaf.parent = label_id;
            leaf.kind = NodeKind::document;
            leaf.label_index = static_cast<std::int32_t>(k);
            leaf.doc = static_cast<std::int64_t>(i);
            leaf.alpha = smoothing_weight(vectors[i], doc_cfg.discount, doc_cfg.mu);
            leaf.dist = unsmoothed_distribution(vectors[i], doc_cfg.discount);
            model.leaves_by_label[k].push_back(add_node(model, std::move(leaf)));
        }
    }
    return model;
}

void apply_prior_scaling(GenerativeModel& model, double theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("prior scale must be >= 0");
    if (theta < 1.0 && (model.base_prior.array() <= 0.0).any())
        throw std::invalid_argument("zero prior cannot be scaled with theta < 1");
    Vector logp = theta * model.base_prior.array().log();
    if (theta == 0.0) logp.setZero();
    model.prior = (logp.array() - log_sum_exp(logp)).exp();
    model.prior_scale = theta;
}

void fit_length_model(GenerativeModel& model, const Collection& collection, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("length scale must be >= 0");
    Vector total = Vector::Zero(static_cast<Eigen::Index>(model.num_labels()));
    Vector count = Vector::Zero(total.size());
    for (const Document& d : collection.docs()) {
        const double len = apply_weighting(d.vec, VectorRole::train_doc, model.term_stats, model.weighting).l1();
        for (LabelId l : d.labels) {
            const std::int32_t k = model.label_index(l);
            if (k < 0) continue;
            total[k] += len;
            count[k] += 1.0;
        }
    }
    LengthModel lm;
    lm.scale = scale;
    lm.mean_length = Vector::Zero(total.size());
    for (Eigen::Index k = 0; k < total.size(); ++k)
        if (count[k] > 0.0) lm.mean_length[k] = total[k] / count[k];
    model.length = std::move(lm);
}

void validate(const GenerativeModel& model) {
    auto fail = [](const std::string& msg) { throw std::logic_error("invalid model: " + msg); };
    if (model.nodes.empty()) fail("no nodes");
    if (model.nodes[0].parent != -1) fail("node 0 is not a root");
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const BackoffNode& n = model.nodes[i];
        if (n.id != static_cast<NodeId>(i)) fail("node ids out of order");
        if (i > 0 && (n.parent < 0 || n.parent >= n.id)) fail("parent must precede child");
        if (!(n.alpha >= 0.0 && n.alpha <= 1.0)) fail("alpha outside [0,1]");
        const double s = n.dist.l1();
        if (n.dist.empty()) {
            if (i == 0 || n.alpha != 1.0) fail("empty distribution without full backoff");
        } else if (std::abs(s - 1.0) > 1e-9) {
            fail("node " + std::to_string(i) + " distribution sums to " + std::to_string(s));
        }
    }
    if (model.prior.size() != static_cast<Eigen::Index>(model.num_labels())) fail("prior size");
    if (model.num_labels() > 0 && std::abs(model.prior.sum() - 1.0) > 1e-12) fail("prior does not sum to 1");
    if (model.leaves_by_label.size() != model.num_labels()) fail("leaf table size");
    for (const auto& leaves : model.leaves_by_label)
        if (leaves.empty()) fail("label without leaves");
}

std::vector<Vector> smoothed_node_distributions(const GenerativeModel& model) {
    std::vector<Vector> out;
    out.reserve(model.nodes.size());
    const auto n = static_cast<Eigen::Index>(model.num_terms);
    for (const BackoffNode& node : model.nodes) {
        if (node.parent < 0) {
            Vector root = Vector::Zero(n);
            for (const Entry& e : node.dist) root[e.term] = e.weight;
            out.push_back(std::move(root));
        } else {
            out.push_back(interpolate(node.dist, node.alpha, out[node.parent]));
        }
    }
    return out;
}

// ---------------------------------------------------------------- serialization

std::string to_string(ModelKind k) { return k == ModelKind::mnb ? "mnb" : "tdm"; }

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::root_background: return "root";
        case NodeKind::collection: return "collection";
        case NodeKind::label: return "label";
        case NodeKind::document: return "document";
    }
    return "?";
}

namespace {

constexpr const char* kModelMagic = "sgm-model";
constexpr int kModelVersion = 1;

void write_sparse(std::ostream& out, const SparseVector& v) {
    out << v.l0();
    for (const Entry& e : v) out << ' ' << e.term << ':' << format_double(e.weight);
}

class TokenReader {
  public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string s;
        if (!(in_ >> s)) throw std::runtime_error("model file truncated");
        return s;
    }
    void expect(const std::string& w) {
        const std::string got = word();
        if (got != w) throw std::runtime_error("model file: expected '" + w + "', got '" + got + "'");
    }
    double real() { return to_double(word()); }
    long long integer() {
        const std::string s = word();
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("model file: bad integer " + s);
        return v;
    }
    SparseVector sparse() {
        const long long nnz = integer();
        std::vector<Entry> entries;
        entries.reserve(static_cast<std::size_t>(nnz));
        for (long long k = 0; k < nnz; ++k) {
            const std::string tok = word();
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw std::runtime_error("model file: bad entry " + tok);
            TermId t = 0;
            std::from_chars(tok.data(), tok.data() + colon, t);
            entries.push_back({t, to_double(tok.substr(colon + 1))});
        }
        return SparseVector::from_sorted(std::move(entries));
    }

    static double to_double(const std::string& s) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw std::runtime_error("model file: bad number " + s);
        return v;
    }

  private:
    std::istream& in_;
};

NodeKind parse_node_kind(const std::string& s) {
    if (s == "root") return NodeKind::root_background;
    if (s == "collection") return NodeKind::collection;
    if (s == "label") return NodeKind::label;
    if (s == "document") return NodeKind::document;
    throw std::runtime_error("model file: unknown node kind " + s);
}

}  // namespace

void save_model(std::ostream& out, const GenerativeModel& model) {
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "kind " << to_string(model.kind) << '\n';
    out << "num_terms " << model.num_terms << '\n';
    out << "labels " << model.num_labels() << '\n';
    for (std::size_t k = 0; k < model.num_labels(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out << "label " << k << ' ' << model.label_ids[k] << ' ' << format_double(model.base_prior[i]) << ' '
            << format_double(model.prior[i]) << '\n';
    }
    out << "prior_scale " << format_double(model.prior_scale) << '\n';
    if (model.length) {
        out << "length " << format_double(model.length->scale);
        for (Eigen::Index k = 0; k < model.length->mean_length.size(); ++k)
            out << ' ' << format_double(model.length->mean_length[k]);
        out << '\n';
    } else {
        out << "length none\n";
    }
    if (model.codec) {
        out << "codec " << model.codec->size() << '\n';
        for (std::size_t c = 0; c < model.codec->size(); ++c)
            out << "class " << c << ' ' << format_label_set(model.codec->decode(static_cast<LabelId>(c))) << '\n';
    } else {
        out << "codec none\n";
    }
    out << "weighting " << format_double(model.weighting.phi) << ' ' << format_double(model.weighting.upsilon) << ' '
        << to_string(model.weighting.mode) << ' ' << to_string(model.weighting.idf_variant) << '\n';
    std::vector<Entry> df;
    for (std::size_t t = 0; t < model.term_stats.df.size(); ++t)
        if (model.term_stats.df[t] > 0.0) df.push_back({static_cast<TermId>(t), model.term_stats.df[t]});
    out << "term_stats " << format_double(model.term_stats.num_docs) << ' ' << model.term_stats.df.size() << ' ';
    write_sparse(out, SparseVector::from_sorted(std::move(df)));
    out << '\n';
    out << "nodes " << model.nodes.size() << '\n';
    for (const BackoffNode& n : model.nodes) {
        out << "node " << n.id << ' ' << n.parent << ' ' << to_string(n.kind) << ' ' << n.label_index << ' ' << n.doc
            << ' ' << format_double(n.alpha) << ' ';
        write_sparse(out, n.dist);
        out << '\n';
    }
}

GenerativeModel load_model(std::istream& in) {
    TokenReader r(in);
    r.expect(kModelMagic);
    if (r.integer() != kModelVersion) throw std::runtime_error("unsupported model version");
    GenerativeModel model;
    r.expect("kind");
    const std::string kind = r.word();
    if (kind == "mnb") model.kind = ModelKind::mnb;
    else if (kind == "tdm") model.kind = ModelKind::tdm;
    else throw std::runtime_error("model file: unknown kind " + kind);
    r.expect("num_terms");
    model.num_terms = static_cast<std::size_t>(r.integer());
    r.expect("labels");
    const auto k_labels = static_cast<std::size_t>(r.integer());
    model.label_ids.resize(k_labels);
    model.base_prior.resize(static_cast<Eigen::Index>(k_labels));
    model.prior.resize(static_cast<Eigen::Index>(k_labels));
    for (std::size_t k = 0; k < k_labels; ++k) {
        r.expect("label");
        r.integer();
        model.label_ids[k] = static_cast<LabelId>(r.integer());
        model.base_prior[static_cast<Eigen::Index>(k)] = r.real();
        model.prior[static_cast<Eigen::Index>(k)] = r.real();
    }
    r.expect("prior_scale");
    model.prior_scale = r.real();
    r.expect("length");
    const std::string len = r.word();
    if (len != "none") {
        LengthModel lm;
        lm.scale = TokenReader::to_double(len);
        lm.mean_length.resize(static_cast<Eigen::Index>(k_labels));
        for (std::size_t k = 0; k < k_labels; ++k) lm.mean_length[static_cast<Eigen::Index>(k)] = r.real();
        model.length = std::move(lm);
    }
    r.expect("codec");
    const std::string codec = r.word();
    if (codec != "none") {
        PowersetCodec c;
        const auto size = std::stoll(codec);
        for (long long i = 0; i < size; ++i) {
            r.expect("class");
            r.integer();
            const std::string labels = r.word();
            std::vector<LabelId> ids;
            std::stringstream ss(labels);
            for (std::string part; std::getline(ss, part, ',');) ids.push_back(std::stoi(part));
            c.insert(make_label_set(std::move(ids)));
        }
        model.codec = std::move(c);
    }
    r.expect("weighting");
    model.weighting.phi = r.real();
    model.weighting.upsilon = r.real();
    model.weighting.mode = parse_weighting_mode(r.word());
    model.weighting.idf_variant = parse_idf_variant(r.word());
    r.expect("term_stats");
    model.term_stats.num_docs = r.real();
    model.term_stats.df.assign(static_cast<std::size_t>(r.integer()), 0.0);
    for (const Entry& e : r.sparse()) model.term_stats.df.at(static_cast<std::size_t>(e.term)) = e.weight;
    r.expect("nodes");
    const auto n_nodes = static_cast<std::size_t>(r.integer());
    model.leaves_by_label.assign(k_labels, {});
    std::vector<bool> has_child(n_nodes, false);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        r.expect("node");
        BackoffNode n;
        n.id = static_cast<NodeId>(r.integer());
        n.parent = static_cast<NodeId>(r.integer());
        n.kind = parse_node_kind(r.word());
        n.label_index = static_cast<std::int32_t>(r.integer());
        n.doc = r.integer();
        n.alpha = r.real();
        n.dist = r.sparse();
        if (n.parent >= 0) has_child.at(static_cast<std::size_t>(n.parent)) = true;
        model.nodes.push_back(std::move(n));
    }
    for (std::size_t i = 1; i < n_nodes; ++i)
        if (!has_child[i] && model.nodes[i].label_index >= 0)
            model.leaves_by_label.at(static_cast<std::size_t>(model.nodes[i].label_index)).push_back(model.nodes[i].id);
    validate(model);
    return model;
}

void save_model(const std::string& path, const GenerativeModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_model(out, model);
}

GenerativeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_model(in);
}

}  // namespace sgm
