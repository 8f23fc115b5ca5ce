#include "sgm/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sgm {

std::span<const Posting> InvertedIndex::postings(TermId term) const {
    if (term < 0 || static_cast<std::size_t>(term) + 1 >= posting_offsets_.size()) return {};
    const auto b = static_cast<std::size_t>(posting_offsets_[term]);
    const auto e = static_cast<std::size_t>(posting_offsets_[term + 1]);
    return {postings_.data() + b, e - b};
}

std::span<const NodeId> InvertedIndex::leaves_of(std::size_t label) const {
    const auto b = static_cast<std::size_t>(label_leaf_offsets_[label]);
    const auto e = static_cast<std::size_t>(label_leaf_offsets_[label + 1]);
    return {label_leaves_.data() + b, e - b};
}

std::span<const AlphaGroup> InvertedIndex::alpha_groups(std::size_t label) const {
    const auto b = static_cast<std::size_t>(group_offsets_[label]);
    const auto e = static_cast<std::size_t>(group_offsets_[label + 1]);
    return {groups_.data() + b, e - b};
}

LabelSet InvertedIndex::decode(std::size_t label) const {
    const LabelId id = label_ids_.at(label);
    if (codec_) return codec_->decode(id);
    return LabelSet{id};
}

namespace {

// p''_node(n) evaluated recursively up to the root.
double smoothed_prob(const GenerativeModel& model, NodeId node, TermId term, const Vector& root) {
    const BackoffNode& n = model.nodes[node];
    if (n.parent < 0) return root[term];
    return n.alpha * smoothed_prob(model, n.parent, term, root) + (1.0 - n.alpha) * n.dist.weight(term);
}

}  // namespace

InvertedIndex build_index(const GenerativeModel& model) {
    validate(model);
    InvertedIndex ix;
    ix.kind_ = model.kind;
    ix.depth_ = model.depth();
    const auto n_terms = static_cast<Eigen::Index>(model.num_terms);
    const std::size_t n_nodes = model.nodes.size();

    Vector root = Vector::Zero(n_terms);
    for (const Entry& e : model.nodes[0].dist) {
        if (e.term >= n_terms) throw std::invalid_argument("root distribution exceeds dictionary");
        root[e.term] = e.weight;
    }
    ix.root_logprob_ = root.array().log();

    ix.parent_.resize(n_nodes);
    ix.log_alpha_.assign(n_nodes, 0.0);
    ix.children_count_.assign(n_nodes, 0);
    ix.default_child_log_alpha_.assign(n_nodes, 0.0);
    ix.path_log_alpha_.assign(n_nodes, 0.0);
    ix.node_label_.assign(n_nodes, -1);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const BackoffNode& n = model.nodes[i];
        ix.parent_[i] = n.parent;
        ix.node_label_[i] = n.label_index;
        if (n.parent < 0) continue;
        if (!(n.alpha > 0.0))
            throw std::invalid_argument("backoff weight 0 at node " + std::to_string(i) +
                                        ": terms outside its support have no probability");
        ix.log_alpha_[i] = std::log(n.alpha);
        ix.path_log_alpha_[i] = ix.path_log_alpha_[n.parent] + ix.log_alpha_[i];
        ix.children_count_[n.parent] += 1;
        ix.default_child_log_alpha_[n.parent] += ix.log_alpha_[i];
    }
    for (std::size_t i = 0; i < n_nodes; ++i)
        if (ix.children_count_[i] > 0) ix.default_child_log_alpha_[i] /= ix.children_count_[i];

    // Postings: iterate nodes in id order so each list comes out sorted by node.
    std::vector<std::vector<Posting>> by_term(static_cast<std::size_t>(n_terms));
    for (std::size_t i = 1; i < n_nodes; ++i) {
        const BackoffNode& n = model.nodes[i];
        for (const Entry& e : n.dist) {
            if (e.term >= n_terms) throw std::invalid_argument("node distribution exceeds dictionary");
            const double backoff = n.alpha * smoothed_prob(model, n.parent, e.term, root);
            if (!(backoff > 0.0))
                throw std::invalid_argument("term " + std::to_string(e.term) + " at node " + std::to_string(i) +
                                            " has no background probability");
            const double delta = std::log1p((1.0 - n.alpha) * e.weight / backoff);
            by_term[static_cast<std::size_t>(e.term)].push_back({static_cast<NodeId>(i), delta});
        }
    }
    ix.posting_offsets_.assign(static_cast<std::size_t>(n_terms) + 1, 0);
    for (std::size_t t = 0; t < by_term.size(); ++t)
        ix.posting_offsets_[t + 1] = ix.posting_offsets_[t] + static_cast<std::int64_t>(by_term[t].size());
    ix.postings_.reserve(static_cast<std::size_t>(ix.posting_offsets_.back()));
    for (auto& list : by_term) ix.postings_.insert(ix.postings_.end(), list.begin(), list.end());

    // Labels, leaves and backoff-weight groups.
    const std::size_t n_labels = model.num_labels();
    ix.label_ids_ = model.label_ids;
    ix.label_log_prior_ = model.prior.array().log();
    ix.codec_ = model.codec;
    ix.length_ = model.length;
    ix.term_stats_ = model.term_stats;
    ix.weighting_ = model.weighting;
    ix.label_leaf_offsets_.assign(n_labels + 1, 0);
    ix.group_offsets_.assign(n_labels + 1, 0);
    ix.label_node_.assign(n_labels, -1);
    ix.leaf_group_.assign(n_nodes, -1);
    for (std::size_t k = 0; k < n_labels; ++k) {
        const auto& leaves = model.leaves_by_label[k];
        ix.label_leaves_.insert(ix.label_leaves_.end(), leaves.begin(), leaves.end());
        ix.label_leaf_offsets_[k + 1] = static_cast<std::int64_t>(ix.label_leaves_.size());

        const bool flat = ix.depth_ <= 2;
        const NodeId common = flat ? leaves.front() : model.nodes[leaves.front()].parent;
        for (NodeId leaf : leaves)
            if (!flat && model.nodes[leaf].parent != common) ix.grouped_labels_ = false;
        ix.label_node_[k] = common;

        const auto first_group = ix.groups_.size();
        for (NodeId leaf : leaves) {
            const double la = ix.log_alpha_[leaf];
            auto it = std::find_if(ix.groups_.begin() + static_cast<std::ptrdiff_t>(first_group), ix.groups_.end(),
                                   [la](const AlphaGroup& g) { return g.log_alpha == la; });
            if (it == ix.groups_.end()) {
                ix.groups_.push_back({la, 0});
                it = ix.groups_.end() - 1;
            }
            it->size += 1;
            ix.leaf_group_[leaf] = static_cast<std::int32_t>(it - ix.groups_.begin() - static_cast<std::ptrdiff_t>(first_group));
        }
        ix.group_offsets_[k + 1] = static_cast<std::int64_t>(ix.groups_.size());
    }
    for (std::size_t i = 0; i < n_nodes; ++i)
        if (i > 0 && ix.children_count_[i] == 0) ix.leaves_.push_back(static_cast<NodeId>(i));
    return ix;
}

IndexStats index_stats(const InvertedIndex& index) {
    IndexStats s;
    for (std::size_t t = 0; t < index.num_terms(); ++t)
        if (!index.postings(static_cast<TermId>(t)).empty()) ++s.num_terms;
    s.num_postings = index.num_postings();
    s.bytes_estimate = index.num_postings() * sizeof(Posting) + (index.num_terms() + 1) * sizeof(std::int64_t) +
                       index.num_terms() * sizeof(double) +
                       index.num_nodes() * (sizeof(NodeId) + 3 * sizeof(double) + 2 * sizeof(std::int32_t));
    return s;
}

SparseVector weight_query(const InvertedIndex& index, const SparseVector& v, VectorRole role) {
    return apply_weighting(v, role, index.term_stats(), index.weighting());
}

// ------------------------------------------------------------- serialization

namespace {

constexpr char kIndexMagic[8] = {'S', 'G', 'M', 'I', 'N', 'D', 'X', '\0'};
constexpr std::uint32_t kIndexVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

void put_eigen(std::ostream& out, const Vector& v) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    if (v.size()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("index file truncated");
    return v;
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    std::vector<T> v(n);
    if (n && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
        throw std::runtime_error("index file truncated");
    return v;
}

Vector get_eigen(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    Vector v(static_cast<Eigen::Index>(n));
    if (n && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw std::runtime_error("index file truncated");
    return v;
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw std::runtime_error("index file truncated");
    return s;
}

}  // namespace

void save_index(std::ostream& out, const InvertedIndex& ix) {
    out.write(kIndexMagic, sizeof kIndexMagic);
    put(out, kIndexVersion);
    put<std::uint8_t>(out, ix.kind_ == ModelKind::mnb ? 0 : 1);
    put<std::uint64_t>(out, ix.depth_);
    put_eigen(out, ix.root_logprob_);
    put_vec(out, ix.posting_offsets_);
    put_vec(out, ix.postings_);
    put_vec(out, ix.parent_);
    put_vec(out, ix.log_alpha_);
    put_vec(out, ix.children_count_);
    put_vec(out, ix.default_child_log_alpha_);
    put_vec(out, ix.path_log_alpha_);
    put_vec(out, ix.node_label_);
    put_vec(out, ix.leaves_);
    put_vec(out, ix.label_leaf_offsets_);
    put_vec(out, ix.label_leaves_);
    put_vec(out, ix.label_node_);
    put_vec(out, ix.group_offsets_);
    put_vec(out, ix.groups_);
    put_vec(out, ix.leaf_group_);
    put<std::uint8_t>(out, ix.grouped_labels_ ? 1 : 0);
    put_eigen(out, ix.label_log_prior_);
    put_vec(out, ix.label_ids_);

    put<std::uint64_t>(out, ix.codec_ ? ix.codec_->size() : 0);
    put<std::uint8_t>(out, ix.codec_ ? 1 : 0);
    if (ix.codec_)
        for (std::size_t c = 0; c < ix.codec_->size(); ++c) put_vec(out, ix.codec_->decode(static_cast<LabelId>(c)));

    put<std::uint8_t>(out, ix.length_ ? 1 : 0);
    if (ix.length_) {
        put(out, ix.length_->scale);
        put_eigen(out, ix.length_->mean_length);
    }
    put_vec(out, ix.term_stats_.df);
    put(out, ix.term_stats_.num_docs);
    put(out, ix.weighting_.phi);
    put(out, ix.weighting_.upsilon);
    put_string(out, to_string(ix.weighting_.mode));
    put_string(out, to_string(ix.weighting_.idf_variant));
}

InvertedIndex load_index(std::istream& in) {
    char magic[sizeof kIndexMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kIndexMagic, sizeof magic) != 0)
        throw std::runtime_error("not an index file");
    if (get<std::uint32_t>(in) != kIndexVersion) throw std::runtime_error("unsupported index version");
    InvertedIndex ix;
    ix.kind_ = get<std::uint8_t>(in) == 0 ? ModelKind::mnb : ModelKind::tdm;
    ix.depth_ = get<std::uint64_t>(in);
    ix.root_logprob_ = get_eigen(in);
    ix.posting_offsets_ = get_vec<std::int64_t>(in);
    ix.postings_ = get_vec<Posting>(in);
    ix.parent_ = get_vec<NodeId>(in);
    ix.log_alpha_ = get_vec<double>(in);
    ix.children_count_ = get_vec<std::int32_t>(in);
    ix.default_child_log_alpha_ = get_vec<double>(in);
    ix.path_log_alpha_ = get_vec<double>(in);
    ix.node_label_ = get_vec<std::int32_t>(in);
    ix.leaves_ = get_vec<NodeId>(in);
    ix.label_leaf_offsets_ = get_vec<std::int64_t>(in);
    ix.label_leaves_ = get_vec<NodeId>(in);
    ix.label_node_ = get_vec<NodeId>(in);
    ix.group_offsets_ = get_vec<std::int64_t>(in);
    ix.groups_ = get_vec<AlphaGroup>(in);
    ix.leaf_group_ = get_vec<std::int32_t>(in);
    ix.grouped_labels_ = get<std::uint8_t>(in) != 0;
    ix.label_log_prior_ = get_eigen(in);
    ix.label_ids_ = get_vec<LabelId>(in);

    const auto codec_size = get<std::uint64_t>(in);
    if (get<std::uint8_t>(in)) {
        PowersetCodec codec;
        for (std::uint64_t c = 0; c < codec_size; ++c) codec.insert(get_vec<LabelId>(in));
        ix.codec_ = std::move(codec);
    }
    if (get<std::uint8_t>(in)) {
        LengthModel lm;
        lm.scale = get<double>(in);
        lm.mean_length = get_eigen(in);
        ix.length_ = std::move(lm);
    }
    ix.term_stats_.df = get_vec<double>(in);
    ix.term_stats_.num_docs = get<double>(in);
    ix.weighting_.phi = get<double>(in);
    ix.weighting_.upsilon = get<double>(in);
    ix.weighting_.mode = parse_weighting_mode(get_string(in));
    ix.weighting_.idf_variant = parse_idf_variant(get_string(in));

    if (ix.posting_offsets_.size() != static_cast<std::size_t>(ix.root_logprob_.size()) + 1 ||
        static_cast<std::size_t>(ix.posting_offsets_.back()) != ix.postings_.size() ||
        ix.label_leaf_offsets_.size() != ix.label_ids_.size() + 1)
        throw std::runtime_error("index file is inconsistent");
    return ix;
}

void save_index(const std::string& path, const InvertedIndex& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_index(out, index);
}

InvertedIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_index(in);
}

void dump_index(std::ostream& out, const InvertedIndex& ix) {
    const IndexStats s = index_stats(ix);
    out << "# kind=" << to_string(ix.kind()) << " depth=" << ix.depth() << " terms=" << ix.num_terms()
        << " nodes=" << ix.num_nodes() << " labels=" << ix.num_labels() << " postings=" << s.num_postings << '\n';
    for (std::size_t k = 0; k < ix.num_labels(); ++k)
        out << "label " << k << " id=" << ix.label_ids()[k] << " logprior=" << format_double(ix.label_log_prior(k))
            << " leaves=" << ix.leaves_of(k).size() << '\n';
    for (std::size_t i = 1; i < ix.num_nodes(); ++i) {
        const auto n = static_cast<NodeId>(i);
        out << "node " << i << " parent=" << ix.parent(n) << " log_alpha=" << format_double(ix.log_alpha(n)) << '\n';
    }
    for (std::size_t t = 0; t < ix.num_terms(); ++t) {
        const auto term = static_cast<TermId>(t);
        out << "term " << t << " root=" << format_double(ix.root_logprob(term));
        for (const Posting& p : ix.postings(term)) out << " (" << p.node << ',' << format_double(p.delta) << ')';
        out << '\n';
    }
}

}  // namespace sgm
