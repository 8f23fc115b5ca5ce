#include "sgm/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

namespace sgm {

// ---------------------------------------------------------------- SparseVector

SparseVector SparseVector::from_sorted(std::vector<Entry> entries) {
    SparseVector v;
    v.entries_.reserve(entries.size());
    TermId prev = -1;
    for (const Entry& e : entries) {
        if (e.term < 0) throw std::invalid_argument("negative term id");
        if (e.term <= prev) throw std::invalid_argument("term ids must be strictly increasing");
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw std::invalid_argument("weights must be finite and non-negative");
        prev = e.term;
        if (e.weight != 0.0) v.entries_.push_back(e);
    }
    return v;
}

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.term < b.term; });
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (const Entry& e : entries) {
        if (!merged.empty() && merged.back().term == e.term)
            merged.back().weight += e.weight;
        else
            merged.push_back(e);
    }
    return from_sorted(std::move(merged));
}

double SparseVector::l1() const {
    double s = 0.0;
    for (const Entry& e : entries_) s += e.weight;
    return s;
}

double SparseVector::weight(TermId term) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                               [](const Entry& e, TermId t) { return e.term < t; });
    return (it != entries_.end() && it->term == term) ? it->weight : 0.0;
}

LabelSet make_label_set(std::vector<LabelId> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

CorpusError::CorpusError(const std::string& what, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

// ------------------------------------------------------------------ CountTable

void CountTable::add(const SparseVector& v, const LabelSet& labels) {
    for (LabelId l : labels) {
        auto& row = counts_[l];
        for (const Entry& e : v) {
            row[e.term] += e.weight;
            ++updates_;
        }
    }
}

void CountTable::merge(const CountTable& other) {
    for (const auto& [l, row] : other.counts_) {
        auto& mine = counts_[l];
        for (const auto& [t, c] : row) mine[t] += c;
    }
    updates_ += other.updates_;
}

std::map<LabelId, SparseVector> CountTable::finalize() const {
    std::map<LabelId, SparseVector> out;
    for (const auto& [l, row] : counts_) {
        std::vector<Entry> entries;
        entries.reserve(row.size());
        for (const auto& [t, c] : row) entries.push_back({t, c});
        out.emplace(l, SparseVector::from_unsorted(std::move(entries)));
    }
    return out;
}

// ------------------------------------------------------------------ Collection

Collection::Collection(std::vector<Document> docs, std::optional<std::size_t> dict_size)
    : docs_(std::move(docs)) {
    TermId max_term = -1;
    LabelId max_label = -1;
    for (const Document& d : docs_) {
        max_term = std::max(max_term, d.vec.max_term());
        if (!d.labels.empty()) max_label = std::max(max_label, d.labels.back());
    }
    num_terms_ = dict_size ? *dict_size : static_cast<std::size_t>(max_term + 1);
    num_labels_ = static_cast<std::size_t>(max_label + 1);

    // With an explicit dictionary size, out-of-dictionary terms are dropped.
    if (dict_size && max_term >= static_cast<TermId>(num_terms_)) {
        for (Document& d : docs_) {
            std::vector<Entry> kept;
            for (const Entry& e : d.vec)
                if (e.term < static_cast<TermId>(num_terms_)) kept.push_back(e);
            d.vec = SparseVector::from_sorted(std::move(kept));
        }
    }

    df_.assign(num_terms_, 0.0);
    CountTable table;
    for (const Document& d : docs_) {
        for (const Entry& e : d.vec) df_[e.term] += 1.0;
        table.add(d.vec, d.labels);
    }
    joint_ = table.finalize();
}

double Collection::doc_freq(TermId term) const {
    if (term < 0 || static_cast<std::size_t>(term) >= df_.size()) return 0.0;
    return df_[term];
}

double Collection::joint_count(LabelId label, TermId term) const {
    auto it = joint_.find(label);
    return it == joint_.end() ? 0.0 : it->second.weight(term);
}

// --------------------------------------------------------------------- parsing

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if constexpr (std::is_floating_point_v<T>) {
        if (s.front() == '+') s.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

LabelSet parse_labels(std::string_view field, std::size_t line_no) {
    std::vector<LabelId> labels;
    std::size_t start = 0;
    while (start <= field.size()) {
        std::size_t comma = field.find(',', start);
        if (comma == std::string_view::npos) comma = field.size();
        LabelId l = 0;
        if (!parse_number(field.substr(start, comma - start), l) || l < 0)
            throw ParseError("bad label '" + std::string(field.substr(start, comma - start)) + "'",
                             line_no);
        labels.push_back(l);
        start = comma + 1;
    }
    return make_label_set(std::move(labels));
}

Document parse_line(std::string_view line, bool expect_labels, std::size_t line_no) {
    Document doc;
    auto tokens = split_ws(line);
    std::size_t first = 0;
    if (!tokens.empty() && tokens[0].find(':') == std::string_view::npos) {
        doc.labels = parse_labels(tokens[0], line_no);
        first = 1;
    }
    if (expect_labels && doc.labels.empty()) throw ParseError("missing label field", line_no);

    std::vector<Entry> entries;
    entries.reserve(tokens.size() - first);
    TermId prev = -1;
    for (std::size_t k = first; k < tokens.size(); ++k) {
        std::string_view tok = tokens[k];
        std::size_t colon = tok.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("expected <term>:<weight>, got '" + std::string(tok) + "'", line_no);
        TermId term = 0;
        double w = 0.0;
        if (!parse_number(tok.substr(0, colon), term) || term < 0)
            throw ParseError("bad term id in '" + std::string(tok) + "'", line_no);
        if (!parse_number(tok.substr(colon + 1), w) || !std::isfinite(w))
            throw ParseError("bad weight in '" + std::string(tok) + "'", line_no);
        if (term <= prev)
            throw FormatError("term ids must be strictly increasing (" + std::to_string(term) +
                                  " after " + std::to_string(prev) + ")",
                              line_no);
        if (w < 0.0) throw FormatError("negative weight for term " + std::to_string(term), line_no);
        prev = term;
        if (w > 0.0) entries.push_back({term, w});
    }
    doc.vec = SparseVector::from_sorted(std::move(entries));
    return doc;
}

}  // namespace

Collection parse_collection(std::istream& in, bool expect_labels, std::optional<std::size_t> dict_size) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') continue;
        docs.push_back(parse_line(line, expect_labels, line_no));
    }
    return Collection(std::move(docs), dict_size);
}

Collection read_collection(const std::string& path, bool expect_labels, std::optional<std::size_t> dict_size) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_collection(in, expect_labels, dict_size);
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_label_set(const LabelSet& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(labels[i]);
    }
    return out;
}

void write_document(std::ostream& out, const Document& doc) {
    out << format_label_set(doc.labels);
    for (const Entry& e : doc.vec) out << ' ' << e.term << ':' << format_double(e.weight);
    out << '\n';
}

void write_collection(std::ostream& out, const Collection& collection) {
    for (const Document& d : collection.docs()) write_document(out, d);
}

// -------------------------------------------------------------------- powerset

LabelId PowersetCodec::insert(const LabelSet& labels) {
    auto [it, inserted] = forward_.try_emplace(labels, static_cast<LabelId>(backward_.size()));
    if (inserted) backward_.push_back(labels);
    return it->second;
}

std::optional<LabelId> PowersetCodec::encode(const LabelSet& labels) const {
    auto it = forward_.find(labels);
    if (it == forward_.end()) return std::nullopt;
    return it->second;
}

const LabelSet& PowersetCodec::decode(LabelId cls) const {
    if (cls < 0 || static_cast<std::size_t>(cls) >= backward_.size())
        throw std::out_of_range("unknown powerset class " + std::to_string(cls));
    return backward_[cls];
}

std::pair<Collection, PowersetCodec> powerset_encode(const Collection& collection) {
    PowersetCodec codec;
    std::vector<Document> docs;
    docs.reserve(collection.num_docs());
    for (const Document& d : collection.docs()) {
        if (d.labels.empty()) throw std::invalid_argument("powerset encoding needs labeled documents");
        docs.push_back({d.vec, LabelSet{codec.insert(d.labels)}});
    }
    return {Collection(std::move(docs), collection.num_terms()), std::move(codec)};
}

// ------------------------------------------------------------ expected counts

void WeightedSequence::validate() const {
    if (words.size() != weights.size()) throw std::invalid_argument("words and weights differ in length");
    for (double r : weights)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("occurrence weights must lie in [0,1]");
    for (TermId w : words)
        if (w < 0) throw std::invalid_argument("negative term id");
}

SparseVector expected_counts(const WeightedSequence& seq) {
    seq.validate();
    std::vector<Entry> entries;
    entries.reserve(seq.words.size());
    for (std::size_t j = 0; j < seq.words.size(); ++j) entries.push_back({seq.words[j], seq.weights[j]});
    return SparseVector::from_unsorted(std::move(entries));
}

Vector poisson_binomial_pmf(std::span<const double> weights) {
    Vector pmf = Vector::Zero(static_cast<Eigen::Index>(weights.size()) + 1);
    pmf[0] = 1.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double r = weights[j];
        for (Eigen::Index c = static_cast<Eigen::Index>(j) + 1; c > 0; --c)
            pmf[c] = r * pmf[c - 1] + (1.0 - r) * pmf[c];
        pmf[0] *= 1.0 - r;
    }
    return pmf;
}

double count_probability(const WeightedSequence& seq, TermId term, int count) {
    seq.validate();
    if (count < 0) throw std::invalid_argument("count must be non-negative");
    std::vector<double> occ;
    for (std::size_t j = 0; j < seq.words.size(); ++j)
        if (seq.words[j] == term) occ.push_back(seq.weights[j]);
    if (static_cast<std::size_t>(count) > occ.size()) return 0.0;
    return poisson_binomial_pmf(occ)[count];
}

double expected_count_frequencies(std::span<const WeightedSequence> sequences, int count) {
    if (count < 1) throw std::invalid_argument("count-frequency order must be >= 1");
    // A term's collection count is Poisson-binomial over all its occurrences.
    std::map<TermId, std::vector<double>> by_term;
    for (const WeightedSequence& seq : sequences) {
        seq.validate();
        for (std::size_t j = 0; j < seq.words.size(); ++j) by_term[seq.words[j]].push_back(seq.weights[j]);
    }
    double total = 0.0;
    for (const auto& [term, occ] : by_term) {
        if (static_cast<std::size_t>(count) > occ.size()) continue;
        total += poisson_binomial_pmf(occ)[count];
    }
    return total;
}

}  // namespace sgm
