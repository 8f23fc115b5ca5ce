#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgm/types.hpp"

namespace sgm {

struct Entry {
    TermId term;
    double weight;
    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse word vector: strictly increasing term ids, no stored zeros.
class SparseVector {
  public:
    SparseVector() = default;

    /// Validates ordering and non-negativity; zero weights are dropped.
    static SparseVector from_sorted(std::vector<Entry> entries);
    /// Accepts any order; duplicate terms are summed.
    static SparseVector from_unsorted(std::vector<Entry> entries);

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    const Entry& operator[](std::size_t i) const { return entries_[i]; }
    std::span<const Entry> entries() const { return entries_; }

    std::size_t l0() const { return entries_.size(); }
    double l1() const;
    bool empty() const { return entries_.empty(); }
    /// Weight of `term`, 0 when absent.
    double weight(TermId term) const;
    TermId max_term() const { return entries_.empty() ? -1 : entries_.back().term; }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

  private:
    std::vector<Entry> entries_;
};

/// Sorted, duplicate-free label ids.
using LabelSet = std::vector<LabelId>;

LabelSet make_label_set(std::vector<LabelId> labels);

struct Document {
    SparseVector vec;
    LabelSet labels;
};

/// Thrown for corpus input problems; carries the 1-based line number.
class CorpusError : public std::runtime_error {
  public:
    CorpusError(const std::string& what, std::size_t line);
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class ParseError : public CorpusError {
    using CorpusError::CorpusError;
};
class FormatError : public CorpusError {
    using CorpusError::CorpusError;
};

/// Accumulates C(l,n) by addition. Accumulators over disjoint document
/// shards can be merged.
class CountTable {
  public:
    void add(const SparseVector& v, const LabelSet& labels);
    void merge(const CountTable& other);

    /// Number of (label, term) count updates performed so far.
    std::size_t updates() const { return updates_; }
    /// Label -> sorted counts.
    std::map<LabelId, SparseVector> finalize() const;

  private:
    std::map<LabelId, std::unordered_map<TermId, double>> counts_;
    std::size_t updates_ = 0;
};

class Collection {
  public:
    Collection() = default;
    /// `dict_size` overrides N; terms with id >= N are dropped.
    explicit Collection(std::vector<Document> docs, std::optional<std::size_t> dict_size = std::nullopt);

    const std::vector<Document>& docs() const { return docs_; }
    const Document& doc(std::size_t i) const { return docs_[i]; }

    std::size_t num_terms() const { return num_terms_; }
    /// 1 + max label id, 0 if unlabeled.
    std::size_t num_labels() const { return num_labels_; }
    std::size_t num_docs() const { return docs_.size(); }

    double doc_freq(TermId term) const;
    const std::vector<double>& doc_freqs() const { return df_; }

    /// C(l, n); 0 for unseen pairs.
    double joint_count(LabelId label, TermId term) const;
    /// Label -> term counts, only labels with at least one document.
    const std::map<LabelId, SparseVector>& joint_counts() const { return joint_; }

  private:
    std::vector<Document> docs_;
    std::size_t num_terms_ = 0;
    std::size_t num_labels_ = 0;
    std::vector<double> df_;
    std::map<LabelId, SparseVector> joint_;
};

Collection parse_collection(std::istream& in, bool expect_labels,
                            std::optional<std::size_t> dict_size = std::nullopt);
Collection read_collection(const std::string& path, bool expect_labels,
                           std::optional<std::size_t> dict_size = std::nullopt);

/// Writes one document per line in the same format parse_collection reads.
void write_collection(std::ostream& out, const Collection& collection);
void write_document(std::ostream& out, const Document& doc);

std::string format_label_set(const LabelSet& labels);
std::string format_double(double x);

/// Label Powerset codec: each observed label set is one class.
class PowersetCodec {
  public:
    /// Registers `labels` when new; returns its class id.
    LabelId insert(const LabelSet& labels);
    std::optional<LabelId> encode(const LabelSet& labels) const;
    const LabelSet& decode(LabelId cls) const;
    std::size_t size() const { return backward_.size(); }

  private:
    std::map<LabelSet, LabelId> forward_;
    std::vector<LabelSet> backward_;
};

/// Classes are numbered by first occurrence.
std::pair<Collection, PowersetCodec> powerset_encode(const Collection& collection);

/// A word sequence whose positions occur with the given probabilities.
struct WeightedSequence {
    std::vector<TermId> words;
    std::vector<double> weights;

    void validate() const;
};

/// E(w_n) = sum of occurrence probabilities of term n.
SparseVector expected_counts(const WeightedSequence& seq);

/// Poisson-binomial probability that `term` occurs exactly `count` times.
double count_probability(const WeightedSequence& seq, TermId term, int count);

/// Poisson-binomial pmf over counts 0..k for the given occurrence weights.
Vector poisson_binomial_pmf(std::span<const double> weights);

/// E(n_c): expected number of distinct terms whose count over all the
/// sequences is exactly c.
double expected_count_frequencies(std::span<const WeightedSequence> sequences, int count);

}  // namespace sgm
