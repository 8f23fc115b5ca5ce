#include "sgm/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace sgm {

void Bm25Params::validate() const {
    if (!(k1 >= 0.0) || !(k3 >= 0.0)) throw std::invalid_argument("bm25 k1 and k3 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("bm25 b must lie in [0,1]");
}

Bm25Stats Bm25Stats::from(const Collection& collection) {
    Bm25Stats s;
    s.terms = TermStats::from(collection);
    double total = 0.0;
    for (const Document& d : collection.docs()) total += d.vec.l1();
    s.avg_length = collection.num_docs() ? total / static_cast<double>(collection.num_docs()) : 0.0;
    return s;
}

namespace {

double l2(const SparseVector& v) {
    double s = 0.0;
    for (const Entry& e : v) s += e.weight * e.weight;
    return std::sqrt(s);
}

double query_transform(double q, double k3) { return (k3 + 1.0) * q / (k3 + q); }

double bm25_theta(double w, double doc_length, TermId term, const Bm25Params& p, const Bm25Stats& stats) {
    const double ln = p.k1 * ((1.0 - p.b) + p.b * doc_length / stats.avg_length);
    return idf(term, stats.terms, p.idf_variant) * (p.k1 + 1.0) * w / (ln + w);
}

}  // namespace

double vsm_score(const SparseVector& train_vec, const SparseVector& query) {
    const double na = l2(train_vec);
    const double nb = l2(query);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    auto a = train_vec.begin();
    auto b = query.begin();
    while (a != train_vec.end() && b != query.end()) {
        if (a->term < b->term) {
            ++a;
        } else if (b->term < a->term) {
            ++b;
        } else {
            dot += a->weight * b->weight;
            ++a;
            ++b;
        }
    }
    return dot / (na * nb);
}

double bm25_score(const SparseVector& doc, const SparseVector& query, const Bm25Params& params,
                  const Bm25Stats& stats) {
    if (!(stats.avg_length > 0.0)) throw std::invalid_argument("bm25 needs a positive average length");
    const double length = doc.l1();
    double score = 0.0;
    for (const Entry& q : query) {
        const double w = doc.weight(q.term);
        if (w == 0.0) continue;
        score += bm25_theta(w, length, q.term, params, stats) * query_transform(q.weight, params.k3);
    }
    return score;
}

Scorer parse_scorer(const std::string& s) {
    if (s == "sgm") return Scorer::sgm;
    if (s == "vsm") return Scorer::vsm;
    if (s == "bm25") return Scorer::bm25;
    throw std::invalid_argument("unknown scorer '" + s + "'");
}

std::string to_string(Scorer s) {
    switch (s) {
        case Scorer::sgm: return "sgm";
        case Scorer::vsm: return "vsm";
        case Scorer::bm25: return "bm25";
    }
    return "?";
}

BaselineRanker::BaselineRanker(const Collection& collection, Scorer scorer, const Bm25Params& bm25,
                               const WeightingConfig& weighting)
    : scorer_(scorer), bm25_(bm25), weighting_(weighting) {
    if (scorer == Scorer::sgm) throw std::invalid_argument("sgm is not a baseline scorer");
    bm25_.validate();
    if (scorer == Scorer::vsm) weighting_.validate();
    if (collection.num_docs() == 0) throw std::invalid_argument("empty training collection");
    stats_ = Bm25Stats::from(collection);
    term_stats_ = stats_.terms;

    CountTable table;
    for (const Document& d : collection.docs()) {
        if (scorer == Scorer::vsm)
            table.add(apply_weighting(d.vec, VectorRole::train_doc, term_stats_, weighting_), d.labels);
        else
            table.add(d.vec, d.labels);
    }
    for (auto& [label, counts] : table.finalize()) {
        label_ids_.push_back(label);
        prototypes_.push_back(std::move(counts));
    }

    lists_.assign(collection.num_terms(), {});
    for (std::size_t k = 0; k < prototypes_.size(); ++k) {
        const SparseVector& p = prototypes_[k];
        const double norm = l2(p);
        const double length = p.l1();
        for (const Entry& e : p) {
            if (static_cast<std::size_t>(e.term) >= lists_.size()) continue;
            const double theta = scorer == Scorer::vsm ? e.weight / norm
                                                       : bm25_theta(e.weight, length, e.term, bm25_, stats_);
            lists_[static_cast<std::size_t>(e.term)].emplace_back(static_cast<std::int32_t>(k), theta);
        }
    }
}

Vector BaselineRanker::scores(const SparseVector& query) const {
    Vector s = Vector::Zero(static_cast<Eigen::Index>(label_ids_.size()));
    if (scorer_ == Scorer::vsm) {
        const SparseVector q = apply_weighting(query, VectorRole::test_doc, term_stats_, weighting_);
        const double norm = l2(q);
        if (norm == 0.0) return s;
        for (const Entry& e : q) {
            if (static_cast<std::size_t>(e.term) >= lists_.size()) continue;
            for (const auto& [k, theta] : lists_[static_cast<std::size_t>(e.term)]) s[k] += theta * e.weight / norm;
        }
    } else {
        for (const Entry& e : query) {
            if (static_cast<std::size_t>(e.term) >= lists_.size()) continue;
            const double qt = query_transform(e.weight, bm25_.k3);
            for (const auto& [k, theta] : lists_[static_cast<std::size_t>(e.term)]) s[k] += theta * qt;
        }
    }
    return s;
}

std::vector<Ranked> BaselineRanker::rank(const SparseVector& query, std::size_t k) const {
    return top_k(scores(query), label_ids_, k);
}

LabelId BaselineRanker::classify(const SparseVector& query) const { return rank(query, 1).front().label; }

}  // namespace sgm
