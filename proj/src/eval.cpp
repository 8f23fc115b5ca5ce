#include "sgm/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sgm {

int RankedJudgment::grade(LabelId label) const {
    const auto it = grades.find(label);
    return it == grades.end() ? 0 : it->second;
}

namespace {

void check_lengths(const std::vector<LabelSet>& p, const std::vector<LabelSet>& r) {
    if (p.size() != r.size())
        throw std::invalid_argument("prediction/reference count mismatch: " + std::to_string(p.size()) + " vs " +
                                    std::to_string(r.size()));
}

std::size_t overlap(const LabelSet& a, const LabelSet& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

double f1(double tp, double pp, double rp) { return tp > 0.0 ? 2.0 * tp / (pp + rp) : 0.0; }

}  // namespace

double micro_f1(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& references) {
    check_lengths(predictions, references);
    double tp = 0.0, pp = 0.0, rp = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        tp += static_cast<double>(overlap(predictions[i], references[i]));
        pp += static_cast<double>(predictions[i].size());
        rp += static_cast<double>(references[i].size());
    }
    return f1(tp, pp, rp);
}

double macro_f1(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& references) {
    check_lengths(predictions, references);
    struct Tally {
        double tp = 0.0, pp = 0.0, rp = 0.0;
    };
    std::map<LabelId, Tally> per_label;
    for (const LabelSet& r : references)
        for (LabelId l : r) per_label[l].rp += 1.0;
    if (per_label.empty()) throw std::invalid_argument("macro F1 needs at least one reference label");
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (LabelId l : predictions[i]) {
            const auto it = per_label.find(l);
            if (it == per_label.end()) continue;
            it->second.pp += 1.0;
            if (std::binary_search(references[i].begin(), references[i].end(), l)) it->second.tp += 1.0;
        }
    }
    double sum = 0.0;
    for (const auto& [l, t] : per_label) sum += f1(t.tp, t.pp, t.rp);
    return sum / static_cast<double>(per_label.size());
}

double average_precision(const RankedJudgment& j) {
    double relevant = 0.0;
    for (const auto& [l, g] : j.grades)
        if (g > 0) relevant += 1.0;
    if (relevant == 0.0) return 0.0;
    double hits = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < j.ranking.size(); ++k) {
        if (j.grade(j.ranking[k]) <= 0) continue;
        hits += 1.0;
        sum += hits / static_cast<double>(k + 1);
    }
    return sum / relevant;
}

double mean_average_precision(const std::vector<RankedJudgment>& js) {
    if (js.empty()) return 0.0;
    double s = 0.0;
    for (const auto& j : js) s += average_precision(j);
    return s / static_cast<double>(js.size());
}

double ndcg_at_k(const RankedJudgment& j, std::size_t k) {
    if (k == 0) throw std::invalid_argument("ndcg cutoff must be >= 1");
    std::vector<int> ideal;
    for (const auto& [l, g] : j.grades)
        if (g > 0) ideal.push_back(g);
    if (ideal.empty()) return 0.0;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const auto gain = [](int g, std::size_t r) { return (std::exp2(g) - 1.0) / std::log2(static_cast<double>(r) + 1.0); };
    double z = 0.0;
    for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) z += gain(ideal[r], r + 1);
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, j.ranking.size()); ++r) dcg += gain(j.grade(j.ranking[r]), r + 1);
    return dcg / z;
}

double mean_ndcg_at_k(const std::vector<RankedJudgment>& js, std::size_t k) {
    if (js.empty()) return 0.0;
    double s = 0.0;
    for (const auto& j : js) s += ndcg_at_k(j, k);
    return s / static_cast<double>(js.size());
}

double rer(double f_max, double f_baseline, double f_new) {
    if (!(f_max > f_baseline)) throw std::invalid_argument("RER needs f_max > f_baseline");
    return 1.0 - (f_max - f_new) / (f_max - f_baseline);
}

double ri(double f_baseline, double f_new) {
    if (!(f_baseline > 0.0)) throw std::invalid_argument("RI needs f_baseline > 0");
    return f_new / f_baseline - 1.0;
}

namespace {

// Continued fraction for I_x(a,b), modified Lentz.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("t distribution needs df > 0");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t >= 0.0 ? tail : 1.0 - tail;
}

TTest paired_t_test_one_tailed(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal lengths");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired t-test needs at least 2 pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw std::invalid_argument("paired t-test: differences have zero variance");
    TTest r;
    r.df = static_cast<double>(n - 1);
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_upper_tail(r.t, r.df);
    return r;
}

std::string significance_flag(double p) {
    if (p < 0.005) return "†";
    if (p < 0.05) return "‡";
    return "";
}

// ------------------------------------------------------------------- files

namespace {

template <typename T>
T parse_field(std::string_view s, std::size_t line, const char* what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line);
    return v;
}

template <typename F>
void for_each_record(std::istream& in, std::size_t fields, F&& f) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> tok;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        tok.clear();
        for (std::string t; ss >> t;) tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok.size() != fields)
            throw ParseError("expected " + std::to_string(fields) + " fields, got " + std::to_string(tok.size()),
                             line_no);
        f(tok, line_no);
    }
}

}  // namespace

std::map<std::int64_t, std::map<LabelId, int>> read_judgments(std::istream& in) {
    std::map<std::int64_t, std::map<LabelId, int>> out;
    for_each_record(in, 3, [&](const std::vector<std::string>& t, std::size_t line) {
        const int g = parse_field<int>(t[2], line, "grade");
        if (g < 0) throw ParseError("negative grade", line);
        out[parse_field<std::int64_t>(t[0], line, "query")][parse_field<LabelId>(t[1], line, "label")] = g;
    });
    return out;
}

std::map<std::int64_t, std::vector<LabelId>> read_rankings(std::istream& in) {
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, LabelId>>> raw;
    for_each_record(in, 4, [&](const std::vector<std::string>& t, std::size_t line) {
        raw[parse_field<std::int64_t>(t[0], line, "query")].emplace_back(parse_field<std::int64_t>(t[1], line, "rank"),
                                                                       parse_field<LabelId>(t[2], line, "label"));
    });
    std::map<std::int64_t, std::vector<LabelId>> out;
    for (auto& [q, list] : raw) {
        std::stable_sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        auto& dst = out[q];
        std::set<LabelId> seen;
        for (const auto& [r, l] : list)
            if (seen.insert(l).second) dst.push_back(l);
    }
    return out;
}

std::vector<LabelSet> read_predictions(std::istream& in) {
    std::map<std::int64_t, LabelSet> rows;
    for_each_record(in, 3, [&](const std::vector<std::string>& t, std::size_t line) {
        std::vector<LabelId> labels;
        std::string_view field = t[1];
        while (!field.empty()) {
            const auto comma = field.find(',');
            labels.push_back(parse_field<LabelId>(field.substr(0, comma), line, "label"));
            if (comma == std::string_view::npos) break;
            field.remove_prefix(comma + 1);
        }
        rows[parse_field<std::int64_t>(t[0], line, "ordinal")] = make_label_set(std::move(labels));
    });
    std::vector<LabelSet> out;
    out.reserve(rows.size());
    std::int64_t expect = 0;
    for (auto& [ord, labels] : rows) {
        if (ord != expect) throw std::runtime_error("prediction ordinals must be 0..n-1 without gaps");
        out.push_back(std::move(labels));
        ++expect;
    }
    return out;
}

std::vector<RankedJudgment> join_judgments(const std::map<std::int64_t, std::vector<LabelId>>& rankings,
                                           const std::map<std::int64_t, std::map<LabelId, int>>& judgments) {
    std::vector<RankedJudgment> out;
    out.reserve(judgments.size());
    for (const auto& [q, grades] : judgments) {
        RankedJudgment j;
        j.grades = grades;
        if (const auto it = rankings.find(q); it != rankings.end()) j.ranking = it->second;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace sgm
