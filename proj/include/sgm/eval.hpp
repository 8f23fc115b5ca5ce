#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sgm/corpus.hpp"

namespace sgm {

/// A ranked list of labels with graded relevance; unlisted labels have grade 0.
struct RankedJudgment {
    std::vector<LabelId> ranking;
    std::map<LabelId, int> grades;

    int grade(LabelId label) const;
};

/// Pooled over documents and labels; 0 when nothing is correct.
double micro_f1(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& references);
/// Mean per-label F1 over the labels present in the references.
double macro_f1(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& references);

/// Grades are binarized at > 0. 0 when no label is relevant.
double average_precision(const RankedJudgment& j);
double mean_average_precision(const std::vector<RankedJudgment>& js);

/// Gain 2^y - 1, discount log2(rank + 1), normalized by the ideal ordering.
double ndcg_at_k(const RankedJudgment& j, std::size_t k = 20);
double mean_ndcg_at_k(const std::vector<RankedJudgment>& js, std::size_t k = 20);

/// 1 - (f_max - f_new) / (f_max - f_baseline).
double rer(double f_max, double f_baseline, double f_new);
/// f_new / f_baseline - 1.
double ri(double f_baseline, double f_new);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

struct TTest {
    double t = 0.0;
    double p = 0.5;
    double df = 0.0;
};

/// Tests mean(a - b) > 0 over paired per-dataset scores.
TTest paired_t_test_one_tailed(const std::vector<double>& a, const std::vector<double>& b);

/// "†" below 0.005, "‡" below 0.05, empty otherwise.
std::string significance_flag(double p);

/// `<query> <label> <grade>` lines.
std::map<std::int64_t, std::map<LabelId, int>> read_judgments(std::istream& in);
/// `<query> <rank> <label> <score>` lines; returns labels in rank order.
std::map<std::int64_t, std::vector<LabelId>> read_rankings(std::istream& in);
/// `<ordinal> <label[,label]*> <score>` lines, indexed by ordinal.
std::vector<LabelSet> read_predictions(std::istream& in);

/// Pairs rankings with judgments; queries without a ranking get an empty one.
std::vector<RankedJudgment> join_judgments(const std::map<std::int64_t, std::vector<LabelId>>& rankings,
                                           const std::map<std::int64_t, std::map<LabelId, int>>& judgments);

}  // namespace sgm
