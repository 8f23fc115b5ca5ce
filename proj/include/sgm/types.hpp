#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace sgm {

using TermId = std::int32_t;
using LabelId = std::int32_t;
using NodeId = std::int32_t;

using Vector = Eigen::VectorXd;
using IndexVector = Eigen::VectorXi;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Max-shifted log-sum-exp. Returns -inf for an empty input or when every
/// element is -inf.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
    if (x.size() == 0) return kNegInf;
    const double m = x.maxCoeff();
    if (m == kNegInf) return kNegInf;
    return m + std::log((x.derived().array() - m).exp().sum());
}

}  // namespace sgm
