// Power-divergence family of phi-divergences between probability vectors:
//
//   d_lambda(p, q) = (sum_i p_i^{lambda+1} / q_i^lambda - 1) / (lambda (lambda+1))
//
// with the analytic limits
//   lambda -> 0:   sum p log(p/q)        (Kullback-Leibler)
//   lambda -> -1:  sum q log(q/p)        (reversed Kullback-Leibler)
// and the conventions 0 log 0 = 0, 0^{lambda+1}/q^lambda = 0 for lambda > -1.
// For lambda <= -1 a zero p-cell makes the divergence +infinity.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace lro {

// |lambda| or |lambda + 1| at or below this routes to the limit formula
inline constexpr double kLambdaLimitTol = 1e-9;

template <typename DerivedP, typename DerivedQ>
double phi_divergence(const Eigen::MatrixBase<DerivedP>& p,
                      const Eigen::MatrixBase<DerivedQ>& q, double lambda) {
  if (p.size() != q.size())
    throw std::invalid_argument("phi_divergence: length mismatch");
  if ((q.derived().array() <= 0.0).any())
    throw std::invalid_argument("phi_divergence: q must be strictly positive");

  const Eigen::Index m = p.size();
  double acc = 0.0;
  if (std::abs(lambda) <= kLambdaLimitTol) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double pi = p.derived()(i);
      if (pi > 0.0) acc += pi * std::log(pi / q.derived()(i));
    }
    return acc;
  }
  if (std::abs(lambda + 1.0) <= kLambdaLimitTol) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double pi = p.derived()(i), qi = q.derived()(i);
      if (pi <= 0.0) return std::numeric_limits<double>::infinity();
      acc += qi * std::log(qi / pi);
    }
    return acc;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const double pi = p.derived()(i), qi = q.derived()(i);
    if (pi <= 0.0) {
      if (lambda < -1.0) return std::numeric_limits<double>::infinity();
      continue;  // 0^{lambda+1} = 0 for lambda > -1
    }
    acc += std::pow(pi, lambda + 1.0) / std::pow(qi, lambda);
  }
  return (acc - 1.0) / (lambda * (lambda + 1.0));
}

template <typename DerivedP, typename DerivedQ>
double kullback(const Eigen::MatrixBase<DerivedP>& p,
                const Eigen::MatrixBase<DerivedQ>& q) {
  return phi_divergence(p, q, 0.0);
}

template <typename DerivedP, typename DerivedQ>
double pearson(const Eigen::MatrixBase<DerivedP>& p,
               const Eigen::MatrixBase<DerivedQ>& q) {
  return phi_divergence(p, q, 1.0);
}

// Squared Hellinger distance sum (sqrt p - sqrt q)^2 = 2(1 - sum sqrt(pq)).
// Relation to the family: d_{-1/2}(p, q) = 2 * hellinger_sq(p, q), so the
// S statistic at lambda = -1/2 equals 4n * hellinger_sq(ptilde, phat).
template <typename DerivedP, typename DerivedQ>
double hellinger_sq(const Eigen::MatrixBase<DerivedP>& p,
                    const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("hellinger_sq: length mismatch");
  return (p.derived().array().sqrt() - q.derived().array().sqrt())
      .square()
      .sum();
}

}  // namespace lro
