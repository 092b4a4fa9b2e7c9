// Chi-bar-squared machinery: the tridiagonal H matrix, mixture weights
// (closed form for J <= 4, Monte Carlo orthant probabilities in general),
// and the mixture survival function used as the asymptotic p-value.
//
// H = R I_F^{-1} R^T evaluated under the null has the closed form
//
//   H = (1 / nu1 nu2) (G D_pi^{-1} G^T + e e^T / pi_J),
//
// a symmetric tridiagonal matrix with diagonal (pi_j + pi_{j+1})/(pi_j pi_{j+1})
// and off-diagonal -1/pi_{j+1}, all divided by nu1 nu2.  The weight w_j of the
// chi^2_{(J-1)-j} mixture component sums, over active sets S of size j,
// Pr(Z1(S) >= 0) Pr(Z2(S) >= 0) with Z1 ~ N(0, H(S,S)^{-1}) and
// Z2 ~ N(0, H(Sc,Sc) - H(Sc,S) H(S,S)^{-1} H(S,Sc)).

#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "lro/table.hpp"

namespace lro {

struct HMatrix {
  Eigen::MatrixXd h;   // (J-1) x (J-1) symmetric positive definite
  Eigen::VectorXd pi;  // pooled category probabilities, length J
  double nu1 = 0.5;
  double nu2 = 0.5;
};

// pi strictly positive summing to 1 (1e-10), nu1 + nu2 = 1 (1e-12).
HMatrix h_matrix(const Eigen::VectorXd& pi, double nu1, double nu2);

// Kronecker closed form of the per-observation Fisher information under the
// null: [[1, nu1], [nu1, nu1]] (x) (D_pi - pi pi^T) restricted to the leading
// (J-1) block.  Equals fisher_information(prob_to_theta(null p), nu1, nu2).
Eigen::MatrixXd fisher_information_null(const Eigen::VectorXd& pi, double nu1,
                                        double nu2);

struct ChiBarWeights {
  Eigen::VectorXd w;  // length J; w[j] multiplies chi^2_{(J-1)-j}
  enum class Method { closed_form, monte_carlo } method = Method::closed_form;
  std::int64_t mc_reps = 0;
};

// Exact arccos formulas, available for J in {2, 3, 4}; correlations are read
// off H directly (weights are invariant to the 1/(nu1 nu2) scale).
ChiBarWeights weights_closed_form(const HMatrix& h);

// Orthant-probability Monte Carlo for any J.  Deterministic given seed and
// independent of thread count: draws are split into fixed blocks with
// substreams keyed by (seed, subset index, block index), and each orthant
// indicator is averaged with its antithetic mirror.  Weights are renormalized
// to sum to 1.  threads <= 0 means use the default worker count.
ChiBarWeights weights_monte_carlo(const HMatrix& h, std::int64_t reps,
                                  std::uint64_t seed, int threads = 1);

// Convenience: pooled marginals pi_hat = (N1j + N2j)/n and nu_i = n_i/n from
// a table (the local-test plug-in), epsilon-adjusted first.
HMatrix h_matrix_from_table(const Table& table, double zero_cell_eps = 1e-5);

// P(chi-bar^2 > t) = sum_j w_j P(chi^2_{(J-1)-j} > t); 1 for t <= 0.
double chibar_pvalue(double t, const ChiBarWeights& w);

// Worker count used by parallel sections: LRO_THREADS if set, otherwise the
// hardware concurrency (at least 1).
int default_thread_count();

}  // namespace lro
