// Maximum likelihood under the equality null and under the likelihood-ratio
// order restriction R * theta >= 0.
//
// The null MLE is closed form (independence with both row totals fixed):
// p_ij = n_i (N_1j + N_2j) / n^2.  The restricted MLE maximizes the concave
// multinomial loglikelihood over the polyhedron {R theta >= 0}; implemented as
// a feasible-point active-set walk whose equality subproblems are solved
// exactly (categories linked by active constraints pool in closed form), with
// a blocking-constraint line search between face optima.
//
// KKT convention: at the optimum the gradient lies in the cone of active
// constraint rows with nonpositive coefficients,
//     grad l(theta~) = sum_{j in active} lambda_j R_j,   lambda_j <= 0,
// i.e. no feasible ascent direction exists.  kkt_multipliers stores these
// lambda_j (zero on the inactive set).
//
// active_set_oracle cross-checks the solver by brute force: for each of the
// 2^{J-1} candidate active sets the equality-constrained optimum has a closed
// form (categories spanned by a run of active constraints are pooled:
// p_ij = (N_i(B)/n) * (N.j / N.(B)) for j in block B), and exactly one
// candidate passes feasibility plus the multiplier sign test.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "lro/loglinear.hpp"
#include "lro/table.hpp"

namespace lro {

// Raised when the restricted solver fails to converge within max_iter and
// all restarts are exhausted.
class solver_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double kkt_tol = 1e-8;        // multiplier / stationarity tolerance
  double feas_tol = 1e-8;       // constraint feasibility tolerance
  int max_iter = 250;           // active-set moves allowed per start
  double zero_cell_eps = 1e-5;  // zero-count replacement before fitting
};

struct RestrictedFit {
  Eigen::VectorXd theta;            // length 2(J-1)
  Eigen::VectorXd p;                // fitted cell probabilities, length 2J
  double loglik = 0.0;              // at the (epsilon-adjusted) counts
  std::vector<int> active_set;      // 1-based j with log local odds_j == 0
  Eigen::VectorXd kkt_multipliers;  // length J-1, <= 0 on active set, else 0
  bool converged = false;
  int iterations = 0;
};

// Closed-form equality-null fit; active set is all of {1..J-1}.
RestrictedFit mle_null(const Table& table, const SolverOptions& opts = {});

// Order-restricted fit by the active-set walk.  Retries from three initial
// working sets before giving up; a non-converged result is returned with
// converged = false (analyze and the simulation engine decide whether that
// is fatal).
RestrictedFit mle_restricted(const Table& table, const SolverOptions& opts = {});

// Exhaustive enumeration oracle (J <= 6).  Throws std::runtime_error if no
// candidate active set passes the KKT screens — that signals a bug, not data.
RestrictedFit active_set_oracle(const Table& table,
                                const SolverOptions& opts = {});

}  // namespace lro
