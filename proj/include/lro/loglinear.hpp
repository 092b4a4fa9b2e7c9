// Saturated loglinear parametrization of a 2 x J table:
//
//   log p_ij = u + u1(i) + theta2(j) + theta12(ij),
//
// with identifiability zeros u1(2) = theta2(J) = theta12(1J) = theta12(2j) = 0.
// The free parameter vector is theta = (theta2(1..J-1), theta12(11..1,J-1)),
// length 2(J-1), theta2 block first.  u and u1(1) are redundant given fixed
// row totals and are always recomputed from theta, never stored:
//
//   u      = log n2 - log n - log(1 + sum_j exp theta2(j))
//   u1(1)  = log(n1/n2)
//          + log[(1 + sum_j exp theta2(j)) / (1 + sum_j exp(theta2+theta12)(j))]
//
// Under this parametrization the local log odds ratios
// log theta_j = log(p_1j p_2,j+1 / (p_2j p_1,j+1)) are the linear map R*theta,
// so "treatment 2 dominates in the likelihood-ratio order" is R*theta >= 0.

#pragma once

#include <Eigen/Core>

#include "lro/table.hpp"

namespace lro {

struct DesignMatrices {
  Eigen::MatrixXd W0;  // 2J x 2, intercept/u1 columns
  Eigen::MatrixXd W;   // 2J x 2(J-1), full-rank design for theta
  Eigen::MatrixXd R;   // (J-1) x 2(J-1), rows give log local odds ratios
  Eigen::MatrixXd G;   // (J-1) x (J-1), 1 on diagonal, -1 on superdiagonal
};

// W = [[1,1],[1,0]] (x) [I_{J-1}; 0],  R = (0 | G).  Requires J >= 2.
DesignMatrices build_design_matrices(Eigen::Index J);

// theta (length 2(J-1)) -> joint cell probabilities (length 2J, lexicographic).
// Row sums are n1/n and n2/n by construction.  Throws std::overflow_error when
// a component of theta is too large for exp() to stay meaningful (|.| > 700).
Eigen::VectorXd theta_to_prob(const Eigen::VectorXd& theta, double n1,
                              double n2);

// Inverse map; p must be strictly positive (apply the epsilon policy first).
Eigen::VectorXd prob_to_theta(const Eigen::VectorXd& p);

// Local odds ratios theta_j = p_1j p_2,j+1 / (p_2j p_1,j+1), j = 1..J-1.
// Invariant under rescaling either row, so joint and conditional probabilities
// give the same values.
Eigen::VectorXd local_odds_ratios(const Eigen::VectorXd& p);

// Multinomial loglikelihood sum N_ij log p_ij (cells with N_ij = 0 skipped).
double loglik(const Eigen::VectorXd& counts_flat, const Eigen::VectorXd& p);

// Score of the loglikelihood in theta: W^T (N - n p(theta)).
Eigen::VectorXd score(const Eigen::VectorXd& counts_flat,
                      const Eigen::VectorXd& theta, double n1, double n2);

// Fisher information per observation at theta, sampling fractions nu_i:
//   I_F(theta) = sum_i nu_i M^T (D_{pi_i} - pi_i pi_i^T) M-blocks,
// the 2(J-1) x 2(J-1) matrix of Eq.-style blocks
//   [[A1 nu1 + A2 nu2, A1 nu1], [A1 nu1, A1 nu1]]
// with A_i the leading (J-1) principal block of D_{pi_i} - pi_i pi_i^T and
// pi_i the conditional category distribution of row i.  The negative Hessian
// of the loglikelihood equals n * I_F(theta).
Eigen::MatrixXd fisher_information(const Eigen::VectorXd& theta, double nu1,
                                   double nu2);

}  // namespace lro
