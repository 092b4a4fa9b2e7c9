#include "lro/loglinear.hpp"

#include <cmath>
#include <stdexcept>

namespace lro {

DesignMatrices build_design_matrices(Eigen::Index J) {
  if (J < 2) throw std::invalid_argument("build_design_matrices: J must be >= 2");
  const Eigen::Index m = J - 1;
  DesignMatrices d;

  d.W0 = Eigen::MatrixXd::Zero(2 * J, 2);
  d.W0.col(0).setOnes();
  d.W0.col(1).head(J).setOnes();

  // M = [I_m; 0], W = [[1,1],[1,0]] (x) M
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(J, m);
  M.topRows(m).setIdentity();
  d.W = Eigen::MatrixXd::Zero(2 * J, 2 * m);
  d.W.block(0, 0, J, m) = M;
  d.W.block(0, m, J, m) = M;
  d.W.block(J, 0, J, m) = M;

  d.G = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    d.G(j, j) = 1.0;
    if (j + 1 < m) d.G(j, j + 1) = -1.0;
  }
  d.R = Eigen::MatrixXd::Zero(m, 2 * m);
  d.R.rightCols(m) = d.G;
  return d;
}

Eigen::VectorXd theta_to_prob(const Eigen::VectorXd& theta, double n1,
                              double n2) {
  if (theta.size() % 2 != 0 || theta.size() < 2)
    throw std::invalid_argument("theta_to_prob: theta must have length 2(J-1)");
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw std::invalid_argument("theta_to_prob: row totals must be positive");
  if ((theta.array().abs() > 700.0).any())
    throw std::overflow_error("theta_to_prob: component too large for exp()");
  const Eigen::Index m = theta.size() / 2;
  const Eigen::Index J = m + 1;
  const double n = n1 + n2;

  // conditional row distributions via shifted exponentials:
  //   row 1 ~ exp(theta2 + theta12), row 2 ~ exp(theta2), last category ~ 1
  Eigen::VectorXd t1 = Eigen::VectorXd::Zero(J), t2 = Eigen::VectorXd::Zero(J);
  t1.head(m) = theta.head(m) + theta.tail(m);
  t2.head(m) = theta.head(m);
  const auto softmax = [](Eigen::VectorXd t) {
    t.array() -= t.maxCoeff();
    Eigen::VectorXd e = t.array().exp();
    return Eigen::VectorXd(e / e.sum());
  };
  Eigen::VectorXd p(2 * J);
  p.head(J) = (n1 / n) * softmax(t1);
  p.tail(J) = (n2 / n) * softmax(t2);
  return p;
}

Eigen::VectorXd prob_to_theta(const Eigen::VectorXd& p) {
  if (p.size() % 2 != 0 || p.size() < 4)
    throw std::invalid_argument("prob_to_theta: p must have length 2J, J >= 2");
  if ((p.array() <= 0.0).any())
    throw std::invalid_argument("prob_to_theta: p must be strictly positive");
  const Eigen::Index J = p.size() / 2;
  const Eigen::Index m = J - 1;
  Eigen::VectorXd theta(2 * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    theta[j] = std::log(p[J + j] / p[2 * J - 1]);                    // theta2
    theta[m + j] = std::log(p[j] / p[J - 1]) - theta[j];             // theta12
  }
  return theta;
}

Eigen::VectorXd local_odds_ratios(const Eigen::VectorXd& p) {
  if (p.size() % 2 != 0 || p.size() < 4)
    throw std::invalid_argument("local_odds_ratios: p must have length 2J, J >= 2");
  const Eigen::Index J = p.size() / 2;
  Eigen::VectorXd v(J - 1);
  for (Eigen::Index j = 0; j + 1 < J; ++j)
    v[j] = (p[j] * p[J + j + 1]) / (p[J + j] * p[j + 1]);
  return v;
}

double loglik(const Eigen::VectorXd& counts_flat, const Eigen::VectorXd& p) {
  if (counts_flat.size() != p.size())
    throw std::invalid_argument("loglik: length mismatch");
  double ll = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (counts_flat[i] > 0.0) ll += counts_flat[i] * std::log(p[i]);
  return ll;
}

Eigen::VectorXd score(const Eigen::VectorXd& counts_flat,
                      const Eigen::VectorXd& theta, double n1, double n2) {
  const Eigen::Index J = counts_flat.size() / 2;
  if (theta.size() != 2 * (J - 1))
    throw std::invalid_argument("score: theta/counts size mismatch");
  const double n = counts_flat.sum();
  const Eigen::VectorXd p = theta_to_prob(theta, n1, n2);
  const DesignMatrices d = build_design_matrices(J);
  return d.W.transpose() * (counts_flat - n * p);
}

Eigen::MatrixXd fisher_information(const Eigen::VectorXd& theta, double nu1,
                                   double nu2) {
  const Eigen::Index m = theta.size() / 2;
  const Eigen::Index J = m + 1;
  const Eigen::VectorXd p = theta_to_prob(theta, nu1, nu2);
  const Eigen::VectorXd pi1 = p.head(J) / nu1;
  const Eigen::VectorXd pi2 = p.tail(J) / nu2;
  const auto mult_cov_block = [m](const Eigen::VectorXd& pi) {
    return Eigen::MatrixXd(
        Eigen::MatrixXd(pi.head(m).asDiagonal()) -
        pi.head(m) * pi.head(m).transpose());
  };
  const Eigen::MatrixXd A1 = mult_cov_block(pi1);
  const Eigen::MatrixXd A2 = mult_cov_block(pi2);
  Eigen::MatrixXd info(2 * m, 2 * m);
  info.topLeftCorner(m, m) = nu1 * A1 + nu2 * A2;
  info.topRightCorner(m, m) = nu1 * A1;
  info.bottomLeftCorner(m, m) = nu1 * A1;
  info.bottomRightCorner(m, m) = nu1 * A1;
  return info;
}

}  // namespace lro
