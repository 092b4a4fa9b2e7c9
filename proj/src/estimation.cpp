#include "lro/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lro {

namespace {

struct Working {
  Eigen::VectorXd N;  // epsilon-adjusted counts, flattened (row 1 then row 2)
  double n1 = 0.0, n2 = 0.0, n = 0.0;
  Eigen::Index J = 0, m = 0;  // m = J-1 constraints
};

Working make_working(const Table& table, double eps) {
  const Table adj = table.epsilon_adjusted(eps);
  Working w;
  w.N = adj.flatten();
  w.n1 = adj.n1();
  w.n2 = adj.n2();
  w.n = w.n1 + w.n2;
  w.J = adj.J();
  w.m = w.J - 1;
  return w;
}

// Exact maximizer of the loglikelihood over the face {log-odds_j = 0 for
// j in S}: categories linked by a run of active constraints form a block B,
// and within it p_ij = (N_i(B)/n) * (N.j / N.(B)).
Eigen::VectorXd pooled_face_fit(const Working& w, const std::vector<bool>& S) {
  Eigen::VectorXd p(2 * w.J);
  Eigen::Index b = 0;
  while (b < w.J) {
    Eigen::Index e = b;
    while (e < w.J - 1 && S[static_cast<std::size_t>(e)]) ++e;
    const auto len = e - b + 1;
    const double nb1 = w.N.segment(b, len).sum();
    const double nb2 = w.N.segment(w.J + b, len).sum();
    const double nb = nb1 + nb2;
    for (Eigen::Index j = b; j <= e; ++j) {
      const double col = w.N[j] + w.N[w.J + j];
      p[j] = (nb1 / w.n) * (col / nb);
      p[w.J + j] = (nb2 / w.n) * (col / nb);
    }
    b = e + 1;
  }
  return p;
}

// theta12-block of the score at fitted p: g12_j = N_1j - n p_1j.
Eigen::VectorXd score12(const Working& w, const Eigen::VectorXd& p) {
  return w.N.head(w.m) - w.n * p.head(w.m);
}

// Multipliers lambda solving grad l = R^T lambda for a given active set.
// R = (0 | G) makes the theta12 equations (G^T lambda)_k = g12_k, i.e.
// lambda_k = g12_k + lambda_{k-1}; at an inactive k the cumulative sum
// vanishes at the optimum and lambda_k is fixed to 0.
Eigen::VectorXd face_multipliers(const Working& w, const Eigen::VectorXd& p,
                                 const std::vector<bool>& active) {
  const Eigen::VectorXd g12 = score12(w, p);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(w.m);
  double prev = 0.0;
  for (Eigen::Index k = 0; k < w.m; ++k) {
    const double ak = g12[k] + prev;
    if (active[static_cast<std::size_t>(k)]) {
      lam[k] = ak;
      prev = ak;
    } else {
      lam[k] = 0.0;
      prev = 0.0;
    }
  }
  return lam;
}

// Fill the reported fields from a fitted probability vector: theta, loglik,
// the canonical active set {j : (R theta)_j <= 1e-6}, its multipliers, and a
// stationarity/sign/feasibility verdict.
RestrictedFit finalize(const Working& w, const Eigen::VectorXd& p,
                       const SolverOptions& opts, int iterations,
                       bool reached_optimum) {
  constexpr double kActiveTol = 1e-6;
  RestrictedFit fit;
  fit.p = p;
  fit.theta = prob_to_theta(p);
  fit.loglik = loglik(w.N, p);
  fit.iterations = iterations;

  const Eigen::VectorXd logodds = local_odds_ratios(p).array().log();
  std::vector<bool> active(static_cast<std::size_t>(w.m), false);
  for (Eigen::Index j = 0; j < w.m; ++j) {
    if (logodds[j] <= kActiveTol) {
      active[static_cast<std::size_t>(j)] = true;
      fit.active_set.push_back(static_cast<int>(j) + 1);
    }
  }
  fit.kkt_multipliers = face_multipliers(w, p, active);

  const double scale = std::max(1.0, w.n);
  const Eigen::VectorXd g = score(w.N, fit.theta, w.n1, w.n2);
  const Eigen::MatrixXd R = build_design_matrices(w.J).R;
  const double resid =
      (g - R.transpose() * fit.kkt_multipliers).lpNorm<Eigen::Infinity>();
  const bool signs_ok = fit.kkt_multipliers.maxCoeff() <= opts.kkt_tol * scale;
  const bool feasible = logodds.minCoeff() >= -opts.feas_tol;
  fit.converged =
      reached_optimum && feasible && signs_ok && resid <= opts.kkt_tol * scale;
  return fit;
}

// One active-set walk over the face lattice from working set S0.  Each face
// optimum is exact (pooled closed form); infeasible targets are approached by
// a line search in theta that stops at the first blocking constraint, which
// then joins the working set; at a feasible face optimum the most positive
// multiplier leaves the working set until all are nonpositive.
bool face_walk(const Working& w, std::vector<bool> S, const SolverOptions& opts,
               Eigen::VectorXd& p_out, int& iters) {
  const double mult_tol = opts.kkt_tol * std::max(1.0, w.n);
  Eigen::VectorXd theta_cur = Eigen::VectorXd::Zero(2 * w.m);
  Eigen::VectorXd r_cur = Eigen::VectorXd::Zero(w.m);  // log odds at theta_cur

  for (iters = 1; iters <= opts.max_iter; ++iters) {
    const Eigen::VectorXd p_face = pooled_face_fit(w, S);
    Eigen::VectorXd r_face = local_odds_ratios(p_face).array().log();
    for (Eigen::Index j = 0; j < w.m; ++j)
      if (S[static_cast<std::size_t>(j)] || std::abs(r_face[j]) < 1e-12)
        r_face[j] = std::max(r_face[j], 0.0);

    double alpha = 1.0;
    Eigen::Index blocker = -1;
    for (Eigen::Index j = 0; j < w.m; ++j) {
      if (S[static_cast<std::size_t>(j)] || r_face[j] >= 0.0) continue;
      const double aj = r_cur[j] / (r_cur[j] - r_face[j]);
      if (aj < alpha) {
        alpha = aj;
        blocker = j;
      }
    }

    if (blocker >= 0) {
      const Eigen::VectorXd theta_face = prob_to_theta(p_face);
      theta_cur += alpha * (theta_face - theta_cur);
      r_cur += alpha * (r_face - r_cur);
      r_cur[blocker] = 0.0;
      for (Eigen::Index j = 0; j < w.m; ++j)
        if (S[static_cast<std::size_t>(j)]) r_cur[j] = 0.0;
      S[static_cast<std::size_t>(blocker)] = true;
      continue;
    }

    // face optimum is feasible: either done or a constraint must leave
    const Eigen::VectorXd lam = face_multipliers(w, p_face, S);
    Eigen::Index worst = -1;
    double worst_val = mult_tol;
    for (Eigen::Index k = 0; k < w.m; ++k) {
      if (S[static_cast<std::size_t>(k)] && lam[k] > worst_val) {
        worst_val = lam[k];
        worst = k;
      }
    }
    if (worst < 0) {
      p_out = p_face;
      return true;
    }
    theta_cur = prob_to_theta(p_face);
    r_cur = r_face;
    S[static_cast<std::size_t>(worst)] = false;
  }
  return false;
}

}  // namespace

RestrictedFit mle_null(const Table& table, const SolverOptions& opts) {
  const Working w = make_working(table, opts.zero_cell_eps);
  Eigen::VectorXd p(2 * w.J);
  for (Eigen::Index j = 0; j < w.J; ++j) {
    const double col = w.N[j] + w.N[w.J + j];
    p[j] = w.n1 * col / (w.n * w.n);
    p[w.J + j] = w.n2 * col / (w.n * w.n);
  }
  RestrictedFit fit;
  fit.p = p;
  fit.theta = prob_to_theta(p);
  fit.loglik = loglik(w.N, p);
  fit.active_set.resize(static_cast<std::size_t>(w.m));
  for (int j = 0; j < w.m; ++j) fit.active_set[static_cast<std::size_t>(j)] = j + 1;
  // unrestricted Lagrange multipliers of the all-equality problem (their
  // positive parts are what the order-restricted fit relaxes)
  fit.kkt_multipliers =
      face_multipliers(w, p, std::vector<bool>(static_cast<std::size_t>(w.m), true));
  fit.converged = true;
  fit.iterations = 0;
  return fit;
}

RestrictedFit mle_restricted(const Table& table, const SolverOptions& opts) {
  const Working w = make_working(table, opts.zero_cell_eps);

  // saturated shortcut: the unconstrained optimum may already be feasible
  const Eigen::VectorXd p_sat = w.N / w.n;
  const Eigen::VectorXd r_sat = local_odds_ratios(p_sat).array().log();
  if (r_sat.minCoeff() >= 0.0) return finalize(w, p_sat, opts, 0, true);

  // three initial working sets: the empirically violated constraints, none,
  // and all (walks differ, the optimum does not)
  std::vector<std::vector<bool>> inits;
  std::vector<bool> violated(static_cast<std::size_t>(w.m), false);
  for (Eigen::Index j = 0; j < w.m; ++j)
    if (r_sat[j] <= 0.0) violated[static_cast<std::size_t>(j)] = true;
  inits.push_back(violated);
  inits.emplace_back(static_cast<std::size_t>(w.m), false);
  inits.emplace_back(static_cast<std::size_t>(w.m), true);

  Eigen::VectorXd p_best;
  int iters = 0;
  for (const auto& init : inits) {
    Eigen::VectorXd p_opt;
    if (face_walk(w, init, opts, p_opt, iters))
      return finalize(w, p_opt, opts, iters, true);
    if (p_best.size() == 0) p_best = pooled_face_fit(w, init);
  }
  return finalize(w, p_best, opts, iters, false);
}

RestrictedFit active_set_oracle(const Table& table, const SolverOptions& opts) {
  const Working w = make_working(table, opts.zero_cell_eps);
  if (w.m > 20)
    throw std::invalid_argument("active_set_oracle: table too wide to enumerate");

  // screen tolerances; closed-form face fits are exact to rounding, so these
  // absolute values hold with a wide margin at practical sample sizes
  constexpr double kFeasTol = 1e-9;
  constexpr double kStatTol = 1e-8;
  constexpr double kSignTol = 1e-9;

  double best_ll = -std::numeric_limits<double>::infinity();
  int best_size = -1;
  Eigen::VectorXd best_p;
  std::vector<bool> best_S;

  for (std::uint32_t mask = 0; mask < (1u << w.m); ++mask) {
    std::vector<bool> S(static_cast<std::size_t>(w.m));
    int size = 0;
    for (Eigen::Index j = 0; j < w.m; ++j) {
      S[static_cast<std::size_t>(j)] = (mask >> j) & 1u;
      size += S[static_cast<std::size_t>(j)] ? 1 : 0;
    }
    const Eigen::VectorXd p = pooled_face_fit(w, S);
    const Eigen::VectorXd logodds = local_odds_ratios(p).array().log();

    bool ok = true;
    for (Eigen::Index j = 0; ok && j < w.m; ++j)
      if (!S[static_cast<std::size_t>(j)] && logodds[j] < -kFeasTol) ok = false;
    if (!ok) continue;

    // stationarity in the theta2 block, then the multiplier recurrence:
    // cumulative score sums must vanish at inactive constraints and be
    // nonpositive at active ones
    const Eigen::VectorXd g12 = score12(w, p);
    const Eigen::VectorXd g2 =
        g12 + w.N.segment(w.J, w.m) - w.n * p.segment(w.J, w.m);
    if (g2.lpNorm<Eigen::Infinity>() > kStatTol) continue;
    double prev = 0.0;
    for (Eigen::Index k = 0; ok && k < w.m; ++k) {
      const double ak = g12[k] + prev;
      if (S[static_cast<std::size_t>(k)]) {
        if (ak > kSignTol) ok = false;
        prev = ak;
      } else {
        if (std::abs(ak) > kStatTol) ok = false;
        prev = 0.0;
      }
    }
    if (!ok) continue;

    const double ll = loglik(w.N, p);
    if (ll > best_ll + 1e-12 ||
        (std::abs(ll - best_ll) <= 1e-12 && size > best_size)) {
      best_ll = ll;
      best_size = size;
      best_p = p;
      best_S = S;
    }
  }
  if (best_size < 0)
    throw std::runtime_error("active_set_oracle: no face passed the KKT screens");
  return finalize(w, best_p, opts, 0, true);
}

}  // namespace lro
