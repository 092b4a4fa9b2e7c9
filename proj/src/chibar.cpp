#include "lro/chibar.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "lro/prob.hpp"
#include "lro/rng.hpp"

namespace lro {

int default_thread_count() {
  if (const char* env = std::getenv("LRO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

HMatrix h_matrix(const Eigen::VectorXd& pi, double nu1, double nu2) {
  if (pi.size() < 2)
    throw std::invalid_argument("h_matrix: need at least two categories");
  if ((pi.array() <= 0.0).any())
    throw std::invalid_argument("h_matrix: pi must be strictly positive");
  if (std::abs(pi.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("h_matrix: pi must sum to 1");
  if (!(nu1 > 0.0) || !(nu2 > 0.0) || std::abs(nu1 + nu2 - 1.0) > 1e-12)
    throw std::invalid_argument("h_matrix: nu must be positive and sum to 1");

  const Eigen::Index m = pi.size() - 1;
  HMatrix out;
  out.pi = pi;
  out.nu1 = nu1;
  out.nu2 = nu2;
  out.h = Eigen::MatrixXd::Zero(m, m);
  const double s = 1.0 / (nu1 * nu2);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.h(j, j) = s * (pi[j] + pi[j + 1]) / (pi[j] * pi[j + 1]);
    if (j + 1 < m) out.h(j, j + 1) = out.h(j + 1, j) = -s / pi[j + 1];
  }
  return out;
}

Eigen::MatrixXd fisher_information_null(const Eigen::VectorXd& pi, double nu1,
                                        double nu2) {
  const Eigen::Index m = pi.size() - 1;
  const Eigen::MatrixXd A =
      Eigen::MatrixXd(pi.head(m).asDiagonal()) - pi.head(m) * pi.head(m).transpose();
  Eigen::MatrixXd info(2 * m, 2 * m);
  info.topLeftCorner(m, m) = (nu1 + nu2) * A;
  info.topRightCorner(m, m) = nu1 * A;
  info.bottomLeftCorner(m, m) = nu1 * A;
  info.bottomRightCorner(m, m) = nu1 * A;
  return info;
}

HMatrix h_matrix_from_table(const Table& table, double zero_cell_eps) {
  const Table adj = table.epsilon_adjusted(zero_cell_eps);
  const Eigen::VectorXd cols = adj.column_totals();
  return h_matrix(cols / adj.n(), adj.n1() / adj.n(), adj.n2() / adj.n());
}

namespace {

double corr(const Eigen::MatrixXd& v, Eigen::Index i, Eigen::Index j) {
  return v(i, j) / std::sqrt(v(i, i) * v(j, j));
}

double partial_corr(double rij, double rik, double rkj) {
  return (rij - rik * rkj) / std::sqrt((1.0 - rik * rik) * (1.0 - rkj * rkj));
}

}  // namespace

ChiBarWeights weights_closed_form(const HMatrix& hm) {
  const Eigen::Index m = hm.h.rows();
  ChiBarWeights out;
  out.method = ChiBarWeights::Method::closed_form;
  out.w = Eigen::VectorXd::Zero(m + 1);

  if (m == 1) {
    out.w << 0.5, 0.5;
    return out;
  }
  if (m == 2) {
    const double rho = corr(hm.h, 0, 1);
    const double w2 = std::acos(rho) / (2.0 * M_PI);
    out.w << 0.5 - w2, 0.5, w2;
    return out;
  }
  if (m == 3) {
    const double r12 = corr(hm.h, 0, 1);
    const double r13 = corr(hm.h, 0, 2);
    const double r23 = corr(hm.h, 1, 2);
    const double w0 =
        (2.0 * M_PI - std::acos(r12) - std::acos(r13) - std::acos(r23)) /
        (4.0 * M_PI);
    const double w1 = (3.0 * M_PI - std::acos(partial_corr(r12, r13, r23)) -
                       std::acos(partial_corr(r13, r12, r23)) -
                       std::acos(partial_corr(r23, r13, r12))) /
                      (4.0 * M_PI);
    // complementary pairs: even and odd weights each sum to 1/2
    out.w << w0, w1, 0.5 - w0, 0.5 - w1;
    return out;
  }
  throw std::invalid_argument(
      "weights_closed_form: arccos formulas cover J <= 4; use weights_monte_carlo");
}

namespace {

// Lower Cholesky factors of Var(Z1) = (H_SS)^-1 and Var(Z2) = Schur
// complement of H_SS, for one subset S (bit k set <=> constraint k in S).
struct SubsetFactors {
  Eigen::MatrixXd l1, l2;
  Eigen::Index d1 = 0, d2 = 0;
};

SubsetFactors subset_factors(const Eigen::MatrixXd& h, std::uint32_t mask) {
  const Eigen::Index m = h.rows();
  std::vector<Eigen::Index> in, out;
  for (Eigen::Index k = 0; k < m; ++k)
    ((mask >> k) & 1u ? in : out).push_back(k);
  SubsetFactors f;
  f.d1 = static_cast<Eigen::Index>(in.size());
  f.d2 = static_cast<Eigen::Index>(out.size());

  Eigen::MatrixXd hss(f.d1, f.d1), hcc(f.d2, f.d2), hcs(f.d2, f.d1);
  for (Eigen::Index a = 0; a < f.d1; ++a)
    for (Eigen::Index b = 0; b < f.d1; ++b) hss(a, b) = h(in[a], in[b]);
  for (Eigen::Index a = 0; a < f.d2; ++a)
    for (Eigen::Index b = 0; b < f.d2; ++b) hcc(a, b) = h(out[a], out[b]);
  for (Eigen::Index a = 0; a < f.d2; ++a)
    for (Eigen::Index b = 0; b < f.d1; ++b) hcs(a, b) = h(out[a], in[b]);

  if (f.d1 >= 2) {
    const Eigen::MatrixXd v1 = hss.inverse();
    Eigen::LLT<Eigen::MatrixXd> llt(v1);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("weights_monte_carlo: H submatrix not positive definite");
    f.l1 = llt.matrixL();
  }
  if (f.d2 >= 2) {
    Eigen::MatrixXd v2 = hcc;
    if (f.d1 > 0) v2 -= hcs * hss.inverse() * hcs.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(v2);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("weights_monte_carlo: Schur complement not positive definite");
    f.l2 = llt.matrixL();
  }
  return f;
}

// Antithetic orthant indicator average over `draws` samples z = L g:
// each g counts both {z >= 0} and {-z >= 0}.
double orthant_block(const Eigen::MatrixXd& l, std::int64_t draws,
                     RngStream& rng) {
  const Eigen::Index d = l.rows();
  Eigen::VectorXd g(d), z(d);
  double acc = 0.0;
  for (std::int64_t t = 0; t < draws; ++t) {
    for (Eigen::Index i = 0; i < d; ++i) g[i] = rng.standard_normal();
    z.noalias() = l * g;
    const bool up = (z.array() >= 0.0).all();
    const bool dn = (z.array() <= 0.0).all();
    acc += 0.5 * (static_cast<double>(up) + static_cast<double>(dn));
  }
  return acc;
}

}  // namespace

ChiBarWeights weights_monte_carlo(const HMatrix& hm, std::int64_t reps,
                                  std::uint64_t seed, int threads) {
  const Eigen::Index m = hm.h.rows();
  if (reps < 1) throw std::invalid_argument("weights_monte_carlo: reps must be >= 1");
  if (m > 20)
    throw std::invalid_argument("weights_monte_carlo: too many constraints to enumerate");
  if (threads <= 0) threads = default_thread_count();

  constexpr std::int64_t kBlockDraws = 8192;
  const std::int64_t nblocks = (reps + kBlockDraws - 1) / kBlockDraws;
  const std::uint32_t nsub = 1u << m;

  std::vector<SubsetFactors> factors(nsub);
  for (std::uint32_t s = 0; s < nsub; ++s) factors[s] = subset_factors(hm.h, s);

  // one work item per (subset, block); sums land in fixed slots so the final
  // reduction is identical for any thread count
  struct Item {
    std::uint32_t subset;
    std::int64_t block;
  };
  std::vector<Item> items;
  for (std::uint32_t s = 0; s < nsub; ++s) {
    if (factors[s].d1 < 2 && factors[s].d2 < 2) continue;
    for (std::int64_t b = 0; b < nblocks; ++b) items.push_back({s, b});
  }
  std::vector<double> sum1(items.size(), 0.0), sum2(items.size(), 0.0);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= items.size()) break;
      const Item it = items[idx];
      const SubsetFactors& f = factors[it.subset];
      const std::int64_t draws =
          std::min<std::int64_t>(kBlockDraws, reps - it.block * kBlockDraws);
      RngStream rng(seed, it.subset, static_cast<std::uint64_t>(it.block));
      if (f.d1 >= 2) sum1[idx] = orthant_block(f.l1, draws, rng);
      if (f.d2 >= 2) sum2[idx] = orthant_block(f.l2, draws, rng);
    }
  };
  if (threads == 1 || items.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nw = std::min<std::size_t>(threads, items.size());
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // dimension 0 orthants are certain, dimension 1 exactly 1/2; only higher
  // dimensions accumulate Monte Carlo mass
  std::vector<double> q1(nsub), q2(nsub);
  for (std::uint32_t s = 0; s < nsub; ++s) {
    q1[s] = factors[s].d1 == 0 ? 1.0 : (factors[s].d1 == 1 ? 0.5 : 0.0);
    q2[s] = factors[s].d2 == 0 ? 1.0 : (factors[s].d2 == 1 ? 0.5 : 0.0);
  }
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const auto& f = factors[items[idx].subset];
    if (f.d1 >= 2) q1[items[idx].subset] += sum1[idx] / static_cast<double>(reps);
    if (f.d2 >= 2) q2[items[idx].subset] += sum2[idx] / static_cast<double>(reps);
  }

  ChiBarWeights out;
  out.method = ChiBarWeights::Method::monte_carlo;
  out.mc_reps = reps;
  out.w = Eigen::VectorXd::Zero(m + 1);
  for (std::uint32_t s = 0; s < nsub; ++s) {
    int size = 0;
    for (Eigen::Index k = 0; k < m; ++k) size += (s >> k) & 1u;
    out.w[size] += q1[s] * q2[s];
  }
  out.w /= out.w.sum();
  return out;
}

double chibar_pvalue(double t, const ChiBarWeights& w) {
  if (!(t > 0.0)) return 1.0;
  const Eigen::Index J = w.w.size();
  double p = 0.0;
  for (Eigen::Index j = 0; j < J - 1; ++j)
    p += w.w[j] * chi_sq_survival(t, static_cast<int>(J - 1 - j));
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace lro
