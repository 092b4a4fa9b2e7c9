#include "lro/simulation.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lro/chibar.hpp"
#include "lro/estimation.hpp"
#include "lro/rng.hpp"

namespace lro {

Eigen::MatrixXd scenario_probs_j3(double delta) {
  if (delta < 0.0)
    throw std::invalid_argument("scenario_probs_j3: delta must be >= 0");
  Eigen::MatrixXd p(2, 3);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 3; ++j)
      p(i - 1, j - 1) = (1.0 + i * (j - 1) * delta) / (3.0 * (1.0 + i * delta));
  return p;
}

Eigen::MatrixXd scenario_probs_j2(double pi11, double pi21) {
  if (!(pi11 > 0.0 && pi11 < 1.0) || !(pi21 > 0.0 && pi21 < 1.0))
    throw std::invalid_argument("scenario_probs_j2: cell probabilities must be in (0,1)");
  Eigen::MatrixXd p(2, 2);
  p << pi11, 1.0 - pi11, pi21, 1.0 - pi21;
  return p;
}

Eigen::MatrixXd Scenario::probs() const {
  if (J == 3) return scenario_probs_j3(delta);
  if (J == 2) return scenario_probs_j2(pi11, pi21);
  throw std::invalid_argument("Scenario: only J in {2,3} designs are defined");
}

Scenario named_scenario(const std::string& name, double delta) {
  static const std::map<std::string, std::pair<int, int>> sizes = {
      {"A", {20, 4}},  {"B", {20, 10}}, {"C", {20, 16}}, {"D", {20, 20}},
      {"E", {16, 20}}, {"F", {10, 20}}, {"G", {4, 20}}};
  const auto it = sizes.find(name);
  if (it == sizes.end())
    throw std::invalid_argument("named_scenario: expected a name in A..G");
  Scenario sc;
  sc.name = name;
  sc.n1 = it->second.first;
  sc.n2 = it->second.second;
  sc.J = 3;
  sc.delta = delta;
  return sc;
}

namespace {

std::string lambda_label(double lambda) {
  std::ostringstream ss;
  ss << lambda;
  return ss.str();
}

}  // namespace

PowerEstimate estimate_size_power(const Scenario& scenario,
                                  const SimulationOptions& options) {
  if (options.reps < 1)
    throw std::invalid_argument("estimate_size_power: reps must be >= 1");
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw std::invalid_argument("estimate_size_power: alpha must be in (0,1)");

  const Eigen::MatrixXd probs = scenario.probs();
  const Eigen::VectorXd p1 = probs.row(0).transpose();
  const Eigen::VectorXd p2 = probs.row(1).transpose();
  const std::vector<double> lambdas =
      options.lambdas.empty() ? default_lambda_grid() : options.lambdas;

  std::vector<std::string> labels;
  for (const double l : lambdas) labels.push_back("T@" + lambda_label(l));
  for (const double l : lambdas) labels.push_back("S@" + lambda_label(l));
  labels.emplace_back("W1");
  labels.emplace_back("W2");
  if (scenario.J == 2) {
    labels.emplace_back("G2");
    labels.emplace_back("G2BAR");
    labels.emplace_back("G2TILDE");
  }

  const SolverOptions solver;
  const double alpha = options.alpha;
  const Eigen::Index nl = static_cast<Eigen::Index>(lambdas.size());

  std::vector<std::int64_t> hits(labels.size(), 0);
  std::int64_t failures = 0;
  std::mutex merge_mutex;
  std::atomic<std::int64_t> next_block{0}, done{0};

  constexpr std::int64_t kBlock = 256;
  const std::int64_t nblocks = (options.reps + kBlock - 1) / kBlock;

  auto simulate_one = [&](std::int64_t rep, std::vector<std::int64_t>& local,
                          std::int64_t& local_failures) {
    RngStream s1(options.seed, 0, static_cast<std::uint64_t>(rep));
    RngStream s2(options.seed, 1, static_cast<std::uint64_t>(rep));
    Eigen::MatrixXd counts(2, scenario.J);
    counts.row(0) = multinomial_sample(p1, scenario.n1, s1).transpose();
    counts.row(1) = multinomial_sample(p2, scenario.n2, s2).transpose();
    const Table table{counts};

    const RestrictedFit restricted = mle_restricted(table, solver);
    if (!restricted.converged) {
      ++local_failures;
      return;
    }
    const RestrictedFit null_fit = mle_null(table, solver);
    const ChiBarWeights weights =
        weights_closed_form(h_matrix_from_table(table, solver.zero_cell_eps));

    const Table adj = table.epsilon_adjusted(solver.zero_cell_eps);
    const Eigen::VectorXd cflat = adj.flatten();
    const Eigen::VectorXd pbar = adj.empirical_probs();
    const double n = adj.n();

    for (Eigen::Index k = 0; k < nl; ++k) {
      const double l = lambdas[static_cast<std::size_t>(k)];
      const double t = t_statistic(pbar, null_fit.p, restricted.p, n, l, cflat);
      if (chibar_pvalue(t, weights) < alpha) ++local[k];
      const double s = s_statistic(null_fit.p, restricted.p, n, l);
      if (chibar_pvalue(s, weights) < alpha) ++local[nl + k];
    }

    const WilcoxonResult wil = wilcoxon_midrank(table);
    if (!wil.degenerate) {
      if (wil.pvalue_one_sided < alpha) ++local[2 * nl];
      if (wil.pvalue_two_sided < alpha) ++local[2 * nl + 1];
    }
    if (scenario.J == 2) {
      const TwoByTwoResult tt = two_by_two_suite(table);
      if (tt.g2_pvalue < alpha) ++local[2 * nl + 2];
      if (tt.g2bar_pvalue < alpha) ++local[2 * nl + 3];
      if (tt.g2tilde_pvalue < alpha) ++local[2 * nl + 4];
    }
  };

  auto worker = [&]() {
    std::vector<std::int64_t> local(labels.size());
    for (;;) {
      const std::int64_t b = next_block.fetch_add(1);
      if (b >= nblocks) break;
      const std::int64_t lo = b * kBlock;
      const std::int64_t hi = std::min<std::int64_t>(options.reps, lo + kBlock);
      std::fill(local.begin(), local.end(), 0);
      std::int64_t local_failures = 0;
      for (std::int64_t r = lo; r < hi; ++r)
        simulate_one(r, local, local_failures);

      std::lock_guard<std::mutex> lock(merge_mutex);
      for (std::size_t i = 0; i < labels.size(); ++i) hits[i] += local[i];
      failures += local_failures;
      const std::int64_t before = done.load();
      const std::int64_t now = before + (hi - lo);
      done.store(now);
      if (options.progress &&
          (now / options.progress_every > before / options.progress_every ||
           now == options.reps))
        options.progress(now);
    }
  };

  int threads = options.threads <= 0 ? default_thread_count() : options.threads;
  threads = static_cast<int>(
      std::min<std::int64_t>(threads, std::max<std::int64_t>(1, nblocks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (failures * 1000 > options.reps)
    throw solver_error("estimate_size_power: more than 0.1% of fits failed (" +
                       std::to_string(failures) + "/" +
                       std::to_string(options.reps) + ")");

  PowerEstimate out;
  out.reps = options.reps;
  out.failures = failures;
  out.alpha = alpha;
  const double denom = static_cast<double>(options.reps - failures);
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.rejection_rate[labels[i]] = static_cast<double>(hits[i]) / denom;
  return out;
}

// The reference band is published at four decimals with inclusive boundaries,
// so the exact logit bounds are widened to that precision.
double dale_lower(double alpha, double e) {
  const double exact = 1.0 / (1.0 + (1.0 - alpha) / alpha * std::exp(e));
  return std::floor(exact * 1e4) / 1e4;
}

double dale_upper(double alpha, double e) {
  const double exact = 1.0 / (1.0 + (1.0 - alpha) / alpha * std::exp(-e));
  return std::ceil(exact * 1e4) / 1e4;
}

bool dale_filter(double size, double alpha, double e) {
  if (!(size > 0.0 && size < 1.0) || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("dale_filter: rates must be in (0,1)");
  return size >= dale_lower(alpha, e) && size <= dale_upper(alpha, e);
}

double relative_efficiency(const PowerEstimate& null_run,
                           const PowerEstimate& alt_run, const std::string& test,
                           const std::string& baseline) {
  const double at = null_run.rejection_rate.at(test);
  const double bt = alt_run.rejection_rate.at(test);
  const double ab = null_run.rejection_rate.at(baseline);
  const double bb = alt_run.rejection_rate.at(baseline);
  const double denom = bb - ab;
  if (denom == 0.0)
    throw std::domain_error("relative_efficiency: baseline power gain is zero");
  return ((bt - at) - denom) / denom;
}

}  // namespace lro
