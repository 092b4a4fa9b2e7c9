// Monte Carlo size/power study: the trend family of cell probabilities, the
// named sample-size scenarios, product-multinomial resampling with
// reproducible substreams, and the accuracy/efficiency summaries.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lro/stat_tests.hpp"

namespace lro {

// Row probabilities pi_{ij}(delta) = (1 + i (j-1) delta) / (3 (1 + i delta))
// for J = 3; delta = 0 is the null (both rows uniform), delta > 0 orders the
// rows by likelihood ratio.  For J = 2 the rows are (pi11, 1-pi11) and
// (pi21, 1-pi21).
Eigen::MatrixXd scenario_probs_j3(double delta);
Eigen::MatrixXd scenario_probs_j2(double pi11, double pi21);

struct Scenario {
  std::string name;  // "A".."G" or "custom"
  int n1 = 20;
  int n2 = 20;
  int J = 3;
  double delta = 0.0;          // J = 3 trend parameter
  double pi11 = 0.5;           // J = 2 cell probabilities
  double pi21 = 0.5;
  Eigen::MatrixXd probs() const;
};

// The named (n1, n2) pairs A..G at J = 3.
Scenario named_scenario(const std::string& name, double delta = 0.0);

struct PowerEstimate {
  // Rejection rates (p < alpha) keyed by test label: "T@<lambda>",
  // "S@<lambda>", "W1", "W2", and for J = 2 also "G2", "G2BAR", "G2TILDE".
  std::map<std::string, double> rejection_rate;
  std::int64_t reps = 0;
  std::int64_t failures = 0;  // solver failures (excluded, aborts > 0.1%)
  double alpha = 0.05;
};

struct SimulationOptions {
  std::int64_t reps = 10000;
  double alpha = 0.05;
  std::vector<double> lambdas;  // empty -> default grid
  std::uint64_t seed = 20260814;
  int threads = 1;  // <= 0: default_thread_count()
  // Called with the number of completed replications, every `progress_every`
  // (and once at the end); null disables progress reporting.
  std::function<void(std::int64_t)> progress;
  std::int64_t progress_every = 1000;
};

// Size/power under the scenario's product-multinomial model.  Replication r
// of the study draws row i from substream (seed, i, r), so results are
// independent of the thread count and block layout.
PowerEstimate estimate_size_power(const Scenario& scenario,
                                  const SimulationOptions& options);

// Liberal/conservative screen on the logit scale: a size estimate passes iff
// |logit(1 - size) - logit(1 - alpha)| <= e, boundaries inclusive.  With
// alpha = 0.05 and e = 0.35 the pass band is [0.0357, 0.0695].
bool dale_filter(double size, double alpha, double e = 0.35);
double dale_lower(double alpha, double e = 0.35);
double dale_upper(double alpha, double e = 0.35);

// rho = ((beta_T - alpha_T) - (beta_B - alpha_B)) / (beta_B - alpha_B): the
// adjusted-power gain of `test` over `baseline` between the null (alpha_*)
// and alternative (beta_*) runs.
double relative_efficiency(const PowerEstimate& null_run,
                           const PowerEstimate& alt_run,
                           const std::string& test, const std::string& baseline);

}  // namespace lro
