#include <cmath>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "lro/divergence.hpp"
#include "lro/stat_tests.hpp"

using lro::analyze;
using lro::AnalysisResult;
using lro::AnalyzeOptions;
using lro::default_lambda_grid;
using lro::Family;
using lro::s_statistic;
using lro::t_statistic;
using lro::Table;
using lro::TwoByTwoResult;
using lro::two_by_two_suite;
using lro::wilcoxon_midrank;
using lro::WilcoxonResult;

namespace {

Table make_table(std::initializer_list<double> row1,
                 std::initializer_list<double> row2) {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(row1.size()));
  Eigen::Index j = 0;
  for (double v : row1) m(0, j++) = v;
  j = 0;
  for (double v : row2) m(1, j++) = v;
  return Table(m);
}

}  // namespace

TEST_CASE("case-study table: full reference grid at four decimals") {
  const AnalysisResult res = analyze(case_study_table());
  REQUIRE(res.reports.size() == 9);
  const double grid[9] = {-1.5, -1.0, -0.5, 0.0, 2.0 / 3.0, 1.0, 1.5, 2.0, 3.0};
  const double T[9] = {6.5323, 6.3215, 6.1562, 6.0323, 5.9261,
                       5.8965, 5.8803, 5.8965, 6.0244};
  const double pT[9] = {0.0175, 0.0194, 0.0211, 0.0225, 0.0238,
                        0.0241, 0.0243, 0.0241, 0.0226};
  const double S[9] = {6.5277, 6.3189, 6.1551, 6.0323, 5.9270,
                       5.8977, 5.8815, 5.8977, 6.0244};
  const double pS[9] = {0.0175, 0.0195, 0.0212, 0.0225, 0.0238,
                        0.0241, 0.0243, 0.0241, 0.0226};
  for (int i = 0; i < 9; ++i) {
    INFO("lambda = ", grid[i]);
    CHECK(res.reports[i].lambda == grid[i]);
    CHECK_NEAR(res.reports[i].t_stat, T[i], 1e-3);
    CHECK_NEAR(res.reports[i].t_pvalue, pT[i], 5e-4);
    CHECK_NEAR(res.reports[i].s_stat, S[i], 1e-3);
    CHECK_NEAR(res.reports[i].s_pvalue, pS[i], 5e-4);
  }
}

TEST_CASE("case-study table: high-precision anchors") {
  AnalyzeOptions opt;
  opt.lambdas = {0.0, -1.5, 1.0};
  const AnalysisResult res = analyze(case_study_table(), opt);
  // lambda = 0
  CHECK_NEAR(res.reports[0].t_stat, 6.032332304501179, 1e-9);
  CHECK_NEAR(res.reports[0].t_pvalue, 0.022541933029401, 1e-9);
  CHECK_NEAR(res.reports[0].s_stat, 6.032332304501178, 1e-9);
  CHECK_NEAR(res.reports[0].s_pvalue, 0.022541933029401, 1e-9);
  // lambda = -1.5
  CHECK_NEAR(res.reports[1].t_stat, 6.532279900663795, 1e-9);
  CHECK_NEAR(res.reports[1].t_pvalue, 0.017498979254094, 1e-9);
  CHECK_NEAR(res.reports[1].s_stat, 6.527747282947681, 1e-9);
  CHECK_NEAR(res.reports[1].s_pvalue, 0.017539146709398, 1e-9);
  // lambda = 1
  CHECK_NEAR(res.reports[2].t_stat, 5.896525627794976, 1e-9);
  CHECK_NEAR(res.reports[2].t_pvalue, 0.024150245821822, 1e-9);
  CHECK_NEAR(res.reports[2].s_stat, 5.897678611674550, 1e-9);
  CHECK_NEAR(res.reports[2].s_pvalue, 0.024136113629491, 1e-9);
}

TEST_CASE("default grid and family routing") {
  CHECK(default_lambda_grid() ==
        std::vector<double>{-1.5, -1.0, -0.5, 0.0, 2.0 / 3.0, 1.0, 1.5, 2.0, 3.0});

  AnalyzeOptions opt;
  opt.lambdas = {0.5};
  opt.family = Family::t_only;
  const AnalysisResult t_only = analyze(case_study_table(), opt);
  CHECK(t_only.reports[0].t_stat > 0.0);
  CHECK(t_only.reports[0].s_stat == 0.0);  // untouched default
  CHECK(t_only.reports[0].s_pvalue == 1.0);

  opt.family = Family::s_only;
  const AnalysisResult s_only = analyze(case_study_table(), opt);
  CHECK(s_only.reports[0].s_stat > 0.0);
  CHECK(s_only.reports[0].t_stat == 0.0);
}

TEST_CASE("the two families coincide at lambda zero") {
  for (int J : {2, 3, 4}) {
    for (int rep = 0; rep < 8; ++rep) {
      const Table t = random_table(2024, static_cast<std::uint64_t>(J), rep, J);
      AnalyzeOptions opt;
      opt.lambdas = {0.0};
      const AnalysisResult res = analyze(t, opt);
      INFO("J = ", J, ", rep = ", rep);
      CHECK_NEAR(res.reports[0].t_stat, res.reports[0].s_stat,
                 1e-10 * (1.0 + t.n()));
    }
  }
}

TEST_CASE("statistics are continuous through the limit parameters") {
  for (int rep = 0; rep < 5; ++rep) {
    const Table t = random_table(88, 3, rep, 3, 30, 1);
    const Table adj = t.epsilon_adjusted();
    const Eigen::VectorXd counts = adj.flatten();
    const Eigen::VectorXd pbar = adj.empirical_probs();
    const double n = adj.n();
    const AnalysisResult res = analyze(t);
    const Eigen::VectorXd& ph = res.p_null;
    const Eigen::VectorXd& pt = res.restricted.p;
    for (double l0 : {0.0, -1.0}) {
      const double base = t_statistic(pbar, ph, pt, n, l0, counts);
      CHECK_NEAR(t_statistic(pbar, ph, pt, n, l0 + 1e-6, counts), base, 1e-4);
      CHECK_NEAR(t_statistic(pbar, ph, pt, n, l0 - 1e-6, counts), base, 1e-4);
      const double sbase = s_statistic(ph, pt, n, l0);
      CHECK_NEAR(s_statistic(ph, pt, n, l0 + 1e-6), sbase, 1e-4);
      CHECK_NEAR(s_statistic(ph, pt, n, l0 - 1e-6), sbase, 1e-4);
    }
    // the -1/2 member is four times the squared Hellinger distance, scaled
    CHECK_NEAR(s_statistic(ph, pt, n, -0.5),
               4.0 * n * lro::hellinger_sq(pt, ph), 1e-10);
  }
}

TEST_CASE("rank-sum baseline on the case-study table") {
  const WilcoxonResult w = wilcoxon_midrank(case_study_table());
  CHECK(w.w_stat == 875.0);
  CHECK(w.mean == 32.0 * 65.0 / 2.0);
  CHECK_FALSE(w.degenerate);
  CHECK_NEAR(w.z, -2.292537259354661, 1e-12);
  CHECK_NEAR(w.pvalue_one_sided, 0.01093733003875496, 1e-12);
  CHECK_NEAR(w.pvalue_one_sided, 0.010937, 5e-7);
  CHECK_NEAR(w.pvalue_two_sided, 2.0 * 0.01093733003875496, 1e-12);
}

TEST_CASE("rank-sum tie correction on a hand-checked table") {
  const WilcoxonResult w = wilcoxon_midrank(make_table({3, 1}, {1, 3}));
  // mid-ranks 2.5 and 6.5: W = 3(2.5) + 1(6.5) = 14, E(W) = 18, Var = 64/7
  CHECK(w.w_stat == 14.0);
  CHECK(w.mean == 18.0);
  CHECK_NEAR(w.variance, 64.0 / 7.0, 1e-12);
  CHECK_NEAR(w.z, -1.322875655532295, 1e-12);
  CHECK_NEAR(w.pvalue_one_sided, 0.092938366182938, 1e-12);
}

TEST_CASE("rank-sum degenerates when a single category holds all mass") {
  const WilcoxonResult w = wilcoxon_midrank(make_table({0, 3}, {0, 4}));
  CHECK(w.degenerate);
  CHECK(w.variance <= 0.0);
  CHECK(w.pvalue_one_sided == 1.0);
  CHECK(w.pvalue_two_sided == 1.0);
}

TEST_CASE("closed-form 2x2 suite covers all branches") {
  // row 1 leans toward the first category: all three reject-side statistics
  const TwoByTwoResult up = two_by_two_suite(make_table({8, 2}, {3, 7}));
  CHECK_NEAR(up.g2, 5.300218036681910, 1e-12);
  CHECK_NEAR(up.g2_pvalue, 0.010661377540929, 1e-12);
  CHECK_NEAR(up.g2bar, 5.300218036681910, 1e-12);
  CHECK_NEAR(up.g2bar_pvalue, 0.021322755081858, 1e-12);
  CHECK_NEAR(up.g2tilde, 5.300218036681910, 1e-12);
  CHECK_NEAR(up.g2tilde_pvalue, 0.010661377540929, 1e-12);

  // row 1 leans the other way: one-sided statistics collapse
  const TwoByTwoResult dn = two_by_two_suite(make_table({2, 8}, {7, 3}));
  CHECK(dn.g2 == 0.0);
  CHECK(dn.g2_pvalue == 1.0);
  CHECK_NEAR(dn.g2bar, 5.300218036681910, 1e-12);
  CHECK_NEAR(dn.g2bar_pvalue, 0.021322755081858, 1e-12);
  CHECK(dn.g2tilde == 0.0);
  CHECK(dn.g2tilde_pvalue == 1.0);

  // exact balance: the composite-null branch keeps the boundary p of 1/2
  const TwoByTwoResult eq = two_by_two_suite(make_table({5, 5}, {5, 5}));
  CHECK(eq.g2 == 0.0);
  CHECK(eq.g2_pvalue == 1.0);
  CHECK(eq.g2bar == 0.0);
  CHECK(eq.g2bar_pvalue == 1.0);
  CHECK(eq.g2tilde == 0.0);
  CHECK(eq.g2tilde_pvalue == 0.5);

  CHECK_THROWS_AS(two_by_two_suite(make_table({1, 2, 3}, {3, 2, 1})),
                  std::invalid_argument);
}

TEST_CASE("one-sided p is half the two-sided p on the rejecting branch") {
  for (int rep = 0; rep < 20; ++rep) {
    const Table t = random_table(606, 2, rep, 2, 20, 1);
    const TwoByTwoResult r = two_by_two_suite(t);
    if (t.counts()(0, 0) / t.n1() > t.counts()(1, 0) / t.n2())
      CHECK_NEAR(r.g2_pvalue, 0.5 * r.g2bar_pvalue, 1e-14);
    else
      CHECK(r.g2_pvalue == 1.0);
  }
}

TEST_CASE("analysis runs under forced monte carlo weights, reproducibly") {
  AnalyzeOptions opt;
  opt.lambdas = {0.0};
  opt.force_mc_weights = true;
  opt.mc_reps = 50000;
  opt.seed = 5;
  opt.threads = 2;
  const AnalysisResult a = analyze(case_study_table(), opt);
  const AnalysisResult b = analyze(case_study_table(), opt);
  CHECK(a.weights.method == lro::ChiBarWeights::Method::monte_carlo);
  CHECK((a.weights.w.array() == b.weights.w.array()).all());
  CHECK(a.reports[0].t_pvalue == b.reports[0].t_pvalue);
  // the Monte Carlo mixture prices close to the closed form
  const AnalysisResult closed = analyze(case_study_table());
  CHECK_NEAR(a.reports[0].t_pvalue, closed.reports[3].t_pvalue, 2e-3);
}
