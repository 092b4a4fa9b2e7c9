// Command-line front end: analyze (one table end to end), simulate
// (size/power Monte Carlo), and weights (chi-bar mixture weights).
//
// Exit codes: 0 success, 1 malformed input (with a line/column diagnostic),
// 2 degenerate data, 3 solver failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lro/chibar.hpp"
#include "lro/estimation.hpp"
#include "lro/simulation.hpp"
#include "lro/stat_tests.hpp"
#include "lro/table.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw CLI::ValidationError("--lambda", "empty list");
  return out;
}

// "start:end:step" inclusive grid, or a plain comma list
std::vector<double> parse_lambda_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_lambda_list(text);
  double start = 0, end = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> start >> c1 >> end >> c2 >> step) || c1 != ':' || c2 != ':' ||
      step <= 0 || end < start)
    throw CLI::ValidationError("--lambda-grid", "expected start:end:step with step > 0");
  std::vector<double> out;
  for (double v = start; v <= end + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string lambda_label(double lambda) {
  std::ostringstream ss;
  ss << lambda;
  return ss.str();
}

lro::Table load_table(const std::string& path) {
  if (path == "-") return lro::read_table(std::cin);
  return lro::read_table_file(path);
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json solver_config(const lro::SolverOptions& s) {
  return {{"kkt_tol", s.kkt_tol},
          {"feas_tol", s.feas_tol},
          {"max_iter", s.max_iter},
          {"zero_cell_eps", s.zero_cell_eps}};
}

void print_config_header(std::ostream& os, const json& config) {
  for (const auto& [key, value] : config.items())
    os << "# " << key << " = " << (value.is_string() ? value.get<std::string>()
                                                     : value.dump())
       << "\n";
}

// ---------- analyze ----------

struct AnalyzeCli {
  std::string input;
  std::string lambda_list;
  std::string family = "both";
  std::string wilcoxon = "one";
  std::string weights = "closed";
  double mc_reps = 100000;
  std::uint64_t seed = 20260814;
  std::string format = "table";
};

int run_analyze(const AnalyzeCli& cli) {
  const lro::Table table = load_table(cli.input);

  lro::AnalyzeOptions opt;
  if (!cli.lambda_list.empty()) opt.lambdas = parse_lambda_list(cli.lambda_list);
  opt.family = cli.family == "t"   ? lro::Family::t_only
               : cli.family == "s" ? lro::Family::s_only
                                   : lro::Family::both;
  opt.force_mc_weights = cli.weights == "mc";
  opt.mc_reps = static_cast<std::int64_t>(cli.mc_reps);
  opt.seed = cli.seed;
  opt.threads = lro::default_thread_count();

  const lro::AnalysisResult res = lro::analyze(table, opt);
  const lro::WilcoxonResult wil = lro::wilcoxon_midrank(table);
  const bool show_t = opt.family != lro::Family::s_only;
  const bool show_s = opt.family != lro::Family::t_only;

  json config = {
      {"command", "analyze"},
      {"input", cli.input},
      {"lambda", opt.lambdas.empty() ? lro::default_lambda_grid() : opt.lambdas},
      {"family", cli.family},
      {"wilcoxon", cli.wilcoxon},
      {"weights", cli.weights},
      {"mc_reps", static_cast<std::int64_t>(cli.mc_reps)},
      {"seed", cli.seed},
      {"threads", opt.threads},
      {"solver", solver_config(opt.solver)},
  };

  if (cli.format == "json") {
    json out;
    out["config"] = config;
    out["table"] = mat_to_json(table.counts());
    out["fit"] = {
        {"theta_tilde", vec_to_json(res.restricted.theta)},
        {"p_tilde", vec_to_json(res.restricted.p)},
        {"p_null", vec_to_json(res.p_null)},
        {"loglik", res.restricted.loglik},
        {"active_set", res.restricted.active_set},
        {"kkt_multipliers", vec_to_json(res.restricted.kkt_multipliers)},
        {"iterations", res.restricted.iterations},
        {"converged", res.restricted.converged},
    };
    out["chibar_weights"] = {
        {"w", vec_to_json(res.weights.w)},
        {"method", res.weights.method == lro::ChiBarWeights::Method::closed_form
                       ? "closed_form"
                       : "monte_carlo"},
        {"mc_reps", res.weights.mc_reps},
    };
    json reports = json::array();
    for (const auto& r : res.reports) {
      json jr = {{"lambda", r.lambda}};
      if (show_t) {
        jr["t_stat"] = r.t_stat;
        jr["t_pvalue"] = r.t_pvalue;
      }
      if (show_s) {
        jr["s_stat"] = r.s_stat;
        jr["s_pvalue"] = r.s_pvalue;
      }
      reports.push_back(jr);
    }
    out["reports"] = reports;
    if (cli.wilcoxon != "none") {
      json jw = {{"w", wil.w_stat},           {"mean", wil.mean},
                 {"variance", wil.variance},  {"z", wil.z},
                 {"degenerate", wil.degenerate}};
      if (cli.wilcoxon != "two") jw["pvalue_one_sided"] = wil.pvalue_one_sided;
      if (cli.wilcoxon != "one") jw["pvalue_two_sided"] = wil.pvalue_two_sided;
      out["wilcoxon"] = jw;
    }
    if (table.J() == 2) {
      const lro::TwoByTwoResult tt = lro::two_by_two_suite(table);
      out["two_by_two"] = {
          {"g2", tt.g2},           {"g2_pvalue", tt.g2_pvalue},
          {"g2bar", tt.g2bar},     {"g2bar_pvalue", tt.g2bar_pvalue},
          {"g2tilde", tt.g2tilde}, {"g2tilde_pvalue", tt.g2tilde_pvalue},
      };
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  // human-readable report
  print_config_header(std::cout, config);
  std::cout << "table: 2 x " << table.J() << ", n1 = " << table.n1()
            << ", n2 = " << table.n2() << "\n";
  const Eigen::IOFormat fmt(6, Eigen::DontAlignCols, " ", " ");
  std::cout << "theta_tilde: " << res.restricted.theta.transpose().format(fmt)
            << "\n";
  std::cout << "p_tilde:     " << res.restricted.p.transpose().format(fmt) << "\n";
  std::cout << "p_null:      " << res.p_null.transpose().format(fmt) << "\n";
  std::cout << "loglik = " << res.restricted.loglik << ", active set = {";
  for (std::size_t i = 0; i < res.restricted.active_set.size(); ++i)
    std::cout << (i ? "," : "") << res.restricted.active_set[i];
  std::cout << "}, iterations = " << res.restricted.iterations << "\n";
  std::cout << "chi-bar weights ("
            << (res.weights.method == lro::ChiBarWeights::Method::closed_form
                    ? "closed form"
                    : "monte carlo")
            << "): " << res.weights.w.transpose().format(fmt) << "\n\n";

  const int wcol = 10;
  auto cell = [&](double v) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(4);
    ss << v;
    std::string s = ss.str();
    return std::string(wcol > (int)s.size() ? wcol - s.size() : 1, ' ') + s;
  };
  std::cout << std::string(12, ' ');
  for (const auto& r : res.reports) {
    std::string h = "l=" + lambda_label(r.lambda);
    std::cout << std::string(wcol > (int)h.size() ? wcol - h.size() : 1, ' ') << h;
  }
  std::cout << "\n";
  if (show_t) {
    std::cout << "T           ";
    for (const auto& r : res.reports) std::cout << cell(r.t_stat);
    std::cout << "\np-value(T)  ";
    for (const auto& r : res.reports) std::cout << cell(r.t_pvalue);
    std::cout << "\n";
  }
  if (show_s) {
    std::cout << "S           ";
    for (const auto& r : res.reports) std::cout << cell(r.s_stat);
    std::cout << "\np-value(S)  ";
    for (const auto& r : res.reports) std::cout << cell(r.s_pvalue);
    std::cout << "\n";
  }
  std::cout << "\n";
  if (cli.wilcoxon != "none") {
    std::cout << "W = " << wil.w_stat << ", E(W) = " << wil.mean
              << ", sd(W) = " << std::sqrt(std::max(0.0, wil.variance))
              << ", z = " << wil.z << "\n";
    if (wil.degenerate) {
      std::cout << "wilcoxon: degenerate (all mass in one category)\n";
    } else {
      if (cli.wilcoxon != "two")
        std::cout << "one-sided p(W) = " << wil.pvalue_one_sided << "\n";
      if (cli.wilcoxon != "one")
        std::cout << "two-sided p(W) = " << wil.pvalue_two_sided << "\n";
    }
  }
  if (table.J() == 2) {
    const lro::TwoByTwoResult tt = lro::two_by_two_suite(table);
    std::cout << "2x2 suite: G2 = " << tt.g2 << " (p = " << tt.g2_pvalue
              << "), G2bar = " << tt.g2bar << " (p = " << tt.g2bar_pvalue
              << "), G2tilde = " << tt.g2tilde << " (p = " << tt.g2tilde_pvalue
              << ")\n";
  }
  return 0;
}

// ---------- simulate ----------

struct SimulateCli {
  std::string scenario = "custom";
  int n1 = 20, n2 = 20, j = 3;
  double delta = 0.0;
  double pi11 = 0.5, pi21 = 0.5;
  double reps = 10000;
  double alpha = 0.05;
  std::string lambda_grid;
  std::uint64_t seed = 20260814;
  std::string out_path;
};

int run_simulate(const SimulateCli& cli) {
  lro::Scenario sc;
  if (cli.scenario == "custom") {
    sc.name = "custom";
    sc.n1 = cli.n1;
    sc.n2 = cli.n2;
    sc.J = cli.j;
    sc.delta = cli.delta;
    sc.pi11 = cli.pi11;
    sc.pi21 = cli.pi21;
  } else {
    sc = lro::named_scenario(cli.scenario, cli.delta);
  }

  lro::SimulationOptions opt;
  opt.reps = static_cast<std::int64_t>(cli.reps);
  opt.alpha = cli.alpha;
  if (!cli.lambda_grid.empty()) opt.lambdas = parse_lambda_grid(cli.lambda_grid);
  opt.seed = cli.seed;
  opt.threads = lro::default_thread_count();

  std::ofstream file;
  if (!cli.out_path.empty()) {
    file.open(cli.out_path);
    if (!file) throw std::runtime_error("cannot open output file: " + cli.out_path);
  }
  std::ostream& os = cli.out_path.empty() ? std::cout : file;

  json config = {
      {"record", "config"},
      {"command", "simulate"},
      {"scenario", sc.name},
      {"n1", sc.n1},
      {"n2", sc.n2},
      {"j", sc.J},
      {"delta", sc.delta},
      {"reps", opt.reps},
      {"alpha", opt.alpha},
      {"lambda",
       opt.lambdas.empty() ? lro::default_lambda_grid() : opt.lambdas},
      {"seed", opt.seed},
      {"threads", opt.threads},
      {"solver", solver_config(lro::SolverOptions{})},
  };
  if (sc.J == 2) {
    config["pi11"] = sc.pi11;
    config["pi21"] = sc.pi21;
  }
  os << config.dump() << "\n";

  const bool power_run = sc.delta > 0.0 || (sc.J == 2 && sc.pi11 != sc.pi21);

  auto with_progress = [&](const char* tag) {
    lro::SimulationOptions o = opt;
    const std::int64_t total = o.reps;
    o.progress = [tag, total](std::int64_t done) {
      std::cerr << "# " << tag << " " << done << "/" << total << "\n";
    };
    return o;
  };

  // size run: the scenario at the null (delta = 0 / equal rows)
  lro::Scenario null_sc = sc;
  null_sc.delta = 0.0;
  null_sc.pi21 = null_sc.pi11;
  const lro::PowerEstimate size_est =
      lro::estimate_size_power(null_sc, with_progress("size-run"));
  const lro::PowerEstimate* power_est = nullptr;
  lro::PowerEstimate power_store;
  if (power_run) {
    power_store = lro::estimate_size_power(sc, with_progress("power-run"));
    power_est = &power_store;
  }

  const auto se = [](double rate, std::int64_t reps) {
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
  };
  for (const auto& [label, alpha_hat] : size_est.rejection_rate) {
    json rec = {{"record", "estimate"},
                {"statistic", label},
                {"alpha_hat", alpha_hat},
                {"alpha_se", se(alpha_hat, size_est.reps - size_est.failures)},
                {"dale_pass",
                 alpha_hat > 0.0 && alpha_hat < 1.0
                     ? json(lro::dale_filter(alpha_hat, opt.alpha))
                     : json(false)},
                {"reps", size_est.reps},
                {"failures", size_est.failures}};
    if (label.size() > 2 && label[1] == '@')
      rec["lambda"] = std::stod(label.substr(2));
    if (power_est != nullptr) {
      const double beta_hat = power_est->rejection_rate.at(label);
      rec["beta_hat"] = beta_hat;
      rec["beta_se"] = se(beta_hat, power_est->reps - power_est->failures);
      rec["power_failures"] = power_est->failures;
      for (const auto& [key, base] :
           {std::pair<const char*, const char*>{"rho", "T@0"},
            {"rho_star", "S@1"}}) {
        if (size_est.rejection_rate.count(base) == 0) continue;
        try {
          rec[key] = lro::relative_efficiency(size_est, *power_est, label, base);
        } catch (const std::domain_error&) {
          rec[key] = nullptr;
        }
      }
    }
    os << rec.dump() << "\n";
  }
  return 0;
}

// ---------- weights ----------

struct WeightsCli {
  std::string input;
  std::string pi_list;
  std::string nu_list;
  std::string method = "closed";
  double mc_reps = 1000000;
  std::uint64_t seed = 20260814;
};

int run_weights(const WeightsCli& cli) {
  lro::HMatrix hm;
  json source;
  if (!cli.pi_list.empty()) {
    const std::vector<double> pis = parse_lambda_list(cli.pi_list);
    std::vector<double> nus{0.5, 0.5};
    if (!cli.nu_list.empty()) nus = parse_lambda_list(cli.nu_list);
    if (nus.size() != 2)
      throw CLI::ValidationError("--nu", "expected two sampling fractions");
    Eigen::VectorXd pi(static_cast<Eigen::Index>(pis.size()));
    for (std::size_t i = 0; i < pis.size(); ++i)
      pi[static_cast<Eigen::Index>(i)] = pis[i];
    hm = lro::h_matrix(pi, nus[0], nus[1]);
    source = {{"pi", pis}, {"nu", nus}};
  } else if (!cli.input.empty()) {
    const lro::Table table = load_table(cli.input);
    hm = lro::h_matrix_from_table(table);
    source = {{"input", cli.input}};
  } else {
    throw CLI::ValidationError("weights", "need a table file or --pi/--nu");
  }

  const int threads = lro::default_thread_count();
  const bool closed_possible = hm.h.rows() <= 3;
  const bool use_closed = cli.method == "closed" && closed_possible;
  lro::ChiBarWeights w;
  if (use_closed) {
    w = lro::weights_closed_form(hm);
  } else {
    w = lro::weights_monte_carlo(hm, static_cast<std::int64_t>(cli.mc_reps),
                                 cli.seed, threads);
  }

  json out = {
      {"config",
       {{"command", "weights"},
        {"method", cli.method},
        {"mc_reps", static_cast<std::int64_t>(cli.mc_reps)},
        {"seed", cli.seed},
        {"threads", threads},
        {"source", source}}},
      {"pi", vec_to_json(hm.pi)},
      {"nu", {hm.nu1, hm.nu2}},
      {"h", mat_to_json(hm.h)},
      {"weights", vec_to_json(w.w)},
      {"method_used", w.method == lro::ChiBarWeights::Method::closed_form
                          ? "closed_form"
                          : "monte_carlo"},
      {"mc_reps_used", w.mc_reps},
  };
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"likelihood-ratio-order tests for 2 x J contingency tables"};
  app.require_subcommand(1);

  AnalyzeCli ac;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "test one table (CSV or JSON; '-' reads stdin)");
  analyze->add_option("input", ac.input, "table file")->required();
  analyze->add_option("--lambda", ac.lambda_list, "comma list of lambda values");
  analyze->add_option("--family", ac.family, "t|s|both")
      ->check(CLI::IsMember({"t", "s", "both"}));
  analyze->add_option("--wilcoxon", ac.wilcoxon, "one|two|both|none")
      ->check(CLI::IsMember({"one", "two", "both", "none"}));
  analyze->add_option("--weights", ac.weights, "closed|mc")
      ->check(CLI::IsMember({"closed", "mc"}));
  analyze->add_option("--mc-reps", ac.mc_reps, "Monte Carlo draws for weights");
  analyze->add_option("--seed", ac.seed, "RNG seed");
  analyze->add_option("--format", ac.format, "json|table")
      ->check(CLI::IsMember({"json", "table"}));

  SimulateCli sc;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo size/power study");
  simulate->add_option("--scenario", sc.scenario, "A..G or custom")
      ->check(CLI::IsMember({"A", "B", "C", "D", "E", "F", "G", "custom"}));
  simulate->add_option("--n1", sc.n1, "row-1 sample size (custom)");
  simulate->add_option("--n2", sc.n2, "row-2 sample size (custom)");
  simulate->add_option("--j", sc.j, "category count, 2 or 3 (custom)")
      ->check(CLI::IsMember({2, 3}));
  simulate->add_option("--delta", sc.delta, "trend parameter (J=3)");
  simulate->add_option("--pi11", sc.pi11, "row-1 first-cell probability (J=2)");
  simulate->add_option("--pi21", sc.pi21, "row-2 first-cell probability (J=2)");
  simulate->add_option("--reps", sc.reps, "replications");
  simulate->add_option("--alpha", sc.alpha, "nominal level");
  simulate->add_option("--lambda-grid", sc.lambda_grid,
                       "start:end:step or comma list");
  simulate->add_option("--seed", sc.seed, "RNG seed");
  simulate->add_option("--out", sc.out_path, "output file (JSON lines)");

  WeightsCli wc;
  CLI::App* weights =
      app.add_subcommand("weights", "chi-bar-squared mixture weights");
  weights->add_option("input", wc.input, "table file");
  weights->add_option("--pi", wc.pi_list, "pooled category probabilities");
  weights->add_option("--nu", wc.nu_list, "sampling fractions nu1,nu2");
  weights->add_option("--method", wc.method, "closed|mc")
      ->check(CLI::IsMember({"closed", "mc"}));
  weights->add_option("--mc-reps", wc.mc_reps, "Monte Carlo draws");
  weights->add_option("--seed", wc.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return run_analyze(ac);
    if (simulate->parsed()) return run_simulate(sc);
    if (weights->parsed()) return run_weights(wc);
  } catch (const lro::parse_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const lro::degenerate_data_error& ex) {
    std::cerr << "error: degenerate data: " << ex.what() << "\n";
    return 2;
  } catch (const lro::solver_error& ex) {
    std::cerr << "error: solver failure: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
