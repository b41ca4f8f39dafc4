//
// Copyright 2026 The dpfourier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// dpfourier: fit, sample, generate densities and run experiment sweeps.
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <dpfourier/config.hpp>

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dpfourier;

namespace {

std::string
dump(const nlohmann::json& j)
{
  return j.dump(2) + "\n";
}

void
write_output(const std::string& path, const std::string& text)
{
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

struct FitArgs
{
  std::string data;
  std::string out;
  std::string trace;
  std::optional<double> rho;
  std::optional<int> cutoff;
  std::optional<double> beta;
  std::string mode = "fixed";
  std::string rule = "adaptive";
  std::uint64_t seed = 0;
  double C = 1.0;
  double a = 1.0;
  double eps = 0.5;
  double L = 2.0;
  bool theory = false;
  std::vector<int> grid;
};

int
cmd_fit(const FitArgs& args)
{
  const PointSet data = read_points_csv(fs::path(args.data));
  Rng rng = make_rng(args.seed, 0);
  std::optional<PrivacyBudget> budget;
  if (args.rho)
    budget = PrivacyBudget(*args.rho);

  nlohmann::json out;
  BudgetLedger ledger = budget ? BudgetLedger(*budget) : BudgetLedger();
  if (args.mode == "lepskii" || args.mode == "penalized-bias") {
    if (!budget)
      throw UsageError("--mode " + args.mode + " needs --rho");
    if (args.cutoff || args.beta)
      throw UsageError("--M and --beta do not apply to adaptive modes");
    std::pair<ProjectionEstimate, SelectionTrace> res;
    if (args.mode == "lepskii") {
      auto cfg = args.theory
                   ? PenaltyConfig::theory(data.dim(), args.L, args.eps, args.a)
                   : PenaltyConfig::practical(args.C, args.a, args.eps);
      res = lepskii_select(data, *budget, cfg, rng);
    } else {
      const auto grid =
        args.grid.empty() ? dyadic_cutoff_grid(data.size(), data.dim())
                          : args.grid;
      res = penalized_bias_select(data, *budget, grid, rng);
    }
    out = res.first;
    out["selection"] = res.second;
    ledger = res.second.ledger;
    if (!args.trace.empty())
      write_text_file(args.trace, dump(res.second));
  } else if (args.mode == "fixed") {
    int m = 0;
    if (args.cutoff && args.beta)
      throw UsageError("give either --M or --beta, not both");
    if (args.cutoff) {
      m = *args.cutoff;
    } else if (args.beta) {
      if (!budget)
        throw UsageError("--beta needs --rho to choose the cut-off");
      m = optimal_cutoff(cutoff_rule_from_string(args.rule),
                         static_cast<double>(data.size()), budget->rho(),
                         *args.beta, data.dim());
    } else {
      throw UsageError("fit needs --M, --beta or an adaptive --mode");
    }
    if (m < 0)
      throw UsageError("--M must be >= 0");
    out = fit(data, m, budget, rng, ledger);
  } else {
    throw UsageError("unknown --mode '" + args.mode +
                     "' (expected fixed|lepskii|penalized-bias)");
  }
  out["ledger"] = ledger;
  write_text_file(args.out, dump(out));
  std::cout << dump(nlohmann::json(ledger));
  return 0;
}

int
cmd_sample(const std::string& in, std::size_t n, std::uint64_t seed,
           const std::string& out)
{
  const auto j = read_json_file(in);
  Rng rng = make_rng(seed, 0);
  PointSet points;
  if (j.contains("kind")) {
    points = rejection_sample(make_density_from_json(j), n, rng);
  } else {
    const auto est = j.get<ProjectionEstimate>();
    const auto clipped = clip_estimate(est);
    points = rejection_sample(
      [&](std::span<const double> x) { return clipped.value(x); },
      clipped.dim(), clipped.sup_bound(), n, rng);
  }
  std::ostringstream os;
  write_points_csv(os, points);
  write_output(out, os.str());
  return 0;
}

struct DensityArgs
{
  std::string kind = "trig";
  int d = 1;
  double beta = 2.0;
  double L = 2.0;
  int M = 16;
  int m = 4;
  bool halved_h = false;
  std::uint64_t seed = 1;
  std::string out;
};

int
cmd_generate_density(const DensityArgs& a)
{
  nlohmann::json j{ { "kind", a.kind }, { "d", a.d } };
  if (a.kind == "trig") {
    j.update({ { "beta", a.beta }, { "L", a.L }, { "M", a.M }, { "seed", a.seed } });
  } else if (a.kind == "packing") {
    j.update({ { "beta", a.beta },
               { "L", a.L },
               { "m", a.m },
               { "halved_h", a.halved_h },
               { "seed", a.seed } });
  } else if (a.kind != "uniform") {
    throw UsageError("--kind must be trig, packing or uniform");
  }
  const DensitySpec spec = make_density_from_json(j);
  write_output(a.out, dump(nlohmann::json(spec)));
  return 0;
}

nlohmann::json
slope_json(const std::optional<SlopeFit>& s)
{
  if (!s)
    return nullptr;
  return { { "slope", s->slope },
           { "intercept", s->intercept },
           { "std_error", std::isnan(s->std_error)
                            ? nlohmann::json(nullptr)
                            : nlohmann::json(s->std_error) },
           { "points", s->points } };
}

nlohmann::json
constants_json(const ExperimentConfig& cfg)
{
  return { { "mode", cfg.penalty.theory_mode ? "theory" : "practical" },
           { "C", cfg.penalty.C },
           { "a", cfg.penalty.a },
           { "eps", cfg.penalty.eps },
           { "L", cfg.penalty.L } };
}

nlohmann::json
nan_to_null(double v)
{
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

int
cmd_experiment(const std::string& config, const std::string& out_dir,
               std::optional<unsigned> threads)
{
  auto sweeps = load_experiment_config(config);
  fs::create_directories(out_dir);
  nlohmann::json summary = nlohmann::json::array();
  for (auto& sweep : sweeps) {
    auto& cfg = sweep.cfg;
    if (threads)
      cfg.threads = *threads;
    nlohmann::json s{ { "name", cfg.name },
                      { "mode", to_string(cfg.mode) },
                      { "cutoff_rule", to_string(cfg.cutoff_rule) },
                      { "constants", constants_json(cfg) },
                      { "seed", cfg.seed },
                      { "replicates", cfg.replicates } };
    std::vector<ExperimentRecord> rows;
    if (sweep.kind == SweepKind::Rate) {
      auto res = run_rate_experiment(cfg);
      rows = std::move(res.records);
      s["experiment"] = "rate";
      const char* on = res.regressed_on == RegressOn::N          ? "log n"
                       : res.regressed_on == RegressOn::NSqrtRho ? "log(n sqrt(rho))"
                                                                 : "none";
      s["regressed_on"] = on;
      s["slope"] = slope_json(res.slope);
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : res.cells)
        cells.push_back({ { "n", c.n },
                          { "rho", c.rho },
                          { "completed", c.completed },
                          { "skipped", c.skipped },
                          { "mean_mise", nan_to_null(c.mean_mise) },
                          { "median_mise", nan_to_null(c.median_mise) },
                          { "median_selected_M",
                            nan_to_null(c.median_selected_M) } });
      s["cells"] = cells;
      std::printf("%s: slope %s\n", cfg.name.c_str(),
                  res.slope ? format_double(res.slope->slope).c_str() : "n/a");
    } else {
      auto res = run_adaptivity_experiment(cfg);
      rows = std::move(res.records);
      s["experiment"] = "adaptivity";
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : res.comparisons) {
        cells.push_back(
          { { "n", c.n },
            { "rho", c.rho },
            { "completed", c.completed },
            { "median_adaptive_mise", nan_to_null(c.median_adaptive_mise) },
            { "median_oracle_mise", nan_to_null(c.median_oracle_mise) },
            { "ratio_to_oracle", nan_to_null(c.ratio_to_oracle) },
            { "median_best_fixed_mise", nan_to_null(c.median_best_fixed_mise) },
            { "best_fixed_M", c.best_fixed_M },
            { "ratio_to_best_fixed", nan_to_null(c.ratio_to_best_fixed) },
            { "median_selected_M", nan_to_null(c.median_selected_M) },
            { "oracle_M", c.oracle_M },
            { "within_factor4", nan_to_null(c.within_factor4) } });
        std::printf("%s: n=%zu rho=%s median selected M %s, ratio to oracle %s\n",
                    cfg.name.c_str(), c.n, format_double(c.rho).c_str(),
                    format_double(c.median_selected_M).c_str(),
                    format_double(c.ratio_to_oracle).c_str());
      }
      s["cells"] = cells;
    }
    std::ostringstream os;
    write_records_csv(os, rows);
    const auto csv = fs::path(out_dir) / (cfg.name + ".csv");
    write_text_file(csv, os.str());
    s["csv"] = csv.filename().string();
    summary.push_back(s);
  }
  write_text_file(fs::path(out_dir) / "summary.json",
                  dump({ { "sweeps", summary } }));
  return 0;
}

int
cmd_rate_table(const std::vector<double>& ns, const std::vector<double>& rhos,
               double beta, int d)
{
  std::cout << "n,rho,beta,d,rate,sampling_term,privacy_term,regime,"
               "M_thm,M_adaptive,sigma_thm\n";
  for (double n : ns)
    for (double rho : rhos) {
      const auto r = theoretical_rate({ n, rho, beta, d });
      const int m_thm = optimal_cutoff_thm(n, rho, beta, d);
      const int m_ad = optimal_cutoff_adaptive_form(n, rho, beta, d);
      const double sigma =
        sigma_for_cutoff(static_cast<std::size_t>(n), PrivacyBudget(rho),
                         m_thm, d)
          .sigma();
      std::cout << format_double(n) << ',' << format_double(rho) << ','
                << format_double(beta) << ',' << d << ','
                << format_double(r.value) << ','
                << format_double(r.sampling_term) << ','
                << format_double(r.privacy_term) << ','
                << (r.regime == Regime::Privacy ? "privacy" : "sampling")
                << ',' << m_thm << ',' << m_ad << ',' << format_double(sigma)
                << '\n';
    }
  return 0;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Differentially private Fourier projection density "
                "estimation" };
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an estimator to a points CSV");
  fit_cmd->add_option("--data", fa.data, "Points CSV (no header)")->required();
  fit_cmd->add_option("--out", fa.out, "Estimate JSON output")->required();
  fit_cmd->add_option("--trace", fa.trace, "Selection trace JSON (adaptive)");
  fit_cmd->add_option("--rho", fa.rho, "zCDP budget; omit for non-private");
  fit_cmd->add_option("--M", fa.cutoff, "Fixed cut-off");
  fit_cmd->add_option("--beta", fa.beta, "Smoothness for the cut-off formula");
  fit_cmd->add_option("--mode", fa.mode, "fixed|lepskii|penalized-bias")
    ->capture_default_str();
  fit_cmd->add_option("--cutoff-rule", fa.rule, "thm|adaptive")
    ->capture_default_str();
  fit_cmd->add_option("--seed", fa.seed)->capture_default_str();
  fit_cmd->add_option("--C", fa.C, "Lepskii constant")->capture_default_str();
  fit_cmd->add_option("--a", fa.a, "Lepskii log exponent")->capture_default_str();
  fit_cmd->add_option("--eps", fa.eps, "Beta grid step")->capture_default_str();
  fit_cmd->add_option("--L", fa.L, "Sobolev radius (theory constants)")
    ->capture_default_str();
  fit_cmd->add_flag("--theory", fa.theory, "Use the theory constants");
  fit_cmd->add_option("--grid", fa.grid, "Penalized-bias cut-offs")
    ->delimiter(',');

  std::string sample_in, sample_out;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 0;
  auto* sample_cmd =
    app.add_subcommand("sample", "Draw points from a density or estimate");
  sample_cmd->add_option("--in", sample_in, "Density or estimate JSON")
    ->required();
  sample_cmd->add_option("--n", sample_n, "Number of points")->required();
  sample_cmd->add_option("--seed", sample_seed)->capture_default_str();
  sample_cmd->add_option("--out", sample_out, "Points CSV (default stdout)");

  DensityArgs da;
  auto* gen_cmd =
    app.add_subcommand("generate-density", "Write a density fixture JSON");
  gen_cmd->add_option("--kind", da.kind, "trig|packing|uniform")
    ->capture_default_str();
  gen_cmd->add_option("--d", da.d)->capture_default_str();
  gen_cmd->add_option("--beta", da.beta)->capture_default_str();
  gen_cmd->add_option("--L", da.L)->capture_default_str();
  gen_cmd->add_option("--M", da.M, "Trig truth cut-off")->capture_default_str();
  gen_cmd->add_option("--m", da.m, "Packing centres per axis")
    ->capture_default_str();
  gen_cmd->add_flag("--halved-h", da.halved_h, "Packing: keep f >= 1/2");
  gen_cmd->add_option("--seed", da.seed)->capture_default_str();
  gen_cmd->add_option("--out", da.out, "Output JSON (default stdout)");

  std::string exp_config, exp_out = "results";
  std::optional<unsigned> exp_threads;
  auto* exp_cmd = app.add_subcommand("experiment", "Run experiment sweeps");
  exp_cmd->add_option("--config", exp_config, "Config JSON")->required();
  exp_cmd->add_option("--out-dir", exp_out)->capture_default_str();
  exp_cmd->add_option("--threads", exp_threads, "Override worker count");

  std::vector<double> rt_n, rt_rho;
  double rt_beta = 1.0;
  int rt_d = 1;
  auto* rate_cmd =
    app.add_subcommand("rate-table", "Theoretical rates and cut-offs as CSV");
  rate_cmd->add_option("--n", rt_n)->required()->delimiter(',');
  rate_cmd->add_option("--rho", rt_rho)->required()->delimiter(',');
  rate_cmd->add_option("--beta", rt_beta)->capture_default_str();
  rate_cmd->add_option("--d", rt_d)->capture_default_str();

  auto* print_cmd =
    app.add_subcommand("print-config", "Print a config with every default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit_cmd)
      return cmd_fit(fa);
    if (*sample_cmd)
      return cmd_sample(sample_in, sample_n, sample_seed, sample_out);
    if (*gen_cmd)
      return cmd_generate_density(da);
    if (*exp_cmd)
      return cmd_experiment(exp_config, exp_out, exp_threads);
    if (*rate_cmd)
      return cmd_rate_table(rt_n, rt_rho, rt_beta, rt_d);
    if (*print_cmd) {
      std::cout << dump({ { "sweeps", { default_sweep_json() } } });
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
