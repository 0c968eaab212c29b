#include "lago/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lago/config.hpp"
#include "lago/csvio.hpp"
#include "lago/errors.hpp"
#include "lago/inference.hpp"
#include "lago/model.hpp"
#include "lago/optimizer.hpp"
#include "lago/report.hpp"
#include "lago/scenarios.hpp"
#include "lago/sim.hpp"
#include "lago/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lago {
namespace {

std::string fmt(double v, int sig = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
  return buf;
}

Config load_config(const std::string& path,
                   const std::vector<std::string>& overrides) {
  Config cfg = path.empty() ? Config::from_string("", "<none>")
                            : Config::from_file(path);
  for (const auto& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("override '" + kv + "' is not key=value");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

Eigen::VectorXd weights_for(const Config& cfg, const ModelFit& fit) {
  if (cfg.has("weights.values")) {
    const Eigen::VectorXd w = cfg.get_vector("weights.values");
    if (w.size() != fit.J) {
      throw ConfigError("weights.values",
                        "expected " + std::to_string(fit.J) + " weights, got " +
                            std::to_string(w.size()));
    }
    return w;
  }
  const std::string mode = cfg.get_string("weights.mode", "from_data");
  if (mode == "equal") return Eigen::VectorXd::Constant(fit.J, 1.0 / fit.J);
  if (mode != "from_data") {
    throw ConfigError("weights.mode",
                      "must be 'from_data' or 'equal', got '" + mode + "'");
  }
  return default_weights(fit);
}

BandDfPolicy band_policy_for(const Config& cfg) {
  const std::string bdf = cfg.get_string("band_df_policy", "coefficient_dim");
  if (bdf == "coefficient_dim") return BandDfPolicy::coefficient_dim;
  if (bdf == "contrast_span") return BandDfPolicy::contrast_span;
  throw ConfigError("band_df_policy",
                    "must be 'coefficient_dim' or 'contrast_span', got '" +
                        bdf + "'");
}

std::vector<Bounds> optional_bounds(const Config& cfg, int P, bool* present) {
  *present = cfg.has("bounds.lower") && cfg.has("bounds.upper");
  if (!*present) return {};
  const Eigen::VectorXd lo = cfg.get_vector("bounds.lower");
  const Eigen::VectorXd hi = cfg.get_vector("bounds.upper");
  if (lo.size() != P || hi.size() != P) {
    throw ConfigError("bounds.lower",
                      "expected " + std::to_string(P) + " values per bound");
  }
  std::vector<Bounds> bounds(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) bounds[static_cast<std::size_t>(p)] = {lo[p], hi[p]};
  return bounds;
}

struct AnalysisBundle {
  AnalysisArtifacts artifacts;
  Eigen::VectorXd weights;
  bool has_set = false;
  ConfidenceSetResult set;
  bool has_band = false;
  ConfidenceBandResult band;
};

AnalysisBundle analyze(const TrialDataset& dataset, const Config& cfg) {
  AnalysisBundle bundle;
  AnalysisArtifacts& a = bundle.artifacts;
  a.fit = fit(dataset);

  const std::string style_name = cfg.get_string("variance.style", "hc0");
  VarianceStyle style = VarianceStyle::hc0;
  if (style_name == "per_centre_pooled") {
    style = VarianceStyle::per_centre_pooled;
  } else if (style_name != "hc0") {
    throw ConfigError("variance.style",
                      "must be 'hc0' or 'per_centre_pooled', got '" +
                          style_name + "'");
  }
  a.cov = sandwich(a.fit, dataset, style);

  for (int p = 1; p <= a.fit.P; ++p) {
    a.individual.push_back(wald_individual(a.fit, a.cov, p));
  }
  a.joint = wald_joint(a.fit, a.cov);
  try {
    a.delta = delta_test(dataset);
    a.has_delta = true;
  } catch (const Error&) {
    a.has_delta = false;
  }

  bundle.weights = weights_for(cfg, a.fit);
  const double level = cfg.get_double("level", 0.95);
  const double resolution = cfg.get_double("grid_resolution", 0.05);

  if (cfg.has("x")) {
    const Eigen::VectorXd x = cfg.get_vector("x");
    if (x.size() != a.fit.P) {
      throw ConfigError("x", "expected " + std::to_string(a.fit.P) +
                                 " components, got " + std::to_string(x.size()));
    }
    a.ci_mean = ci_mean(a.fit, a.cov, x, bundle.weights, level);
    a.has_ci_mean = true;
  }

  bool has_bounds = false;
  const std::vector<Bounds> bounds = optional_bounds(cfg, a.fit.P, &has_bounds);
  if (has_bounds && cfg.has("goal")) {
    OptimizationProblem problem;
    problem.goal = cfg.get_double("goal");
    if (cfg.has("direction")) {
      problem.direction =
          direction_from_string(cfg.get_string("direction"), "direction");
    }
    problem.bounds = bounds;
    problem.weights = bundle.weights;
    bundle.set = confidence_set(a.fit, a.cov, problem, resolution, level);
    bundle.has_set = true;
  }
  if (has_bounds) {
    bundle.band = confidence_band(a.fit, a.cov, bundle.weights, bounds,
                                  resolution, level, band_policy_for(cfg));
    bundle.has_band = true;
  }
  return bundle;
}

void print_coefficient_table(const AnalysisArtifacts& a) {
  const Eigen::VectorXd coef = a.fit.coefficients();
  const double z = stats::normal_quantile(0.975);
  std::printf("%-12s %12s %12s %12s %12s %10s\n", "coefficient", "estimate",
              "robust SE", "ci95 lower", "ci95 upper", "p");
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    const double se = std::sqrt(std::max(0.0, a.cov.cov_beta(i, i)));
    double p;
    if (i < a.fit.P) {
      p = a.individual[static_cast<std::size_t>(i)].p_value;
    } else if (se > 0) {
      p = 2.0 * stats::normal_cdf(-std::fabs(coef[i] / se));
    } else {
      p = 1.0;
    }
    std::printf("%-12s %12s %12s %12s %12s %10s\n",
                a.fit.coefficient_names[static_cast<std::size_t>(i)].c_str(),
                fmt(coef[i]).c_str(), fmt(se).c_str(),
                fmt(coef[i] - z * se).c_str(), fmt(coef[i] + z * se).c_str(),
                fmt(p, 3).c_str());
  }
}

void print_test_table(const AnalysisArtifacts& a) {
  std::printf("%-24s %12s %6s %10s\n", "test", "statistic", "df", "p");
  for (std::size_t p = 0; p < a.individual.size(); ++p) {
    std::printf("%-24s %12s %6d %10s\n",
                ("wald a" + std::to_string(p + 1)).c_str(),
                fmt(a.individual[p].statistic).c_str(), a.individual[p].df,
                fmt(a.individual[p].p_value, 3).c_str());
  }
  std::printf("%-24s %12s %6d %10s\n", "wald joint",
              fmt(a.joint.statistic).c_str(), a.joint.df,
              fmt(a.joint.p_value, 3).c_str());
  if (a.has_delta) {
    std::printf("%-24s %12s %6d %10s\n", "delta randomization",
                fmt(a.delta.statistic).c_str(), a.delta.df,
                fmt(a.delta.p_value, 3).c_str());
  }
}

void write_analysis_outputs(AnalysisBundle& bundle, const std::string& out_dir,
                            const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  if (bundle.has_set) {
    write_set_csv(out_dir + "/set.csv", bundle.set);
    bundle.artifacts.set_mask_file = "set.csv";
  }
  if (bundle.has_band) {
    write_band_csv(out_dir + "/band.csv", bundle.band);
    bundle.artifacts.band_file = "band.csv";
  }
  write_json(out_dir + "/report.json", analysis_report_json(bundle.artifacts));
  write_run_meta(out_dir + "/run_meta.json", argv);
}

// ---------------------------------------------------------------------------
// recommend: rebuild a coefficient fit from a report.json

ModelFit fit_from_report(const json& report) {
  if (!report.contains("beta") || !report.contains("names")) {
    throw ValidationError("fit report must contain 'beta' and 'names'");
  }
  const std::vector<double> beta = report["beta"].get<std::vector<double>>();
  const std::vector<std::string> names =
      report["names"].get<std::vector<std::string>>();
  if (beta.size() != names.size()) {
    throw ValidationError("fit report beta/names length mismatch");
  }
  int P = 0, J = 0, Km1 = 0;
  for (const auto& name : names) {
    if (name.rfind("centre_", 0) == 0) ++J;
    else if (name.rfind("stage_", 0) == 0) ++Km1;
    else ++P;
  }
  ModelFit fit;
  fit.P = P;
  fit.J = J;
  fit.K = Km1 + 1;
  fit.n = report.value("n", 0);
  fit.beta_A.resize(P);
  fit.gamma.resize(J);
  fit.eta.resize(Km1);
  for (int i = 0; i < P; ++i) fit.beta_A[i] = beta[static_cast<std::size_t>(i)];
  for (int j = 0; j < J; ++j) fit.gamma[j] = beta[static_cast<std::size_t>(P + j)];
  for (int k = 0; k < Km1; ++k) {
    fit.eta[k] = beta[static_cast<std::size_t>(P + J + k)];
  }
  fit.coefficient_names = names;
  return fit;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  json value;
  try {
    in >> value;
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid JSON in '" + path + "': " + e.what());
  }
  return value;
}

Eigen::VectorXd package_from_json(const json& value) {
  const json& arr = value.is_object() && value.contains("x") ? value["x"] : value;
  if (!arr.is_array()) {
    throw ValidationError("previous package must be an array or {\"x\": [...]}");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return x;
}

void print_recommendation(const Recommendation& rec) {
  std::printf("recommended package:");
  for (Eigen::Index p = 0; p < rec.x.components.size(); ++p) {
    std::printf(" %s", fmt(rec.x.components[p], 6).c_str());
  }
  std::printf("\ncost: %s\nachieved mean: %s\nfeasible: %s\nshrunk to previous: %s\n",
              fmt(rec.cost, 6).c_str(), fmt(rec.achieved_mean, 6).c_str(),
              rec.feasible ? "yes" : "no", rec.shrunk_to_previous ? "yes" : "no");
}

// ---------------------------------------------------------------------------
// simulate

ScenarioConfig resolve_scenario(const std::string& ref,
                                const std::vector<std::string>& overrides) {
  if (is_bundled_scenario(ref)) {
    if (!overrides.empty()) {
      throw ValidationError(
          "--set overrides require a config-file scenario; bundled scenario '" +
          ref + "' accepts only --replicates/--seed");
    }
    return bundled_scenario(ref);
  }
  if (!fs::exists(ref)) {
    throw ValidationError("scenario '" + ref +
                          "' is neither a bundled id nor an existing file");
  }
  return scenario_from_config(load_config(ref, overrides));
}

void print_aggregate_summary(const AggregateReport& agg) {
  std::printf("replicates: %d run, %d failed\n", agg.replicates_run,
              agg.failed_replicates);
  const int P = static_cast<int>(agg.rel_bias_pct.size());
  for (int p = 0; p < P; ++p) {
    std::printf(
        "beta_%d: rel_bias %s%%  se/emp_sd %s%%  cp95 %s%%  alpha %s\n", p + 1,
        fmt(agg.rel_bias_pct[p]).c_str(), fmt(agg.se_over_empsd_pct[p]).c_str(),
        fmt(agg.cp95[p]).c_str(), fmt(agg.alpha_individual[p], 3).c_str());
  }
  std::printf("alpha_joint %s  alpha_delta %s\n", fmt(agg.alpha_joint, 3).c_str(),
              fmt(agg.alpha_delta, 3).c_str());
  std::printf("xopt rmse: stage1 %s  final %s\n", fmt(agg.rmse_x_stage2).c_str(),
              fmt(agg.rmse_x_final).c_str());
  std::printf("set_cp95 %s%%  set_perc %s%%  bands_cp95 %s%%\n",
              fmt(agg.set_cp95).c_str(), fmt(agg.set_perc_mean).c_str(),
              fmt(agg.bands_cp95).c_str());
  std::printf(
      "expected outcome (actual interventions): stage1 %s  stage2 %s\n",
      fmt(agg.exp_out_act_s1).c_str(), fmt(agg.exp_out_act_s2).c_str());
  std::printf("mean cost (actual): stage1 %s  stage2 %s\n",
              fmt(agg.mean_cost_actual_s1).c_str(),
              fmt(agg.mean_cost_actual_s2).c_str());
}

// ---------------------------------------------------------------------------
// reproduce

struct Row {
  std::string metric;
  std::string reference;
  std::string achieved;
  std::string tolerance;
  std::string status;  // PASS / FAIL / info
};

class RowSink {
 public:
  void gate_window(const std::string& metric, const std::string& reference,
                   double achieved, double lo, double hi) {
    const bool ok = achieved >= lo && achieved <= hi;
    rows_.push_back(Row{metric, reference, fmt(achieved),
                        "[" + fmt(lo) + ", " + fmt(hi) + "]",
                        ok ? "PASS" : "FAIL"});
    failed_ |= !ok;
  }
  void gate_bool(const std::string& metric, const std::string& reference,
                 const std::string& achieved, const std::string& tolerance,
                 bool ok) {
    rows_.push_back(
        Row{metric, reference, achieved, tolerance, ok ? "PASS" : "FAIL"});
    failed_ |= !ok;
  }
  void info(const std::string& metric, const std::string& reference,
            double achieved) {
    rows_.push_back(Row{metric, reference, fmt(achieved), "-", "info"});
  }
  void print(const std::string& table) const {
    std::printf("\n== %s ==\n", table.c_str());
    std::printf("  %-42s %-20s %-14s %-20s %s\n", "metric", "reference",
                "achieved", "tolerance", "status");
    for (const auto& r : rows_) {
      std::printf("  %-42s %-20s %-14s %-20s %s\n", r.metric.c_str(),
                  r.reference.c_str(), r.achieved.c_str(), r.tolerance.c_str(),
                  r.status.c_str());
    }
  }
  bool failed() const { return failed_; }

 private:
  std::vector<Row> rows_;
  bool failed_ = false;
};

AggregateReport run_bundled(const std::string& id, int replicates,
                            bool use_lago = true) {
  ScenarioConfig sc = bundled_scenario(id);
  if (replicates > 0) sc.replicates = replicates;
  sc.use_lago = use_lago;
  return run_scenario(sc);
}

void reproduce_table1(int replicates, RowSink& sink) {
  struct Ref {
    const char* id;
    double rb1, rb2, sesd1, sesd2, cp1, cp2;
  };
  const Ref refs[] = {{"table1_J6", 0.018, 0.233, 95.00, 101.34, 94.80, 95.20},
                      {"table1_J20", 0.012, 0.024, 98.45, 99.18, 95.35, 94.55}};
  for (const auto& ref : refs) {
    const AggregateReport agg = run_bundled(ref.id, replicates);
    const std::string tag = std::string(ref.id) + " ";
    sink.gate_window(tag + "rel_bias_pct beta1", fmt(ref.rb1), agg.rel_bias_pct[0],
                     -1.0, 1.0);
    sink.gate_window(tag + "rel_bias_pct beta2", fmt(ref.rb2), agg.rel_bias_pct[1],
                     -1.0, 1.0);
    sink.gate_window(tag + "se/emp_sd x100 beta1", fmt(ref.sesd1),
                     agg.se_over_empsd_pct[0], 88.0, 112.0);
    sink.gate_window(tag + "se/emp_sd x100 beta2", fmt(ref.sesd2),
                     agg.se_over_empsd_pct[1], 88.0, 112.0);
    sink.gate_window(tag + "cp95 beta1", fmt(ref.cp1), agg.cp95[0], 92.5, 97.5);
    sink.gate_window(tag + "cp95 beta2", fmt(ref.cp2), agg.cp95[1], 92.5, 97.5);
    sink.gate_bool(tag + "rmse final <= rmse stage1",
                   ref.id == std::string("table1_J6") ? "0.484 <= 0.603" : "-",
                   fmt(agg.rmse_x_final) + " <= " + fmt(agg.rmse_x_stage2),
                   "ordering", agg.rmse_x_final <= agg.rmse_x_stage2);
    if (ref.id == std::string("table1_J6")) {
      sink.info(tag + "bias xopt_stage1_1", "-0.074", agg.bias_x_stage2[0]);
      sink.info(tag + "bias xopt_stage1_2", "0.207", agg.bias_x_stage2[1]);
      sink.info(tag + "bias xopt_final_1", "-0.005", agg.bias_x_final[0]);
      sink.info(tag + "bias xopt_final_2", "0.076", agg.bias_x_final[1]);
      sink.info(tag + "trueopt_stage1 q2.5", "-5.331", agg.trueopt_stage2_q025);
      sink.info(tag + "trueopt_stage1 q97.5", "-4.657", agg.trueopt_stage2_q975);
      sink.info(tag + "trueopt_final q2.5", "-5.189", agg.trueopt_final_q025);
      sink.info(tag + "trueopt_final q97.5", "-4.915", agg.trueopt_final_q975);
      sink.gate_window(tag + "set_cp95", "95.30", agg.set_cp95, 92.0, 98.0);
      sink.gate_window(tag + "set_perc", "4.07", agg.set_perc_mean, 2.0, 6.0);
      sink.gate_window(tag + "bands_cp95", "96.25", agg.bands_cp95, 94.0, 99.0);
    }
  }
}

void reproduce_null(int replicates, RowSink& sink) {
  const AggregateReport agg =
      run_bundled("null_tables", replicates > 0 ? replicates : 2000);
  sink.gate_window("alpha_1", "0.04-0.06", agg.alpha_individual[0], 0.038, 0.068);
  sink.gate_window("alpha_2", "0.04-0.06", agg.alpha_individual[1], 0.038, 0.068);
  sink.gate_window("alpha_combined", "0.04-0.06", agg.alpha_joint, 0.038, 0.068);
  sink.info("alpha_delta", "-", agg.alpha_delta);
  sink.info("se/emp_sd x100 beta1", "-", agg.se_over_empsd_pct[0]);
  sink.info("se/emp_sd x100 beta2", "-", agg.se_over_empsd_pct[1]);
}

void reproduce_cvd_info(const std::string& id, int replicates, RowSink& sink,
                        double ref_rmse_lago, double ref_rmse_non,
                        double ref_exp_lago, double ref_exp_non) {
  const AggregateReport lago = run_bundled(id, replicates, true);
  const AggregateReport non = run_bundled(id, replicates, false);
  sink.info("rmse_xopt_final (adaptive)", fmt(ref_rmse_lago), lago.rmse_x_final);
  sink.info("rmse_xopt_final (fixed stage-2)", fmt(ref_rmse_non),
            non.rmse_x_final);
  sink.info("expected outcome actual s2 (adaptive)", fmt(ref_exp_lago),
            lago.exp_out_act_s2);
  sink.info("expected outcome actual s2 (fixed)", fmt(ref_exp_non),
            non.exp_out_act_s2);
  sink.info("mean cost actual s2 (adaptive)", "-", lago.mean_cost_actual_s2);
  sink.info("mean cost actual s2 (fixed)", "-", non.mean_cost_actual_s2);
  sink.info("set_cp95 (adaptive)", "-", lago.set_cp95);
  sink.info("set_cp95 (fixed)", "-", non.set_cp95);
}

void reproduce_table5(int replicates, RowSink& sink) {
  const AggregateReport lago = run_bundled("table5", replicates, true);
  const AggregateReport non = run_bundled("table5", replicates, false);
  sink.gate_bool("rmse_xopt_final adaptive < fixed", "2.62 < 3.18",
                 fmt(lago.rmse_x_final) + " < " + fmt(non.rmse_x_final),
                 "strict ordering", lago.rmse_x_final < non.rmse_x_final);
  sink.gate_bool("bias xopt_final_1 sign", "-1.28 (negative)",
                 fmt(lago.bias_x_final[0]), "sign", lago.bias_x_final[0] < 0.0);
  sink.gate_bool("bias xopt_final_2 sign", "positive",
                 fmt(lago.bias_x_final[1]), "sign", lago.bias_x_final[1] > 0.0);
  sink.info("rel_bias_pct beta1 (adaptive)", "-0.77", lago.rel_bias_pct[0]);
  sink.info("rel_bias_pct beta2 (adaptive)", "17.7", lago.rel_bias_pct[1]);
  sink.info("expected outcome actual s2 (adaptive)", "-5.93",
            lago.exp_out_act_s2);
  sink.info("expected outcome actual s2 (fixed)", "-5.71", non.exp_out_act_s2);
}

void reproduce_table6(int replicates, RowSink& sink) {
  const AggregateReport lago = run_bundled("table6", replicates, true);
  const AggregateReport non = run_bundled("table6", replicates, false);
  sink.gate_window("expected outcome actual s2 (adaptive+LB)", "-7.62",
                   lago.exp_out_act_s2, -8.22, -7.02);
  sink.gate_bool("expected outcome actual s2 <= -7", "<= -7",
                 fmt(lago.exp_out_act_s2), "threshold",
                 lago.exp_out_act_s2 <= -7.0);
  sink.gate_window("expected outcome actual s2 (fixed)", "-5.71",
                   non.exp_out_act_s2, -6.31, -5.11);
  sink.info("rmse_xopt_final (adaptive+LB)", "2.66", lago.rmse_x_final);
  sink.info("rmse_xopt_final (fixed)", "2.77", non.rmse_x_final);
  sink.info("set_cp95 (adaptive+LB)", "94.7", lago.set_cp95);
  sink.info("set_cp95 (fixed)", "95.4", non.set_cp95);
  sink.info("mean cost actual s2 (adaptive+LB)", "-", lago.mean_cost_actual_s2);
}

// Brute-force minimal cost on a 0.005 grid for the two-component benchmark
// with the cubic cost; used as the oracle for the cubic optimum check.
double cubic_grid_oracle_cost() {
  const ScenarioConfig sc = bundled_scenario("cubic_appendix");
  const Eigen::Vector2d beta(-1.70, -0.70);
  const double step = 0.005;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 800; ++i) {
    const double x1 = i * step;
    for (int j = 0; j <= 600; ++j) {
      const double x2 = j * step;
      if (beta[0] * x1 + beta[1] * x2 > -5.0 + 1e-12) continue;
      const double c =
          evaluate_cost(sc.cost, Eigen::Vector2d(x1, x2));
      if (c < best) best = c;
    }
  }
  return best;
}

void reproduce_cubic(int replicates, RowSink& sink) {
  OptimizationProblem problem;
  problem.cost = bundled_scenario("cubic_appendix").cost;
  problem.goal = -5.0;
  problem.direction = GoalDirection::at_most;
  problem.bounds = {Bounds{0.0, 4.0}, Bounds{0.0, 3.0}};
  problem.weights = Eigen::VectorXd::Constant(1, 1.0);
  problem.coefficients.beta_A = Eigen::Vector2d(-1.70, -0.70);
  problem.coefficients.gamma = Eigen::VectorXd::Zero(1);
  const Recommendation rec = optimize(problem);
  const double oracle = cubic_grid_oracle_cost();
  sink.gate_bool("cubic optimum x1", "2.94",
                 fmt(rec.x.components[0], 6), "|dx| <= 0.02",
                 std::fabs(rec.x.components[0] - 2.94) <= 0.02);
  sink.gate_bool("cubic optimum x2", "0.01",
                 fmt(rec.x.components[1], 6), "|dx| <= 0.02",
                 std::fabs(rec.x.components[1] - 0.01) <= 0.02);
  sink.gate_bool("cubic optimum cost vs 0.005-grid oracle",
                 fmt(oracle, 8), fmt(rec.cost, 8), "<= oracle + 1e-3",
                 rec.cost <= oracle + 1e-3);

  const AggregateReport agg = run_bundled("cubic_appendix", replicates);
  sink.info("cp95 beta1", "-", agg.cp95[0]);
  sink.info("cp95 beta2", "-", agg.cp95[1]);
  sink.info("rmse_xopt_stage1", "-", agg.rmse_x_stage2);
  sink.info("rmse_xopt_final", "-", agg.rmse_x_final);
  sink.info("set_cp95", "-", agg.set_cp95);
}

int cmd_reproduce(const std::string& table, int replicates) {
  RowSink sink;
  if (table == "table1") {
    reproduce_table1(replicates, sink);
  } else if (table == "null_tables") {
    reproduce_null(replicates, sink);
  } else if (table == "table3") {
    reproduce_cvd_info("table3", replicates, sink, 2.44, 2.61, -3.37, -5.71);
  } else if (table == "table4") {
    reproduce_cvd_info("table4", replicates, sink, 1.73, 1.74, -6.07, -5.69);
  } else if (table == "table5") {
    reproduce_table5(replicates, sink);
  } else if (table == "table6") {
    reproduce_table6(replicates, sink);
  } else if (table == "cubic_appendix") {
    reproduce_cubic(replicates, sink);
  } else {
    throw UnknownTable(table);
  }
  sink.print(table);
  return sink.failed() ? 1 : 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Adaptive multi-stage trial toolkit: fixed-centre-effect "
               "estimation, cost-optimal package search, and simulation"};
  app.require_subcommand(1);

  std::vector<std::string> raw_args;
  for (int i = 0; i < argc; ++i) raw_args.emplace_back(argv[i]);

  std::string data_path, config_path, out_dir;
  std::vector<std::string> overrides;

  CLI::App* c_fit = app.add_subcommand("fit", "Fit the model to a dataset");
  c_fit->add_option("--data", data_path, "participant CSV")->required();
  c_fit->add_option("--config", config_path, "analysis config");
  c_fit->add_option("--out", out_dir, "output directory")->required();
  c_fit->add_option("--set", overrides, "config override key=value");

  CLI::App* c_test = app.add_subcommand("test", "Run hypothesis tests");
  c_test->add_option("--data", data_path, "participant CSV")->required();
  c_test->add_option("--config", config_path, "analysis config");
  c_test->add_option("--out", out_dir, "output directory");
  c_test->add_option("--set", overrides, "config override key=value");

  std::string opt_out;
  CLI::App* c_opt = app.add_subcommand("optimize", "Cost-minimizing package");
  c_opt->add_option("--config", config_path, "problem config")->required();
  c_opt->add_option("--out", opt_out, "write recommendation JSON here");
  c_opt->add_option("--set", overrides, "config override key=value");

  std::string fit_report_path, previous_path;
  CLI::App* c_rec =
      app.add_subcommand("recommend", "Next-stage recommendation from a fit");
  c_rec->add_option("--fit", fit_report_path, "report.json from fit")->required();
  c_rec->add_option("--previous", previous_path, "previous package JSON")
      ->required();
  c_rec->add_option("--config", config_path, "problem config")->required();
  c_rec->add_option("--out", opt_out, "write recommendation JSON here");
  c_rec->add_option("--set", overrides, "config override key=value");

  std::string scenario_ref;
  int replicates_flag = 0;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  CLI::App* c_sim = app.add_subcommand("simulate", "Monte-Carlo scenario run");
  c_sim->add_option("--scenario", scenario_ref, "scenario config or bundled id")
      ->required();
  c_sim->add_option("--replicates", replicates_flag, "replicate count override");
  c_sim->add_option("--seed", seed_flag, "seed override")
      ->each([&](const std::string&) { seed_given = true; });
  c_sim->add_option("--out", out_dir, "output directory")->required();
  c_sim->add_option("--set", overrides, "config override key=value");

  std::string table_id;
  CLI::App* c_rep =
      app.add_subcommand("reproduce", "Compare bundled scenarios to reference values");
  c_rep->add_option("--table", table_id, "table identifier")->required();
  c_rep->add_option("--replicates", replicates_flag, "replicate count override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (c_fit->parsed() || c_test->parsed()) {
      const TrialDataset dataset = read_dataset(data_path);
      const Config cfg = load_config(config_path, overrides);
      AnalysisBundle bundle = analyze(dataset, cfg);
      if (c_fit->parsed()) {
        write_analysis_outputs(bundle, out_dir, raw_args);
        print_coefficient_table(bundle.artifacts);
        std::printf("\n");
        print_test_table(bundle.artifacts);
        std::printf("\nreport: %s/report.json\n", out_dir.c_str());
      } else {
        print_test_table(bundle.artifacts);
        if (!out_dir.empty()) {
          write_analysis_outputs(bundle, out_dir, raw_args);
          std::printf("\nreport: %s/report.json\n", out_dir.c_str());
        }
      }
      return 0;
    }

    if (c_opt->parsed()) {
      const Config cfg = load_config(config_path, overrides);
      const OptimizationProblem problem = problem_from_config(cfg);
      const Recommendation rec = optimize(problem);
      print_recommendation(rec);
      if (!opt_out.empty()) write_json(opt_out, recommendation_json(rec));
      return 0;
    }

    if (c_rec->parsed()) {
      const json report = read_json_file(fit_report_path);
      const ModelFit mf = fit_from_report(report);
      SandwichCovariance cov;
      cov.cov_beta = Eigen::MatrixXd::Zero(mf.dim(), mf.dim());
      const Config cfg = load_config(config_path, overrides);

      OptimizationProblem problem;
      problem.cost = cost_from_config(cfg, mf.P);
      problem.goal = cfg.get_double("goal");
      problem.direction =
          direction_from_string(cfg.get_string("direction"), "direction");
      bool has_bounds = false;
      problem.bounds = optional_bounds(cfg, mf.P, &has_bounds);
      if (!has_bounds) {
        throw ConfigError("bounds.lower", "missing required key");
      }
      if (cfg.has("weights.values")) {
        problem.weights = cfg.get_vector("weights.values");
      } else {
        problem.weights = Eigen::VectorXd::Constant(mf.J, 1.0 / mf.J);
      }
      const LowerBoundPolicy policy = lb_policy_from_string(
          cfg.get_string("lower_bound_policy", "none"), "lower_bound_policy");

      Recommendation previous;
      previous.x.components = package_from_json(read_json_file(previous_path));
      if (previous.x.components.size() != mf.P) {
        throw ValidationError("previous package has " +
                              std::to_string(previous.x.components.size()) +
                              " components; fit has " + std::to_string(mf.P));
      }
      previous.x.bounds = problem.bounds;
      previous.feasible = true;
      previous.cost = evaluate_cost(problem.cost, previous.x.components);

      const Recommendation rec =
          recommend_next_stage(mf, cov, problem, previous, policy);
      print_recommendation(rec);
      if (!opt_out.empty()) write_json(opt_out, recommendation_json(rec));
      return 0;
    }

    if (c_sim->parsed()) {
      ScenarioConfig sc = resolve_scenario(scenario_ref, overrides);
      if (replicates_flag > 0) sc.replicates = replicates_flag;
      if (seed_given) sc.seed = seed_flag;
      sc.validate();
      std::vector<ReplicateMetrics> rows;
      const AggregateReport agg = run_scenario(sc, &rows);
      fs::create_directories(out_dir);
      write_json(out_dir + "/aggregate.json", aggregate_report_json(agg));
      write_replicate_csv(out_dir + "/replicates.csv", rows, sc.P);
      write_run_meta(out_dir + "/run_meta.json", raw_args);
      print_aggregate_summary(agg);
      std::printf("outputs: %s/aggregate.json, %s/replicates.csv\n",
                  out_dir.c_str(), out_dir.c_str());
      if (agg.failed_replicates > 0) {
        std::cerr << "error: " << agg.failed_replicates
                  << " replicate(s) failed\n";
        return 3;
      }
      return 0;
    }

    if (c_rep->parsed()) {
      return cmd_reproduce(table_id, replicates_flag);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace lago
