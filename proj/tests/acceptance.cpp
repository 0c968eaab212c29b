// Acceptance gate for the library: each criterion prints exactly one
// PASS/FAIL line with the measured values, and the process exits nonzero
// when any executed criterion fails. Run a single criterion with
// `--criterion <1|2|3|4|5|6sets|6band|7|8>`, or all of them with no flags.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lago/inference.hpp"
#include "lago/model.hpp"
#include "lago/optimizer.hpp"
#include "lago/report.hpp"
#include "lago/rng.hpp"
#include "lago/scenarios.hpp"
#include "lago/sim.hpp"
#include "lago/types.hpp"

using namespace lago;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return std::string(buf);
}

bool in_window(double value, double lo, double hi) {
  return value >= lo && value <= hi;
}

struct CriterionResult {
  bool pass = false;
  std::string details;
};

// Scenario runs are memoized so a full acceptance pass reuses the
// benchmark replicates across criteria.
const AggregateReport& bundled_aggregate(const std::string& id) {
  static std::map<std::string, AggregateReport> cache;
  auto it = cache.find(id);
  if (it == cache.end()) {
    it = cache.emplace(id, run_scenario(bundled_scenario(id))).first;
  }
  return it->second;
}

AggregateReport run_variant(const std::string& id, bool use_lago) {
  ScenarioConfig sc = bundled_scenario(id);
  sc.use_lago = use_lago;
  return run_scenario(sc);
}

OptimizationProblem reference_problem() {
  OptimizationProblem p;
  p.cost.kind = CostFunction::Kind::linear;
  p.cost.linear = Eigen::Vector2d(1.0, 0.5);
  p.goal = -5.0;
  p.direction = GoalDirection::at_most;
  p.bounds = {{0.0, 4.0}, {0.0, 3.0}};
  p.weights = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  p.coefficients.beta_A = Eigen::Vector2d(-1.70, -0.70);
  p.coefficients.gamma = Eigen::VectorXd::Zero(3);
  p.include_eta = false;
  return p;
}

CostFunction cubic_cost() {
  CostFunction cost;
  cost.kind = CostFunction::Kind::polynomial;
  cost.terms = {
      {PolyTerm{1, 1.25}, PolyTerm{3, -0.04}, PolyTerm{4, 0.0055}},
      {PolyTerm{1, 0.63}, PolyTerm{3, -0.09}, PolyTerm{4, 0.026}},
  };
  return cost;
}

double brute_force_cost(const OptimizationProblem& p, double resolution) {
  const GridSpec grid = GridSpec::over(p.bounds, resolution);
  const double offset = p.weights.dot(p.coefficients.gamma);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd x = grid.point(i);
    const double mean = p.coefficients.beta_A.dot(x) + offset;
    const bool ok = (p.direction == GoalDirection::at_most)
                        ? mean <= p.goal + 1e-9
                        : mean >= p.goal - 1e-9;
    if (!ok) continue;
    const double cost = evaluate_cost(p.cost, x);
    if (cost < best) best = cost;
  }
  return best;
}

// ---------------------------------------------------------------------------

CriterionResult criterion_1() {
  const auto start = Clock::now();
  const Recommendation rec = optimize(reference_problem());
  const double elapsed = seconds_since(start);
  const double d1 = std::abs(rec.x.components[0] - 2.941);
  const double d2 = std::abs(rec.x.components[1] - 0.0);
  CriterionResult r;
  r.pass = d1 <= 1e-3 && d2 <= 1e-3 && elapsed < 1.0;
  r.details = fmt("x=(%.6f, %.6f), target (2.941, 0) tol 1e-3, %.3f s",
                  rec.x.components[0], rec.x.components[1], elapsed);
  return r;
}

CriterionResult criterion_2() {
  const auto start = Clock::now();
  OptimizationProblem p = reference_problem();
  p.cost = cubic_cost();
  const Recommendation rec = optimize(p);
  const double oracle = brute_force_cost(p, 0.005);
  const double elapsed = seconds_since(start);
  const double d1 = std::abs(rec.x.components[0] - 2.94);
  const double d2 = std::abs(rec.x.components[1] - 0.01);
  CriterionResult r;
  const bool cost_ok = rec.cost <= oracle + 1e-3;
  r.pass = d1 <= 0.02 && d2 <= 0.02 && cost_ok && elapsed < 5.0;
  r.details =
      fmt("x=(%.4f, %.4f) vs (2.94, 0.01) tol 0.02; cost %.7f vs 0.005-grid "
          "%.7f (tol +1e-3); %.2f s",
          rec.x.components[0], rec.x.components[1], rec.cost, oracle, elapsed);
  return r;
}

CriterionResult criterion_3() {
  const double rhos[] = {0.05, 0.07, 0.10, 0.20};
  const double targets[] = {0.0501, 0.0702, 0.1005, 0.2041};
  CriterionResult r;
  r.pass = true;
  std::string measured;
  for (int i = 0; i < 4; ++i) {
    const double eta = eta_from_rho(rhos[i]);
    const double rounded = std::round(eta * 1e4) / 1e4;
    if (std::abs(rounded - targets[i]) > 1e-12) r.pass = false;
    measured += fmt("%s%.4f", i ? ", " : "", eta);
  }
  r.details = fmt("eta = {%s}, expected {0.0501, 0.0702, 0.1005, 0.2041}",
                  measured.c_str());
  return r;
}

CriterionResult criterion_4() {
  CriterionResult r;
  r.pass = true;
  for (const char* id : {"table1_J6", "table1_J20"}) {
    const AggregateReport& agg = bundled_aggregate(id);
    bool ok = agg.failed_replicates == 0;
    for (int p = 0; p < 2; ++p) {
      ok = ok && std::abs(agg.rel_bias_pct[p]) <= 1.0;
      ok = ok && in_window(agg.cp95[p], 92.5, 97.5);
      ok = ok && in_window(agg.se_over_empsd_pct[p], 88.0, 112.0);
    }
    ok = ok && agg.rmse_x_final <= agg.rmse_x_stage2;
    r.pass = r.pass && ok;
    r.details += fmt(
        "%s[%s] relbias (%.3f, %.3f) tol 1; cp95 (%.1f, %.1f) in [92.5,97.5]; "
        "se/sd (%.1f, %.1f) in [88,112]; rmse %.3f<=%.3f",
        r.details.empty() ? "" : " | ", id, agg.rel_bias_pct[0],
        agg.rel_bias_pct[1], agg.cp95[0], agg.cp95[1],
        agg.se_over_empsd_pct[0], agg.se_over_empsd_pct[1], agg.rmse_x_final,
        agg.rmse_x_stage2);
  }
  return r;
}

CriterionResult criterion_5() {
  const AggregateReport& agg = bundled_aggregate("null_tables");
  CriterionResult r;
  r.pass = agg.failed_replicates == 0 &&
           in_window(agg.alpha_individual[0], 0.038, 0.068) &&
           in_window(agg.alpha_individual[1], 0.038, 0.068) &&
           in_window(agg.alpha_joint, 0.038, 0.068);
  r.details = fmt("alpha1 %.4f, alpha2 %.4f, joint %.4f, window [0.038, 0.068]",
                  agg.alpha_individual[0], agg.alpha_individual[1],
                  agg.alpha_joint);
  return r;
}

CriterionResult criterion_6sets() {
  const AggregateReport& agg = bundled_aggregate("table1_J6");
  CriterionResult r;
  r.pass = in_window(agg.set_cp95, 92.0, 98.0) &&
           in_window(agg.set_perc_mean, 2.0, 6.0);
  r.details = fmt("SetCP95 %.2f in [92, 98]; SetPerc %.2f in [2, 6]",
                  agg.set_cp95, agg.set_perc_mean);
  return r;
}

CriterionResult criterion_6band() {
  const AggregateReport& agg = bundled_aggregate("table1_J6");
  CriterionResult r;
  r.pass = in_window(agg.bands_cp95, 94.0, 99.0);
  // The informational variant sizes the band radius by the contrast span
  // rather than the full coefficient dimension.
  ScenarioConfig narrow = bundled_scenario("table1_J6");
  narrow.band_df_policy = BandDfPolicy::contrast_span;
  const AggregateReport alt = run_scenario(narrow);
  r.details = fmt(
      "BandsCP95 %.2f vs window [94, 99]; the full-dimension radius is "
      "conservative by construction (contrast-span radius gives %.2f)",
      agg.bands_cp95, alt.bands_cp95);
  return r;
}

CriterionResult criterion_7() {
  const AggregateReport adaptive5 = run_variant("table5", true);
  const AggregateReport fixed5 = run_variant("table5", false);
  const AggregateReport adaptive6 = run_variant("table6", true);
  const AggregateReport fixed6 = run_variant("table6", false);

  const bool rmse_ok = adaptive5.rmse_x_final < fixed5.rmse_x_final;
  const bool lb_ok = adaptive6.exp_out_act_s2 <= -7.0 &&
                     in_window(adaptive6.exp_out_act_s2, -7.62 - 0.6, -7.62 + 0.6);
  const bool fixed_ok = in_window(fixed6.exp_out_act_s2, -5.71 - 0.6, -5.71 + 0.6);

  CriterionResult r;
  r.pass = rmse_ok && lb_ok && fixed_ok;
  r.details = fmt(
      "final rMSE %.3f < %.3f (adaptive vs fixed); lower-bound actual-s2 "
      "outcome %.3f (<= -7, window [-8.22, -7.02]); fixed %.3f (window "
      "[-6.31, -5.11])",
      adaptive5.rmse_x_final, fixed5.rmse_x_final, adaptive6.exp_out_act_s2,
      fixed6.exp_out_act_s2);
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 8: property suite. Each property returns a failure message or "".

std::string property_noiseless_recovery(std::vector<double>* psd_floor) {
  ScenarioConfig sc;
  sc.K = 2;
  sc.J = 3;
  sc.P = 2;
  sc.n_by_centre_stage = Eigen::MatrixXi::Constant(3, 2, 40);
  sc.beta_true = Eigen::Vector2d(-1.7, -0.7);
  sc.beta_z = 1.0;
  sc.rho_targets = Eigen::Vector2d(0.0, 0.0);
  sc.centre_Z_mode = CentreZMode::fixed_list;
  sc.Z_values = Eigen::Vector3d(-0.5, 0.2, 0.8);
  sc.x_stage1 = Eigen::Vector2d(2.0, 1.5);
  sc.cost.kind = CostFunction::Kind::linear;
  sc.cost.linear = Eigen::Vector2d(1.0, 0.5);
  sc.goal = -5.0;
  sc.direction = GoalDirection::at_most;
  sc.bounds = {{0.0, 4.0}, {0.0, 3.0}};
  sc.noise_sd = 0.0;
  sc.a_noise_sd = 0.5;
  sc.replicates = 4;
  sc.seed = 4001;
  sc.grid_resolution = 0.25;

  for (int rep = 0; rep < sc.replicates; ++rep) {
    const Eigen::VectorXd Z = centre_characteristics(sc, rep);
    TrialDataset s1 = simulate_stage(sc, 1, sc.x_stage1, Z, rep);
    TrialDataset s2 = simulate_stage(sc, 2, sc.x_stage1, Z, rep);
    TrialDataset all;
    all.records = s1.records;
    all.records.insert(all.records.end(), s2.records.begin(), s2.records.end());
    all.finalize();
    const ModelFit f = fit(all);
    const double dev = (f.beta_A - sc.beta_true).cwiseAbs().maxCoeff();
    if (dev > 1e-8) {
      return fmt("noiseless recovery deviated by %.2e (tol 1e-8)", dev);
    }
    const SandwichCovariance cov = sandwich(f, all);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.cov_beta);
    psd_floor->push_back(eig.eigenvalues().minCoeff());
  }
  return "";
}

std::string property_oracle_equivalence() {
  SubstreamRng rng(8001, 0, 1, StreamPurpose::arms);
  for (int trial = 0; trial < 100; ++trial) {
    OptimizationProblem p;
    p.direction = GoalDirection::at_most;
    p.bounds = {{0.0, 1.0 + 3.0 * rng.uniform()},
                {0.0, 1.0 + 3.0 * rng.uniform()}};
    p.weights = Eigen::VectorXd::Ones(1);
    p.coefficients.beta_A =
        Eigen::Vector2d(-0.3 - 2.2 * rng.uniform(), -0.3 - 2.2 * rng.uniform());
    p.coefficients.gamma = Eigen::VectorXd::Constant(1, 0.3 * rng.normal());
    const double max_reduction =
        p.coefficients.beta_A[0] * p.bounds[0].upper +
        p.coefficients.beta_A[1] * p.bounds[1].upper + p.coefficients.gamma[0];
    p.goal = (0.3 + 0.6 * rng.uniform()) * max_reduction;
    if (trial % 2 == 0) {
      p.cost.kind = CostFunction::Kind::linear;
      p.cost.linear =
          Eigen::Vector2d(0.2 + 1.8 * rng.uniform(), 0.2 + 1.8 * rng.uniform());
    } else {
      p.cost.kind = CostFunction::Kind::polynomial;
      p.cost.terms = {
          {PolyTerm{1, 0.2 + rng.uniform()}, PolyTerm{3, 0.1 * rng.uniform()}},
          {PolyTerm{1, 0.2 + rng.uniform()}, PolyTerm{2, 0.2 * rng.uniform()}},
      };
    }
    const double oracle = brute_force_cost(p, 0.005);
    if (!std::isfinite(oracle)) continue;
    try {
      const Recommendation rec = optimize(p);
      if (rec.cost > oracle + 1e-3) {
        return fmt("problem %d: optimizer cost %.6f exceeds grid oracle %.6f",
                   trial, rec.cost, oracle);
      }
    } catch (const std::exception& e) {
      return fmt("problem %d: optimizer threw (%s) on a grid-feasible problem",
                 trial, e.what());
    }
  }
  return "";
}

std::string property_cost_scaling() {
  SubstreamRng rng(8002, 0, 1, StreamPurpose::arms);
  for (int trial = 0; trial < 20; ++trial) {
    OptimizationProblem p = reference_problem();
    p.cost.linear =
        Eigen::Vector2d(0.2 + 1.8 * rng.uniform(), 0.2 + 1.8 * rng.uniform());
    p.goal = -2.0 - 4.0 * rng.uniform();
    const Recommendation base = optimize(p);
    OptimizationProblem scaled = p;
    const double c = 0.1 + 10.0 * rng.uniform();
    scaled.cost.linear *= c;
    const Recommendation s = optimize(scaled);
    const double dev = (s.x.components - base.x.components).cwiseAbs().maxCoeff();
    if (dev > 1e-6) {
      return fmt("argmin moved %.2e under cost scaling by %.3f", dev, c);
    }
  }
  return "";
}

std::string property_monotonicity() {
  OptimizationProblem p = reference_problem();
  double previous = std::numeric_limits<double>::infinity();
  for (double goal : {-6.5, -5.5, -5.0, -4.0, -3.0, -2.0, -1.0}) {
    p.goal = goal;
    const double cost = optimize(p).cost;
    if (cost > previous + 1e-9) {
      return fmt("relaxing the goal to %.2f raised the cost %.6f -> %.6f",
                 goal, previous, cost);
    }
    previous = cost;
  }

  p = reference_problem();
  p.cost = cubic_cost();
  p.goal = -3.5;
  double last = optimize(p).cost;
  const std::vector<std::vector<Bounds>> boxes = {
      {{0.0, 3.0}, {0.0, 3.0}},
      {{0.0, 3.0}, {0.0, 2.0}},
      {{0.5, 2.6}, {0.4, 2.0}},
  };
  for (const auto& box : boxes) {
    p.bounds = box;
    const double cost = optimize(p).cost;
    if (cost < last - 1e-9) {
      return fmt("tightening the box lowered the cost %.6f -> %.6f", last,
                 cost);
    }
    last = cost;
  }
  return "";
}

std::string property_bit_reproducibility() {
  ScenarioConfig sc = bundled_scenario("table1_J6");
  sc.replicates = 24;
  const std::string a = aggregate_report_json(run_scenario(sc)).dump();
  const std::string b = aggregate_report_json(run_scenario(sc)).dump();
  if (a != b) return "identical configurations produced different aggregates";
  sc.threads = 3;
  const std::string c = aggregate_report_json(run_scenario(sc)).dump();
  if (a != c) return "the thread count changed the aggregate report";
  return "";
}

std::string property_sandwich_psd(std::vector<double>* psd_floor) {
  SubstreamRng rng(8003, 0, 1, StreamPurpose::outcome_noise);
  for (int trial = 0; trial < 10; ++trial) {
    TrialDataset ds;
    for (int stage = 1; stage <= 2; ++stage) {
      for (int j = 1; j <= 3; ++j) {
        for (int i = 0; i < 12; ++i) {
          TrialRecord r;
          r.stage = stage;
          r.centre = j;
          const bool treat = rng.uniform() < 0.5;
          r.arm = treat ? Arm::intervention : Arm::control;
          r.actual = Eigen::VectorXd::Zero(2);
          if (treat) {
            r.actual << 1.5 + rng.normal(), 1.0 + 0.5 * rng.normal();
          }
          r.outcome = -1.7 * r.actual[0] - 0.7 * r.actual[1] + 0.4 * j +
                      (1.0 + 0.5 * (stage == 2)) * rng.normal();
          ds.records.push_back(r);
        }
      }
    }
    ds.finalize();
    const ModelFit f = fit(ds);
    for (auto style : {VarianceStyle::hc0, VarianceStyle::per_centre_pooled}) {
      const SandwichCovariance cov = sandwich(f, ds, style);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.cov_beta);
      psd_floor->push_back(eig.eigenvalues().minCoeff());
    }
  }
  return "";
}

CriterionResult criterion_8() {
  std::vector<double> psd_floor;
  std::vector<std::string> failures;
  const struct {
    const char* name;
    std::function<std::string()> run;
  } properties[] = {
      {"noiseless recovery",
       [&] { return property_noiseless_recovery(&psd_floor); }},
      {"oracle equivalence", property_oracle_equivalence},
      {"cost scaling", property_cost_scaling},
      {"monotonicity", property_monotonicity},
      {"bit reproducibility", property_bit_reproducibility},
      {"sandwich PSD", [&] { return property_sandwich_psd(&psd_floor); }},
  };
  for (const auto& prop : properties) {
    const std::string failure = prop.run();
    if (!failure.empty()) {
      failures.push_back(std::string(prop.name) + ": " + failure);
    }
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (double e : psd_floor) min_eig = std::min(min_eig, e);
  if (min_eig < -1e-10) {
    failures.push_back(
        fmt("sandwich PSD: smallest covariance eigenvalue %.2e", min_eig));
  }

  CriterionResult r;
  r.pass = failures.empty();
  if (r.pass) {
    r.details = fmt(
        "6 properties held (recovery tol 1e-8; 100-problem oracle; scaling; "
        "monotonicity; reproducibility; min cov eigenvalue %.2e)",
        min_eig);
  } else {
    for (std::size_t i = 0; i < failures.size(); ++i) {
      r.details += (i ? " | " : "") + failures[i];
    }
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  std::string selection;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selection = argv[++i];
    } else {
      std::fprintf(stderr,
                   "usage: %s [--criterion 1|2|3|4|5|6sets|6band|7|8]\n",
                   argv[0]);
      return 2;
    }
  }

  const struct {
    const char* id;
    const char* name;
    CriterionResult (*run)();
  } criteria[] = {
      {"1", "linear-cost optimum", criterion_1},
      {"2", "cubic-cost optimum", criterion_2},
      {"3", "slippage calibration", criterion_3},
      {"4", "benchmark estimation quality", criterion_4},
      {"5", "null-scenario test size", criterion_5},
      {"6sets", "confidence-set coverage", criterion_6sets},
      {"6band", "confidence-band coverage", criterion_6band},
      {"7", "adaptive-vs-fixed comparison", criterion_7},
      {"8", "property suite", criterion_8},
  };

  bool matched = false;
  bool all_passed = true;
  for (const auto& c : criteria) {
    if (!selection.empty() && selection != c.id) continue;
    matched = true;
    const CriterionResult result = c.run();
    std::printf("[criterion %s] %s: %s — %s\n", c.id, c.name,
                result.pass ? "PASS" : "FAIL", result.details.c_str());
    std::fflush(stdout);
    all_passed = all_passed && result.pass;
  }
  if (!matched) {
    std::fprintf(stderr, "unknown criterion '%s'\n", selection.c_str());
    return 2;
  }
  return all_passed ? 0 : 1;
}
