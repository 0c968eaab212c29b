#include "lago/scenarios.hpp"

#include <algorithm>

#include "lago/errors.hpp"

namespace lago {

const Eigen::VectorXd& fixed_centre_characteristics() {
  static const Eigen::VectorXd z = [] {
    Eigen::VectorXd v(20);
    v << -1.238, -0.456, -0.830, 0.340, 1.066, 1.216, 0.736, -0.481, 0.563,
        -1.246, 0.381, -1.430, -1.048, -0.219, -1.490, 1.173, -1.480, -0.430,
        -1.052, 1.523;
    return v;
  }();
  return z;
}

const std::vector<std::string>& bundled_scenario_ids() {
  static const std::vector<std::string> ids = {
      "table1_J6", "table1_J20", "null_tables", "table3",
      "table4",    "table5",     "table6",      "cubic_appendix"};
  return ids;
}

bool is_bundled_scenario(const std::string& id) {
  const auto& ids = bundled_scenario_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

namespace {

std::vector<Bounds> box(double u1, double u2) {
  return {Bounds{0.0, u1}, Bounds{0.0, u2}};
}

// Two-component benchmark with centre-level confounding: the package is
// re-optimized after stage 1 toward a weighted-mean-outcome goal of -5.
ScenarioConfig benchmark_scenario(int J) {
  ScenarioConfig sc;
  sc.K = 2;
  sc.J = J;
  sc.P = 2;
  sc.n_by_centre_stage.resize(J, 2);
  sc.n_by_centre_stage.col(0).setConstant(50);
  sc.n_by_centre_stage.col(1).setConstant(100);
  sc.beta_true = Eigen::Vector2d(-1.70, -0.70);
  sc.beta_z = 2.42;
  sc.rho_targets = Eigen::Vector2d(0.05, 0.07);
  sc.centre_Z_mode = CentreZMode::redraw_each_replicate;
  sc.x_stage1 = Eigen::Vector2d(2.0, 1.5);
  sc.cost.kind = CostFunction::Kind::linear;
  sc.cost.linear = Eigen::Vector2d(1.0, 0.5);
  sc.goal = -5.0;
  sc.direction = GoalDirection::at_most;
  sc.bounds = box(4.0, 3.0);
  sc.noise_sd = 1.0;
  sc.a_noise_sd = 1.0;
  sc.replicates = 500;
  sc.seed = 2026;
  return sc;
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

// Small high-noise two-stage trial: three centres with strong centre
// effects, delivered packages that deviate from the recommendation by a
// per-centre offset, and outcome noise of 20 units.
ScenarioConfig cvd_scenario(double goal, LowerBoundPolicy policy) {
  ScenarioConfig sc;
  sc.K = 2;
  sc.J = 3;
  sc.P = 2;
  sc.n_by_centre_stage.resize(3, 2);
  sc.n_by_centre_stage << 80, 100, 79, 100, 79, 100;
  sc.beta_true = Eigen::Vector2d(-1.59, -0.59);
  sc.beta_z = 1.0;
  sc.rho_targets = Eigen::Vector2d(0.0, 0.0);
  sc.centre_Z_mode = CentreZMode::fixed_list;
  sc.Z_values = Eigen::Vector3d(-2.63, 0.58, 2.11);
  sc.x_stage1 = Eigen::Vector2d(3.4, 1.0);
  sc.cost.kind = CostFunction::Kind::linear;
  sc.cost.linear = Eigen::Vector2d(1.0, 1.0);
  sc.goal = goal;
  sc.direction = GoalDirection::at_most;
  sc.bounds = box(6.5, 3.0);
  sc.lower_bound_policy = policy;
  sc.noise_sd = 20.0;
  sc.a_noise_sd = 0.7;
  sc.eta_offsets.resize(3, 2);
  sc.eta_offsets << -0.8, -0.4, 0.2, 0.1, 0.6, 0.3;
  sc.replicates = 500;
  sc.seed = 12345;
  return sc;
}

}  // namespace

ScenarioConfig bundled_scenario(const std::string& id) {
  if (id == "table1_J6") return benchmark_scenario(6);
  if (id == "table1_J20") return benchmark_scenario(20);
  if (id == "null_tables") {
    ScenarioConfig sc = benchmark_scenario(6);
    sc.beta_true = Eigen::Vector2d(0.0, 0.0);
    sc.rho_targets = Eigen::Vector2d(0.1, 0.2);
    sc.replicates = 2000;
    sc.seed = 99;
    sc.compute_set_band = false;
    return sc;
  }
  if (id == "cubic_appendix") {
    ScenarioConfig sc = benchmark_scenario(6);
    sc.cost = cubic_cost();
    return sc;
  }
  if (id == "table3") return cvd_scenario(-5.0, LowerBoundPolicy::none);
  if (id == "table4") {
    return cvd_scenario(-5.0, LowerBoundPolicy::previous_recommendation);
  }
  if (id == "table5") return cvd_scenario(-9.0, LowerBoundPolicy::none);
  if (id == "table6") {
    return cvd_scenario(-9.0, LowerBoundPolicy::previous_recommendation);
  }
  throw UnknownTable(id);
}

}  // namespace lago
