#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "lago/errors.hpp"
#include "lago/optimizer.hpp"
#include "lago/report.hpp"
#include "lago/sim.hpp"
#include "lago/types.hpp"

using namespace lago;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig sc;
  sc.K = 2;
  sc.J = 3;
  sc.P = 2;
  sc.n_by_centre_stage = Eigen::MatrixXi::Constant(3, 2, 40);
  sc.beta_true = Eigen::Vector2d(-1.7, -0.7);
  sc.beta_z = 1.0;
  sc.rho_targets = Eigen::Vector2d(0.05, 0.07);
  sc.centre_Z_mode = CentreZMode::fixed_list;
  sc.Z_values = Eigen::Vector3d(-0.5, 0.2, 0.8);
  sc.x_stage1 = Eigen::Vector2d(2.0, 1.5);
  sc.cost.kind = CostFunction::Kind::linear;
  sc.cost.linear = Eigen::Vector2d(1.0, 0.5);
  sc.goal = -5.0;
  sc.direction = GoalDirection::at_most;
  sc.bounds = {{0.0, 4.0}, {0.0, 3.0}};
  sc.noise_sd = 1.0;
  sc.a_noise_sd = 1.0;
  sc.replicates = 8;
  sc.seed = 321;
  sc.grid_resolution = 0.25;
  sc.level = 0.95;
  sc.compute_set_band = true;
  return sc;
}

ScenarioConfig noiseless_outcome_scenario() {
  ScenarioConfig sc = small_scenario();
  sc.noise_sd = 0.0;   // outcomes are exact linear functions of deliveries
  sc.a_noise_sd = 0.5; // deliveries still vary, keeping the design full rank
  sc.rho_targets = Eigen::Vector2d(0.0, 0.0);
  return sc;
}

}  // namespace

TEST_CASE("slippage scale reproduces the target correlations") {
  CHECK(eta_from_rho(0.0) == doctest::Approx(0.0));
  CHECK(eta_from_rho(0.05) ==
        doctest::Approx(0.050062617432175889).epsilon(1e-14));
  CHECK(eta_from_rho(0.07) ==
        doctest::Approx(0.070172132847154955).epsilon(1e-14));
  CHECK(eta_from_rho(0.10) ==
        doctest::Approx(0.10050378152592121).epsilon(1e-14));
  CHECK(eta_from_rho(0.20) ==
        doctest::Approx(0.20412414523193154).epsilon(1e-14));
  CHECK(eta_from_rho(-0.10) ==
        doctest::Approx(-0.10050378152592121).epsilon(1e-14));
  CHECK_THROWS_AS(eta_from_rho(1.0), RhoOutOfRange);
  CHECK_THROWS_AS(eta_from_rho(-1.0), RhoOutOfRange);
  CHECK_THROWS_AS(eta_from_rho(1.8), RhoOutOfRange);
}

TEST_CASE("centre characteristics honour the fixed list and replicate substreams") {
  const ScenarioConfig sc = small_scenario();
  const Eigen::VectorXd z = centre_characteristics(sc, 4);
  REQUIRE(z.size() == 3);
  CHECK(z[0] == doctest::Approx(-0.5));
  CHECK(z[1] == doctest::Approx(0.2));
  CHECK(z[2] == doctest::Approx(0.8));

  ScenarioConfig redraw = sc;
  redraw.centre_Z_mode = CentreZMode::redraw_each_replicate;
  const Eigen::VectorXd z0 = centre_characteristics(redraw, 0);
  const Eigen::VectorXd z0_again = centre_characteristics(redraw, 0);
  const Eigen::VectorXd z1 = centre_characteristics(redraw, 1);
  CHECK((z0 - z0_again).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((z0 - z1).cwiseAbs().maxCoeff() > 1e-12);
}

TEST_CASE("stage simulation is deterministic and structurally correct") {
  const ScenarioConfig sc = small_scenario();
  const Eigen::VectorXd z = centre_characteristics(sc, 2);
  const TrialDataset a = simulate_stage(sc, 1, sc.x_stage1, z, 2);
  const TrialDataset b = simulate_stage(sc, 1, sc.x_stage1, z, 2);

  REQUIRE(a.n() == 120);
  REQUIRE(a.n() == b.n());
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a.records[i].stage == 1);
    CHECK(a.records[i].centre == b.records[i].centre);
    CHECK(a.records[i].arm == b.records[i].arm);
    CHECK((a.records[i].actual - b.records[i].actual).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK(a.records[i].outcome == doctest::Approx(b.records[i].outcome));
    if (a.records[i].arm == Arm::control) {
      CHECK(a.records[i].actual.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
  }

  // 1:1 allocation gives exactly 20 intervention participants per 40.
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(3, 2);
  for (const auto& r : a.records) {
    counts(r.centre - 1, static_cast<int>(r.arm)) += 1;
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(counts(j, 0) == 20);
    CHECK(counts(j, 1) == 20);
  }

  // A different replicate index produces different noise.
  const TrialDataset c = simulate_stage(sc, 1, sc.x_stage1, z, 3);
  bool any_different = false;
  for (int i = 0; i < a.n() && !any_different; ++i) {
    any_different = std::abs(a.records[i].outcome - c.records[i].outcome) > 1e-12;
  }
  CHECK(any_different);
}

TEST_CASE("with all noise removed the generator is exactly linear") {
  ScenarioConfig sc = small_scenario();
  sc.noise_sd = 0.0;
  sc.a_noise_sd = 0.0;
  sc.rho_targets = Eigen::Vector2d(0.0, 0.0);
  const Eigen::VectorXd z = centre_characteristics(sc, 0);
  const TrialDataset ds = simulate_stage(sc, 1, sc.x_stage1, z, 0);
  for (const auto& r : ds.records) {
    const double zj = z[r.centre - 1];
    if (r.arm == Arm::intervention) {
      CHECK((r.actual - sc.x_stage1).cwiseAbs().maxCoeff() ==
            doctest::Approx(0.0));
      CHECK(r.outcome ==
            doctest::Approx(sc.beta_true.dot(sc.x_stage1) + sc.beta_z * zj)
                .epsilon(1e-12));
    } else {
      CHECK(r.outcome == doctest::Approx(sc.beta_z * zj).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-centre delivery offsets shift the mean delivered package") {
  ScenarioConfig sc = small_scenario();
  sc.noise_sd = 0.0;
  sc.a_noise_sd = 0.0;
  sc.rho_targets = Eigen::Vector2d(0.0, 0.0);
  sc.eta_offsets = Eigen::MatrixXd(3, 2);
  sc.eta_offsets << -0.8, -0.4, 0.2, 0.1, 0.6, 0.3;
  const Eigen::VectorXd z = centre_characteristics(sc, 0);
  const TrialDataset ds = simulate_stage(sc, 2, sc.x_stage1, z, 0);
  for (const auto& r : ds.records) {
    if (r.arm != Arm::intervention) continue;
    const Eigen::VectorXd expected =
        sc.x_stage1 + sc.eta_offsets.row(r.centre - 1).transpose();
    CHECK((r.actual - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("a noiseless-outcome replicate recovers the truth end to end") {
  const ScenarioConfig sc = noiseless_outcome_scenario();
  const ReplicateMetrics m = run_replicate(sc, 0);
  REQUIRE_FALSE(m.failed);
  CHECK((m.beta_hat - sc.beta_true).cwiseAbs().maxCoeff() < 1e-8);
  // Zero outcome noise collapses every standard error to zero.
  CHECK(m.se.cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(m.interim_shrunk);
  CHECK_FALSE(m.final_shrunk);
  CHECK((m.xopt_final - m.true_xopt).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((m.xopt_stage2 - m.true_xopt).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(m.true_mean_at_final == doctest::Approx(sc.goal).epsilon(1e-6));
  CHECK(m.set_fraction >= 0.0);
  CHECK(m.set_fraction <= 1.0);

  // Recommended-package metrics are exact functions of the inputs.
  CHECK(m.cost_rec_s1 ==
        doctest::Approx(sc.cost.linear.dot(sc.x_stage1)).epsilon(1e-12));
  const Eigen::VectorXd z = centre_characteristics(sc, 0);
  const double equal_gamma_bar = sc.beta_z * z.mean();
  CHECK(m.exp_out_rec_s1 ==
        doctest::Approx(sc.beta_true.dot(sc.x_stage1) + equal_gamma_bar)
            .epsilon(1e-9));
  CHECK(m.avg_obs_out_s1 ==
        doctest::Approx(m.exp_out_act_s1).epsilon(1e-9));
}

TEST_CASE("disabling the adaptive step keeps the first-stage package in stage two") {
  ScenarioConfig sc = noiseless_outcome_scenario();
  sc.use_lago = false;
  const ReplicateMetrics m = run_replicate(sc, 0);
  REQUIRE_FALSE(m.failed);
  CHECK((m.xopt_stage2 - sc.x_stage1).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  // The final analysis still estimates the truth exactly.
  CHECK((m.beta_hat - sc.beta_true).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((m.xopt_final - m.true_xopt).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("identical seeds reproduce bit-identical aggregate reports") {
  const ScenarioConfig sc = small_scenario();
  std::vector<ReplicateMetrics> rows_a;
  std::vector<ReplicateMetrics> rows_b;
  const AggregateReport a = run_scenario(sc, &rows_a);
  const AggregateReport b = run_scenario(sc, &rows_b);
  CHECK(aggregate_report_json(a).dump() == aggregate_report_json(b).dump());
  REQUIRE(rows_a.size() == rows_b.size());
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    CHECK(rows_a[i].beta_hat[0] == doctest::Approx(rows_b[i].beta_hat[0]));
    CHECK(rows_a[i].xopt_final[1] == doctest::Approx(rows_b[i].xopt_final[1]));
  }

  ScenarioConfig other_seed = sc;
  other_seed.seed = 322;
  const AggregateReport c = run_scenario(other_seed);
  CHECK(aggregate_report_json(a).dump() != aggregate_report_json(c).dump());
}

TEST_CASE("the thread count never changes the results") {
  ScenarioConfig sc = small_scenario();
  sc.replicates = 12;
  sc.threads = 1;
  const AggregateReport serial = run_scenario(sc);
  sc.threads = 3;
  const AggregateReport parallel = run_scenario(sc);
  CHECK(aggregate_report_json(serial).dump() ==
        aggregate_report_json(parallel).dump());
}

TEST_CASE("well-posed scenarios run all replicates without failures") {
  ScenarioConfig sc = small_scenario();
  sc.replicates = 30;
  std::vector<ReplicateMetrics> rows;
  const AggregateReport agg = run_scenario(sc, &rows);
  CHECK(agg.replicates_requested == 30);
  CHECK(agg.replicates_run == 30);
  CHECK(agg.failed_replicates == 0);
  REQUIRE(rows.size() == 30);
  for (const auto& row : rows) {
    CHECK_FALSE(row.failed);
    CHECK(row.set_fraction >= 0.0);
    CHECK(row.set_fraction <= 1.0);
  }
  CHECK(std::isfinite(agg.rmse_x_stage2));
  CHECK(std::isfinite(agg.rmse_x_final));
  CHECK(agg.set_cp95 >= 50.0);  // nominal 95% coverage over 30 replicates
  CHECK(agg.cp95.minCoeff() >= 50.0);
}

TEST_CASE("relative bias is undefined for null components") {
  ScenarioConfig sc = small_scenario();
  sc.beta_true = Eigen::Vector2d(0.0, 0.0);
  sc.goal = -0.5;  // likely infeasible under the null; shrinkage keeps it running
  sc.replicates = 6;
  sc.compute_set_band = false;
  const AggregateReport agg = run_scenario(sc);
  CHECK(agg.failed_replicates == 0);
  CHECK(std::isnan(agg.rel_bias_pct[0]));
  CHECK(std::isnan(agg.rel_bias_pct[1]));
}

TEST_CASE("scenario validation names the offending keys") {
  ScenarioConfig sc = small_scenario();
  sc.replicates = 0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);

  sc = small_scenario();
  sc.rho_targets = Eigen::Vector2d(0.05, 1.2);
  CHECK_THROWS_AS(sc.validate(), ValidationError);

  sc = small_scenario();
  sc.n_by_centre_stage = Eigen::MatrixXi::Constant(2, 2, 40);  // J mismatch
  CHECK_THROWS_AS(sc.validate(), ConfigError);

  sc = small_scenario();
  sc.Z_values = Eigen::VectorXd();  // fixed_list needs J values
  CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("scenario weights follow the planned sizes or equal weighting") {
  ScenarioConfig sc = small_scenario();
  sc.n_by_centre_stage << 10, 30, 20, 20, 5, 15;
  sc.weights_mode = WeightsMode::from_data;
  const Eigen::VectorXd w = scenario_weights(sc);
  CHECK(w[0] == doctest::Approx(0.4));
  CHECK(w[1] == doctest::Approx(0.4));
  CHECK(w[2] == doctest::Approx(0.2));

  sc.weights_mode = WeightsMode::equal;
  const Eigen::VectorXd e = scenario_weights(sc);
  for (int j = 0; j < 3; ++j) CHECK(e[j] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("the truth-implied problem uses the scenario coefficients") {
  const ScenarioConfig sc = small_scenario();
  const Eigen::VectorXd z = centre_characteristics(sc, 0);
  const Eigen::VectorXd w = scenario_weights(sc);
  const OptimizationProblem truth = true_problem(sc, z, w);
  CHECK((truth.coefficients.beta_A - sc.beta_true).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  CHECK((truth.coefficients.gamma - sc.beta_z * z).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  CHECK(truth.goal == doctest::Approx(sc.goal));
  CHECK(truth.lower_bound_policy == LowerBoundPolicy::none);
  CHECK(truth.bounds.size() == 2);
  // The truth problem carries no stage coefficient at all.
  CHECK(truth.coefficients.eta.size() == 0);

  const Recommendation opt = optimize(truth);
  CHECK(opt.feasible);
  CHECK(opt.achieved_mean <= sc.goal + 1e-9);
}
