#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace lago {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// A package of P component intensities with per-component box bounds.
struct InterventionPackage {
  Eigen::VectorXd components;
  std::vector<Bounds> bounds;

  int P() const { return static_cast<int>(components.size()); }
  // Clamps every component into its bounds.
  void clamp();
  bool within_bounds(double tol = 1e-12) const;
  void validate() const;  // throws ValidationError on malformed bounds/sizes
};

enum class Arm { control = 0, intervention = 1 };

struct TrialRecord {
  int stage = 1;           // 1-based
  int centre = 1;          // 1-based
  Arm arm = Arm::control;
  Eigen::VectorXd actual;  // delivered package; all-zero for control rows
  double outcome = 0.0;
};

// Participant-level dataset. finalize() derives K/J/P from the records and
// validates the structural invariants (contiguous centres, control rows
// all-zero, consistent component count).
struct TrialDataset {
  std::vector<TrialRecord> records;
  int K = 0;  // number of stages (max stage index present)
  int J = 0;  // number of centres
  int P = 0;  // number of intervention components

  void finalize();
  int n() const { return static_cast<int>(records.size()); }
  // Count of distinct stages actually present.
  int distinct_stages() const;
  // True when every record lives in one single stage (interim datasets).
  bool single_stage() const { return distinct_stages() <= 1; }
  // J x K record counts.
  Eigen::MatrixXi n_by_centre_stage() const;
};

// Design matrix with response: columns [a_1..a_P | centre 1..J | stage 2..K].
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  int P = 0;
  int J = 0;
  int Km1 = 0;  // number of stage-indicator columns (K-1; 0 for single stage)
};

struct ModelFit {
  Eigen::VectorXd beta_A;  // P
  Eigen::VectorXd gamma;   // J
  Eigen::VectorXd eta;     // K-1 (empty for single-stage datasets)
  // Robust covariance of the stacked coefficients; zero until the sandwich
  // estimator fills it.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;  // per record, in record order
  double condition_number = 0.0;
  Eigen::MatrixXi n_by_centre_stage;  // J x K
  std::vector<std::string> coefficient_names;
  int P = 0;
  int J = 0;
  int K = 1;
  int n = 0;

  int dim() const { return P + J + (K - 1); }
  Eigen::VectorXd coefficients() const;  // stacked (beta_A, gamma, eta)
};

// ---------------------------------------------------------------------------
// Inference types

struct SandwichCovariance {
  Eigen::MatrixXd J_star_hat;  // (1/n) X'X
  Eigen::MatrixXd V_hat;       // (1/n) sum x x' eps^2
  Eigen::MatrixXd cov_beta;    // (1/n) Jinv V Jinv'
};

enum class VarianceStyle { hc0, per_centre_pooled };

enum class TestKind { wald_individual, wald_joint, delta_randomized };

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  TestKind kind = TestKind::wald_individual;
};

enum class ConfidenceKind { interval, set, band };

struct ConfidenceInterval {
  double level = 0.95;
  double centre = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Regular grid over a P-dimensional box: point i along axis p sits at
// lower_p + i * resolution.
struct GridSpec {
  std::vector<Bounds> box;
  double resolution = 0.05;
  std::vector<int> shape;  // points per axis

  static GridSpec over(const std::vector<Bounds>& box, double resolution);
  std::size_t size() const;
  // Coordinates of the flattened index (row-major, first axis slowest).
  Eigen::VectorXd point(std::size_t flat_index) const;
};

struct ConfidenceSetResult {
  double level = 0.95;
  GridSpec grid;
  std::vector<std::uint8_t> mask;  // 1 = grid point inside the set
  double set_perc = 0.0;           // 100 * |mask| / |grid|
};

enum class BandDfPolicy { coefficient_dim, contrast_span };

struct ConfidenceBandResult {
  double level = 0.95;
  GridSpec grid;
  std::vector<double> centre;      // point prediction per grid point
  std::vector<double> half_width;  // simultaneous half-width per grid point
  int df = 0;                      // chi-square degrees of freedom used
};

// ---------------------------------------------------------------------------
// Optimizer types

struct PolyTerm {
  int power = 1;
  double coefficient = 0.0;
};

struct CostFunction {
  enum class Kind { linear, polynomial };
  Kind kind = Kind::linear;
  Eigen::VectorXd linear;                    // P nonnegative coefficients
  std::vector<std::vector<PolyTerm>> terms;  // per-component term lists

  int P() const;
  void validate() const;
};

enum class GoalDirection { at_least, at_most };

enum class LowerBoundPolicy { none, previous_recommendation };

struct Coefficients {
  Eigen::VectorXd beta_A;
  Eigen::VectorXd gamma;
  Eigen::VectorXd eta;  // may be empty
};

struct OptimizationProblem {
  CostFunction cost;
  double goal = 0.0;
  GoalDirection direction = GoalDirection::at_most;
  std::vector<Bounds> bounds;
  Eigen::VectorXd weights;  // J centre weights, sum 1
  Coefficients coefficients;
  bool include_eta = true;
  LowerBoundPolicy lower_bound_policy = LowerBoundPolicy::none;
};

struct Recommendation {
  InterventionPackage x;
  bool feasible = false;
  double cost = 0.0;
  double achieved_mean = 0.0;
  bool shrunk_to_previous = false;
};

// ---------------------------------------------------------------------------
// Simulation types

enum class CentreZMode { fixed_list, redraw_each_replicate };

enum class WeightsMode { from_data, equal };

struct ArmRatio {
  int intervention = 1;
  int control = 1;
};

struct ScenarioConfig {
  int K = 2;
  int J = 0;
  int P = 0;
  Eigen::MatrixXi n_by_centre_stage;  // J x K planned sizes
  Eigen::VectorXd beta_true;          // P
  double beta_z = 2.42;
  Eigen::VectorXd rho_targets;  // P, each in (-1,1)
  CentreZMode centre_Z_mode = CentreZMode::redraw_each_replicate;
  Eigen::VectorXd Z_values;  // J values when fixed_list
  Eigen::VectorXd x_stage1;  // P
  CostFunction cost;
  double goal = 0.0;
  GoalDirection direction = GoalDirection::at_most;
  std::vector<Bounds> bounds;
  LowerBoundPolicy lower_bound_policy = LowerBoundPolicy::none;
  double noise_sd = 1.0;    // outcome noise scale
  double a_noise_sd = 1.0;  // delivered-intervention noise scale
  Eigen::MatrixXd eta_offsets;  // optional J x P per-centre mean offsets
  ArmRatio arm_ratio;
  int replicates = 1;
  std::uint64_t seed = 0;
  bool use_lago = true;
  WeightsMode weights_mode = WeightsMode::from_data;
  double grid_resolution = 0.05;
  double level = 0.95;
  BandDfPolicy band_df_policy = BandDfPolicy::coefficient_dim;
  bool compute_set_band = true;
  int threads = 1;

  void validate() const;  // throws ConfigError naming the offending key
};

struct ReplicateMetrics {
  int replicate = 0;
  bool failed = false;
  std::string failure;

  Eigen::VectorXd beta_hat;  // P
  Eigen::VectorXd se;        // P
  std::vector<std::uint8_t> covered;         // per component
  std::vector<std::uint8_t> rej_individual;  // per component, alpha=0.05
  bool rej_joint = false;
  double p_joint = 1.0;
  double p_delta = 1.0;

  Eigen::VectorXd xopt_stage2;  // interim recommendation (delivered package)
  Eigen::VectorXd xopt_final;
  Eigen::VectorXd true_xopt;
  bool interim_shrunk = false;
  bool final_shrunk = false;

  bool set_covers_true = false;
  double set_fraction = 0.0;
  bool band_covers_all = false;

  double true_mean_at_stage2 = 0.0;  // true mean outcome at the stage-2 package
  double true_mean_at_final = 0.0;   // true mean outcome at the final package

  double cost_actual_s1 = 0.0;  // mean delivered-package cost, stage 1
  double cost_actual_s2 = 0.0;
  double cost_rec_s1 = 0.0;  // cost of the recommended package per stage
  double cost_rec_s2 = 0.0;

  // Equal-centre-weighted expected outcomes under true coefficients.
  double exp_out_act_s1 = 0.0;
  double exp_out_act_s2 = 0.0;
  double exp_out_rec_s1 = 0.0;
  double exp_out_rec_s2 = 0.0;
  double exp_out_estopt = 0.0;

  double avg_obs_out_s1 = 0.0;  // observed intervention-arm mean outcome
  double avg_obs_out_s2 = 0.0;
};

struct AggregateReport {
  int replicates_requested = 0;
  int replicates_run = 0;
  int failed_replicates = 0;

  Eigen::VectorXd rel_bias_pct;       // NaN where beta*_p == 0
  Eigen::VectorXd se_over_empsd_pct;
  Eigen::VectorXd cp95;
  Eigen::VectorXd alpha_individual;
  double alpha_joint = 0.0;
  double alpha_delta = 0.0;

  Eigen::VectorXd bias_x_stage2;
  Eigen::VectorXd bias_x_final;
  double rmse_x_stage2 = 0.0;  // sqrt(mean ||x_stage2 - x_true||^2)
  double rmse_x_final = 0.0;

  double trueopt_stage2_q025 = 0.0;
  double trueopt_stage2_q975 = 0.0;
  double trueopt_final_q025 = 0.0;
  double trueopt_final_q975 = 0.0;

  double set_cp95 = 0.0;
  double set_perc_mean = 0.0;
  double bands_cp95 = 0.0;

  double mean_cost_actual_s1 = 0.0;
  double mean_cost_actual_s2 = 0.0;
  double mean_cost_rec_s1 = 0.0;
  double mean_cost_rec_s2 = 0.0;

  double exp_out_act_s1 = 0.0;
  double exp_out_act_s2 = 0.0;
  double exp_out_rec_s1 = 0.0;
  double exp_out_rec_s2 = 0.0;
  double exp_out_estopt = 0.0;

  double avg_obs_out_s1 = 0.0;
  double avg_obs_out_s2 = 0.0;

  int interim_shrunk_count = 0;
  int final_shrunk_count = 0;
};

}  // namespace lago
