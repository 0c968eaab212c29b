#pragma once

#include <vector>

#include "lago/types.hpp"

namespace lago {

// Delivered-intervention slippage scale eta = rho / sqrt(1 - rho^2) that makes
// corr(A_p, Z_j) equal the target rho when the residual noise is standard
// normal. Requires |rho| < 1.
double eta_from_rho(double rho);

// Generates one stage's participant records at recommended package x with
// centre characteristics Z. Intervention-arm deliveries are
// A_p = x_p + eta_p Z_j + offset_{jp} + a_noise_sd * xi (unclamped); outcomes
// are beta'A + beta_z Z_j + noise_sd * eps. Control rows have A = 0.
// Fully determined by (config.seed, replicate, stage).
TrialDataset simulate_stage(const ScenarioConfig& config, int stage,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& Z,
                            int replicate);

// Centre characteristics for a replicate (fixed list or redrawn per
// replicate from the replicate's substream).
Eigen::VectorXd centre_characteristics(const ScenarioConfig& config,
                                       int replicate);

// One full two-stage pass: stage-1 data, interim fit, stage-2 recommendation
// (or the stage-1 package when use_lago is off), stage-2 data, combined fit,
// tests, set/band, final optimization, and truth-based metrics.
ReplicateMetrics run_replicate(const ScenarioConfig& config, int replicate);

// Runs all replicates and aggregates. Optionally exposes the per-replicate
// rows. Aggregation is order-independent: results live in a replicate-indexed
// vector and are reduced sequentially afterwards.
AggregateReport run_scenario(const ScenarioConfig& config,
                             std::vector<ReplicateMetrics>* per_replicate_out =
                                 nullptr);

// The optimization problem implied by a scenario's true coefficients for a
// given Z realization (used for truth-based metrics and as the oracle).
OptimizationProblem true_problem(const ScenarioConfig& config,
                                 const Eigen::VectorXd& Z,
                                 const Eigen::VectorXd& weights);

// Planned centre weights for a scenario (from_data: proportional to total
// planned size; equal: 1/J).
Eigen::VectorXd scenario_weights(const ScenarioConfig& config);

}  // namespace lago
