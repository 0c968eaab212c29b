#pragma once

#include "lago/types.hpp"

namespace lago {

// Robust (sandwich) covariance of the stacked coefficient vector.
// hc0 uses per-observation squared residuals; per_centre_pooled replaces them
// with the pooled within-centre mean squared residual.
SandwichCovariance sandwich(const ModelFit& fit, const TrialDataset& dataset,
                            VarianceStyle style = VarianceStyle::hc0);

// Wald z-test for a single intervention coefficient (component_index 1-based).
TestResult wald_individual(const ModelFit& fit, const SandwichCovariance& cov,
                           int component_index);

// Joint Wald chi-square test of all intervention coefficients being zero.
TestResult wald_joint(const ModelFit& fit, const SandwichCovariance& cov);

// Randomization-indicator test: refits the model with a single 0/1 arm column
// in place of the intervention components and Wald-tests its coefficient.
TestResult delta_test(const TrialDataset& dataset);

// Contrast vector (x', w_1..w_J, 0,...,0,1): weight 1 sits on the final-stage
// indicator (absent for single-stage fits).
Eigen::VectorXd mean_contrast(const ModelFit& fit, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& weights);

// Pointwise confidence interval for the weighted mean outcome at package x.
ConfidenceInterval ci_mean(const ModelFit& fit, const SandwichCovariance& cov,
                           const Eigen::VectorXd& x,
                           const Eigen::VectorXd& weights, double level = 0.95);

// True iff the ci_mean interval at x contains theta.
bool ci_mean_contains(const ModelFit& fit, const SandwichCovariance& cov,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& weights,
                      double level, double theta);

// Confidence set for the optimal package: grid points whose mean-outcome
// interval contains the goal.
ConfidenceSetResult confidence_set(const ModelFit& fit,
                                   const SandwichCovariance& cov,
                                   const OptimizationProblem& problem,
                                   double grid_resolution, double level = 0.95);

// Simultaneous confidence band for the mean outcome over a grid on the box.
ConfidenceBandResult confidence_band(
    const ModelFit& fit, const SandwichCovariance& cov,
    const Eigen::VectorXd& weights, const std::vector<Bounds>& box,
    double grid_resolution, double level = 0.95,
    BandDfPolicy policy = BandDfPolicy::coefficient_dim);

}  // namespace lago
