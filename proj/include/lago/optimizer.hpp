#pragma once

#include "lago/types.hpp"

namespace lago {

// Exact polynomial evaluation of the cost at x (defined everywhere).
double evaluate_cost(const CostFunction& cost, const Eigen::VectorXd& x);

// Cost-minimizing package on the box subject to the goal constraint.
// Linear costs are solved by exact greedy allocation on cost-effectiveness
// ratios; polynomial costs by coarse-grid seeding (0.01 per component) plus
// multi-start projected coordinate descent refined to 1e-4 or better.
// Cost ties within 1e-9 resolve to the lexicographically smallest package.
// Throws Infeasible when the goal is unreachable anywhere on the box.
Recommendation optimize(const OptimizationProblem& problem);

// Next-stage recommendation from a fitted model: the constraint uses the
// fit's coefficients with the stage effect excluded (no estimate for the
// upcoming stage). lower_bound_policy previous_recommendation raises each
// lower bound to the previous package (clamped to the upper bound). On an
// infeasible goal the previous package is returned with shrunk_to_previous
// set instead of throwing.
Recommendation recommend_next_stage(const ModelFit& fit,
                                    const SandwichCovariance& cov,
                                    const OptimizationProblem& problem,
                                    const Recommendation& previous,
                                    LowerBoundPolicy policy);

// Corner of the box with the largest goal-direction gain (used as the
// fallback reference when the true problem is infeasible).
Eigen::VectorXd max_gain_corner(const OptimizationProblem& problem);

}  // namespace lago
