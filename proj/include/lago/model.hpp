#pragma once

#include "lago/types.hpp"

namespace lago {

// Solves the estimating (normal) equations X'X b = X'y for the fixed-effects
// model. Throws RankDeficient when cond(X'X) exceeds 1e10, naming the
// collinear columns; throws on datasets spanning multiple stages where some
// centre contributes to only one stage (identification requirement).
ModelFit fit(const TrialDataset& dataset);

// Default centre weights w_j = (sum_k n_j^(k)) / n from a fitted model.
Eigen::VectorXd default_weights(const ModelFit& fit);

// Planned-size weights from a J x K size matrix.
Eigen::VectorXd planned_weights(const Eigen::MatrixXi& n_by_centre_stage);

// Weighted mean outcome beta_A'x + sum_j w_j gamma_j (+ final-stage eta when
// include_eta). Weights must be nonnegative and sum to 1.
double predict_mean(const ModelFit& fit, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& weights, bool include_eta);

// Same prediction from raw coefficients (used for truth-based metrics).
double predict_mean(const Coefficients& coef, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& weights, bool include_eta);

}  // namespace lago
