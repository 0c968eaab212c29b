#include "lago/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "lago/design.hpp"
#include "lago/errors.hpp"

namespace lago {

namespace {

// Identification requirement: when a dataset spans several stages, every
// centre must contribute to at least two of them; otherwise the per-centre
// intercept cannot be separated from stage drift for that centre.
void check_multi_stage_presence(const TrialDataset& dataset) {
  if (dataset.distinct_stages() < 2) return;
  std::map<int, std::set<int>> stages_by_centre;
  for (const auto& r : dataset.records) {
    stages_by_centre[r.centre].insert(r.stage);
  }
  for (const auto& [centre, stages] : stages_by_centre) {
    if (stages.size() < 2) {
      throw RankDeficient(
          "centre " + std::to_string(centre) +
              " contributes to a single stage of a multi-stage dataset",
          {dataset.P + centre - 1}, {"centre_" + std::to_string(centre)});
    }
  }
}

}  // namespace

ModelFit fit(const TrialDataset& dataset) {
  if (dataset.records.empty()) throw EmptyDataset();
  check_multi_stage_presence(dataset);

  const DesignMatrix d = build_design(dataset);
  const int cols = static_cast<int>(d.X.cols());
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  const Eigen::VectorXd xty = d.X.transpose() * d.y;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  const Eigen::VectorXd evals = eig.eigenvalues();  // ascending
  const double lambda_max = evals[cols - 1];
  const double lambda_min = evals[0];
  const double cond = (lambda_min > 0.0)
                          ? lambda_max / lambda_min
                          : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e10)) {
    // Report the columns loading on the null-ish direction.
    const Eigen::VectorXd v = eig.eigenvectors().col(0).cwiseAbs();
    const double vmax = v.maxCoeff();
    std::vector<int> columns;
    std::vector<std::string> names;
    for (int c = 0; c < cols; ++c) {
      if (v[c] > 0.3 * vmax) {
        columns.push_back(c);
        names.push_back(d.column_names[static_cast<std::size_t>(c)]);
      }
    }
    std::string detail = "collinear columns:";
    for (const auto& nm : names) detail += " " + nm;
    throw RankDeficient(detail, columns, names);
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  Eigen::VectorXd b = ldlt.solve(xty);
  // One step of iterative refinement keeps the normal-equation residual at
  // ~1e-15 relative even for moderately conditioned problems.
  b += ldlt.solve(xty - xtx * b);

  ModelFit f;
  f.P = d.P;
  f.J = d.J;
  f.K = d.Km1 + 1;
  f.n = dataset.n();
  f.beta_A = b.head(d.P);
  f.gamma = b.segment(d.P, d.J);
  f.eta = (d.Km1 > 0) ? Eigen::VectorXd(b.tail(d.Km1)) : Eigen::VectorXd();
  f.covariance = Eigen::MatrixXd::Zero(cols, cols);
  f.residuals = d.y - d.X * b;
  f.condition_number = cond;
  f.n_by_centre_stage = dataset.n_by_centre_stage();
  f.coefficient_names = d.column_names;
  return f;
}

Eigen::VectorXd default_weights(const ModelFit& fit) {
  return planned_weights(fit.n_by_centre_stage);
}

Eigen::VectorXd planned_weights(const Eigen::MatrixXi& n_by_centre_stage) {
  const Eigen::VectorXd per_centre =
      n_by_centre_stage.rowwise().sum().cast<double>();
  const double total = per_centre.sum();
  if (total <= 0.0) {
    throw ValidationError("cannot derive centre weights from empty sizes");
  }
  return per_centre / total;
}

namespace {

double predict_mean_impl(const Eigen::VectorXd& beta_A,
                         const Eigen::VectorXd& gamma,
                         const Eigen::VectorXd& eta, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& weights, bool include_eta) {
  if (weights.size() != gamma.size()) {
    throw WeightDimensionMismatch(static_cast<std::size_t>(weights.size()),
                                  static_cast<std::size_t>(gamma.size()));
  }
  if (x.size() != beta_A.size()) {
    throw ValidationError("package has " + std::to_string(x.size()) +
                          " components, model expects " +
                          std::to_string(beta_A.size()));
  }
  double wsum = 0.0;
  for (int j = 0; j < weights.size(); ++j) {
    if (weights[j] < -1e-12) {
      throw ValidationError("centre weights must be nonnegative");
    }
    wsum += weights[j];
  }
  if (std::fabs(wsum - 1.0) > 1e-8) {
    throw ValidationError("centre weights must sum to 1");
  }
  double out = beta_A.dot(x) + weights.dot(gamma);
  // The final-stage effect; contributes 0 when no stage estimate exists.
  if (include_eta && eta.size() > 0) out += eta[eta.size() - 1];
  return out;
}

}  // namespace

double predict_mean(const ModelFit& fit, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& weights, bool include_eta) {
  return predict_mean_impl(fit.beta_A, fit.gamma, fit.eta, x, weights,
                           include_eta);
}

double predict_mean(const Coefficients& coef, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& weights, bool include_eta) {
  return predict_mean_impl(coef.beta_A, coef.gamma, coef.eta, x, weights,
                           include_eta);
}

}  // namespace lago
