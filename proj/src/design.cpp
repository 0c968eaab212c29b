#include "lago/design.hpp"

#include "lago/errors.hpp"

namespace lago {

DesignMatrix build_design(const TrialDataset& dataset) {
  if (dataset.records.empty()) throw EmptyDataset();
  if (dataset.J < 1 || dataset.P < 1) {
    throw ValidationError("dataset must be finalized before building a design");
  }
  const int P = dataset.P;
  const int J = dataset.J;
  const int Km1 = dataset.K - 1;
  const int cols = P + J + Km1;
  const int n = dataset.n();

  DesignMatrix d;
  d.P = P;
  d.J = J;
  d.Km1 = Km1;
  d.X = Eigen::MatrixXd::Zero(n, cols);
  d.y = Eigen::VectorXd::Zero(n);
  for (int p = 0; p < P; ++p) d.column_names.push_back("a" + std::to_string(p + 1));
  for (int j = 0; j < J; ++j) {
    d.column_names.push_back("centre_" + std::to_string(j + 1));
  }
  for (int k = 2; k <= dataset.K; ++k) {
    d.column_names.push_back("stage_" + std::to_string(k));
  }

  for (int i = 0; i < n; ++i) {
    const auto& r = dataset.records[static_cast<std::size_t>(i)];
    d.X.row(i).head(P) = r.actual.transpose();
    d.X(i, P + r.centre - 1) = 1.0;
    if (r.stage >= 2) d.X(i, P + J + r.stage - 2) = 1.0;
    d.y[i] = r.outcome;
  }
  return d;
}

}  // namespace lago
