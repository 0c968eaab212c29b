#include "lago/inference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "lago/design.hpp"
#include "lago/errors.hpp"
#include "lago/model.hpp"
#include "lago/stats.hpp"

namespace lago {

SandwichCovariance sandwich(const ModelFit& fit, const TrialDataset& dataset,
                            VarianceStyle style) {
  if (dataset.n() != fit.n) {
    throw ValidationError("sandwich requires the dataset the model was fit on");
  }
  const DesignMatrix d = build_design(dataset);
  const int n = fit.n;
  const int dim = static_cast<int>(d.X.cols());
  if (dim != fit.dim()) {
    throw ValidationError("design dimension does not match the fit");
  }

  Eigen::VectorXd weight_sq(n);
  if (style == VarianceStyle::hc0) {
    weight_sq = fit.residuals.array().square();
  } else {
    // Pooled within-centre variance: every observation in centre j carries
    // the centre's mean squared residual.
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(fit.J);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(fit.J);
    for (int i = 0; i < n; ++i) {
      const int j = dataset.records[static_cast<std::size_t>(i)].centre - 1;
      ss[j] += fit.residuals[i] * fit.residuals[i];
      cnt[j] += 1.0;
    }
    for (int i = 0; i < n; ++i) {
      const int j = dataset.records[static_cast<std::size_t>(i)].centre - 1;
      weight_sq[i] = ss[j] / cnt[j];
    }
  }

  SandwichCovariance s;
  s.J_star_hat = (d.X.transpose() * d.X) / static_cast<double>(n);
  s.V_hat = (d.X.transpose() * weight_sq.asDiagonal() * d.X) /
            static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.J_star_hat);
  const double lmin = eig.eigenvalues()[0];
  const double lmax = eig.eigenvalues()[dim - 1];
  if (!(lmin > 0.0) || lmax / lmin > 1e12) throw SingularJ();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s.J_star_hat);
  const Eigen::MatrixXd jinv_v = ldlt.solve(s.V_hat);
  Eigen::MatrixXd cov =
      ldlt.solve(jinv_v.transpose()).transpose() / static_cast<double>(n);
  s.cov_beta = 0.5 * (cov + cov.transpose());  // enforce exact symmetry
  return s;
}

TestResult wald_individual(const ModelFit& fit, const SandwichCovariance& cov,
                           int component_index) {
  if (component_index < 1 || component_index > fit.P) {
    throw IndexOutOfRange(component_index, fit.P);
  }
  const int p = component_index - 1;
  const double se = std::sqrt(std::max(0.0, cov.cov_beta(p, p)));
  TestResult t;
  t.kind = TestKind::wald_individual;
  t.df = 1;
  if (se == 0.0) {
    t.statistic = (fit.beta_A[p] == 0.0)
                      ? 0.0
                      : std::numeric_limits<double>::infinity();
  } else {
    t.statistic = fit.beta_A[p] / se;
  }
  t.p_value = std::isinf(t.statistic)
                  ? 0.0
                  : 2.0 * stats::normal_cdf(-std::fabs(t.statistic));
  return t;
}

TestResult wald_joint(const ModelFit& fit, const SandwichCovariance& cov) {
  const int P = fit.P;
  const Eigen::MatrixXd block = cov.cov_beta.topLeftCorner(P, P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
  const double lmin = eig.eigenvalues()[0];
  const double lmax = eig.eigenvalues()[P - 1];
  TestResult t;
  t.kind = TestKind::wald_joint;
  t.df = P;
  if (fit.beta_A.isZero(0.0)) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    return t;
  }
  if (!(lmin > 0.0) || lmax / lmin > 1e12) throw SingularBlock();
  const Eigen::VectorXd solved = block.ldlt().solve(fit.beta_A);
  t.statistic = fit.beta_A.dot(solved);
  t.p_value = 1.0 - stats::chi2_cdf(t.statistic, static_cast<double>(P));
  return t;
}

TestResult delta_test(const TrialDataset& dataset) {
  bool has_intervention = false;
  bool has_control = false;
  for (const auto& r : dataset.records) {
    if (r.arm == Arm::intervention) has_intervention = true;
    if (r.arm == Arm::control) has_control = true;
    if (has_intervention && has_control) break;
  }
  if (!has_intervention || !has_control) throw SingleArm();

  // Replace the intervention columns with a single randomization indicator.
  TrialDataset indicator = dataset;
  for (auto& r : indicator.records) {
    Eigen::VectorXd one(1);
    one[0] = (r.arm == Arm::intervention) ? 1.0 : 0.0;
    r.actual = one;
  }
  indicator.finalize();
  const ModelFit f = fit(indicator);
  const SandwichCovariance s = sandwich(f, indicator);
  TestResult t = wald_individual(f, s, 1);
  t.kind = TestKind::delta_randomized;
  return t;
}

Eigen::VectorXd mean_contrast(const ModelFit& fit, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& weights) {
  if (x.size() != fit.P) {
    throw ValidationError("contrast package has wrong component count");
  }
  if (weights.size() != fit.J) {
    throw WeightDimensionMismatch(static_cast<std::size_t>(weights.size()),
                                  static_cast<std::size_t>(fit.J));
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.dim());
  c.head(fit.P) = x;
  c.segment(fit.P, fit.J) = weights;
  if (fit.K > 1) c[fit.dim() - 1] = 1.0;
  return c;
}

ConfidenceInterval ci_mean(const ModelFit& fit, const SandwichCovariance& cov,
                           const Eigen::VectorXd& x,
                           const Eigen::VectorXd& weights, double level) {
  const Eigen::VectorXd c = mean_contrast(fit, x, weights);
  const double z = stats::normal_quantile(0.5 + level / 2.0);
  ConfidenceInterval ci;
  ci.level = level;
  ci.centre = c.dot(fit.coefficients());
  const double var = std::max(0.0, c.dot(cov.cov_beta * c));
  ci.half_width = z * std::sqrt(var);
  ci.lower = ci.centre - ci.half_width;
  ci.upper = ci.centre + ci.half_width;
  return ci;
}

bool ci_mean_contains(const ModelFit& fit, const SandwichCovariance& cov,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& weights,
                      double level, double theta) {
  const ConfidenceInterval ci = ci_mean(fit, cov, x, weights, level);
  return ci.lower <= theta && theta <= ci.upper;
}

namespace {

// Shared fast path for grid sweeps: centre(x) = beta_A'x + c0 and
// var(x) = x'S x + 2 x'v + s0, where the fixed tail of the contrast is
// (w_1..w_J, 0..0, 1).
struct GridQuadratic {
  Eigen::MatrixXd S;   // P x P block of cov
  Eigen::VectorXd v;   // cross block times fixed tail
  double s0 = 0.0;     // tail' cov tail
  Eigen::VectorXd beta_A;
  double c0 = 0.0;

  GridQuadratic(const ModelFit& fit, const SandwichCovariance& cov,
                const Eigen::VectorXd& weights) {
    const int P = fit.P;
    const int dim = fit.dim();
    Eigen::VectorXd tail = Eigen::VectorXd::Zero(dim - P);
    tail.head(fit.J) = weights;
    if (fit.K > 1) tail[dim - P - 1] = 1.0;
    S = cov.cov_beta.topLeftCorner(P, P);
    v = cov.cov_beta.topRightCorner(P, dim - P) * tail;
    s0 = tail.dot(cov.cov_beta.bottomRightCorner(dim - P, dim - P) * tail);
    beta_A = fit.beta_A;
    Eigen::VectorXd rest(dim - P);
    rest.head(fit.J) = fit.gamma;
    if (fit.K > 1) rest.tail(fit.K - 1) = fit.eta;
    c0 = tail.dot(rest);
  }

  double centre(const Eigen::VectorXd& x) const { return beta_A.dot(x) + c0; }
  double variance(const Eigen::VectorXd& x) const {
    return std::max(0.0, x.dot(S * x) + 2.0 * x.dot(v) + s0);
  }
};

}  // namespace

ConfidenceSetResult confidence_set(const ModelFit& fit,
                                   const SandwichCovariance& cov,
                                   const OptimizationProblem& problem,
                                   double grid_resolution, double level) {
  ConfidenceSetResult out;
  out.level = level;
  out.grid = GridSpec::over(problem.bounds, grid_resolution);
  const GridQuadratic q(fit, cov, problem.weights);
  const double z = stats::normal_quantile(0.5 + level / 2.0);
  const std::size_t total = out.grid.size();
  out.mask.assign(total, 0);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const Eigen::VectorXd x = out.grid.point(i);
    const double hw = z * std::sqrt(q.variance(x));
    if (std::fabs(q.centre(x) - problem.goal) <= hw) {
      out.mask[i] = 1;
      ++inside;
    }
  }
  out.set_perc =
      100.0 * static_cast<double>(inside) / static_cast<double>(total);
  return out;
}

ConfidenceBandResult confidence_band(const ModelFit& fit,
                                     const SandwichCovariance& cov,
                                     const Eigen::VectorXd& weights,
                                     const std::vector<Bounds>& box,
                                     double grid_resolution, double level,
                                     BandDfPolicy policy) {
  if (fit.P < 1) {
    throw ValidationError("confidence band needs at least one component");
  }
  ConfidenceBandResult out;
  out.level = level;
  out.grid = GridSpec::over(box, grid_resolution);
  out.df = (policy == BandDfPolicy::coefficient_dim) ? fit.dim() : fit.P + 1;
  const double radius =
      std::sqrt(stats::chi2_quantile(level, static_cast<double>(out.df)));
  const GridQuadratic q(fit, cov, weights);
  const std::size_t total = out.grid.size();
  out.centre.resize(total);
  out.half_width.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Eigen::VectorXd x = out.grid.point(i);
    out.centre[i] = q.centre(x);
    out.half_width[i] = radius * std::sqrt(q.variance(x));
  }
  return out;
}

}  // namespace lago
