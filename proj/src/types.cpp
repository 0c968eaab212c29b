#include "lago/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lago/errors.hpp"

namespace lago {

void InterventionPackage::clamp() {
  validate();
  for (int p = 0; p < P(); ++p) {
    const auto& b = bounds[static_cast<std::size_t>(p)];
    components[p] = std::min(std::max(components[p], b.lower), b.upper);
  }
}

bool InterventionPackage::within_bounds(double tol) const {
  for (int p = 0; p < P(); ++p) {
    const auto& b = bounds[static_cast<std::size_t>(p)];
    if (components[p] < b.lower - tol || components[p] > b.upper + tol) {
      return false;
    }
  }
  return true;
}

void InterventionPackage::validate() const {
  if (components.size() < 1) {
    throw ValidationError("intervention package needs at least one component");
  }
  if (bounds.size() != static_cast<std::size_t>(components.size())) {
    throw ValidationError("package has " + std::to_string(components.size()) +
                          " components but " + std::to_string(bounds.size()) +
                          " bound pairs");
  }
  for (const auto& b : bounds) {
    if (!(b.lower <= b.upper)) {
      throw ValidationError("component bounds must satisfy lower <= upper");
    }
  }
}

void TrialDataset::finalize() {
  if (records.empty()) throw EmptyDataset();
  P = static_cast<int>(records.front().actual.size());
  std::set<int> centres;
  int max_stage = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (static_cast<int>(r.actual.size()) != P) {
      throw ValidationError("record " + std::to_string(i + 1) +
                            " has inconsistent component count");
    }
    if (r.stage < 1) {
      throw ValidationError("record " + std::to_string(i + 1) +
                            " has stage index < 1");
    }
    if (r.centre < 1) {
      throw ValidationError("record " + std::to_string(i + 1) +
                            " has centre index < 1");
    }
    if (r.arm == Arm::control && r.actual.cwiseAbs().maxCoeff() != 0.0) {
      throw ValidationError("record " + std::to_string(i + 1) +
                            " is a control row with a nonzero intervention");
    }
    centres.insert(r.centre);
    max_stage = std::max(max_stage, r.stage);
  }
  J = static_cast<int>(centres.size());
  K = max_stage;
  // Centre indices must be exactly 1..J.
  int expect = 1;
  for (int c : centres) {
    if (c != expect) {
      throw NonContiguousCentres("index " + std::to_string(c) +
                                 " present, expected " + std::to_string(expect));
    }
    ++expect;
  }
}

int TrialDataset::distinct_stages() const {
  std::set<int> stages;
  for (const auto& r : records) stages.insert(r.stage);
  return static_cast<int>(stages.size());
}

Eigen::MatrixXi TrialDataset::n_by_centre_stage() const {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(J, K);
  for (const auto& r : records) counts(r.centre - 1, r.stage - 1) += 1;
  return counts;
}

Eigen::VectorXd ModelFit::coefficients() const {
  Eigen::VectorXd out(dim());
  out.head(P) = beta_A;
  out.segment(P, J) = gamma;
  if (K > 1) out.tail(K - 1) = eta;
  return out;
}

GridSpec GridSpec::over(const std::vector<Bounds>& box, double resolution) {
  if (resolution <= 0.0) {
    throw ValidationError("grid resolution must be positive");
  }
  GridSpec g;
  g.box = box;
  g.resolution = resolution;
  g.shape.reserve(box.size());
  for (const auto& b : box) {
    const int steps =
        static_cast<int>(std::floor((b.upper - b.lower) / resolution + 1e-9));
    g.shape.push_back(steps + 1);
  }
  return g;
}

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  return total;
}

Eigen::VectorXd GridSpec::point(std::size_t flat_index) const {
  const std::size_t dims = shape.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(dims));
  for (std::size_t p = dims; p-- > 0;) {
    const std::size_t extent = static_cast<std::size_t>(shape[p]);
    const std::size_t idx = flat_index % extent;
    flat_index /= extent;
    x[static_cast<Eigen::Index>(p)] =
        box[p].lower + static_cast<double>(idx) * resolution;
  }
  return x;
}

int CostFunction::P() const {
  return kind == Kind::linear ? static_cast<int>(linear.size())
                              : static_cast<int>(terms.size());
}

void CostFunction::validate() const {
  if (kind == Kind::linear) {
    if (linear.size() < 1) {
      throw ValidationError("linear cost needs at least one coefficient");
    }
    for (int p = 0; p < linear.size(); ++p) {
      if (linear[p] < 0.0) {
        throw ValidationError("linear cost coefficients must be nonnegative");
      }
    }
  } else {
    if (terms.empty()) {
      throw ValidationError("polynomial cost needs per-component term lists");
    }
    for (const auto& component : terms) {
      for (const auto& t : component) {
        if (t.power < 1) {
          throw ValidationError(
              "polynomial cost powers must be >= 1 (no constant term)");
        }
      }
    }
  }
}

void ScenarioConfig::validate() const {
  if (J < 1) throw ConfigError("J", "must be >= 1");
  if (P < 1) throw ConfigError("P", "must be >= 1");
  if (K < 1) throw ConfigError("K", "must be >= 1");
  if (n_by_centre_stage.rows() != J || n_by_centre_stage.cols() != K) {
    throw ConfigError("n_by_centre_stage",
                      "must be a " + std::to_string(J) + "x" + std::to_string(K) +
                          " matrix of per-centre per-stage sizes");
  }
  if (n_by_centre_stage.minCoeff() < 0) {
    throw ConfigError("n_by_centre_stage", "sizes must be nonnegative");
  }
  if (beta_true.size() != P) {
    throw ConfigError("beta_true", "needs exactly P entries");
  }
  if (rho_targets.size() != P) {
    throw ConfigError("rho_targets", "needs exactly P entries");
  }
  for (int p = 0; p < P; ++p) {
    if (!(rho_targets[p] > -1.0 && rho_targets[p] < 1.0)) {
      throw ConfigError("rho_targets",
                        "entry " + std::to_string(p + 1) + " = " +
                            std::to_string(rho_targets[p]) +
                            " outside the open interval (-1, 1)");
    }
  }
  if (centre_Z_mode == CentreZMode::fixed_list &&
      Z_values.size() < static_cast<Eigen::Index>(J)) {
    throw ConfigError("Z_values",
                      "fixed_list mode needs at least J centre values");
  }
  if (x_stage1.size() != P) {
    throw ConfigError("x_stage1", "needs exactly P entries");
  }
  if (bounds.size() != static_cast<std::size_t>(P)) {
    throw ConfigError("bounds", "needs exactly P (lower,upper) pairs");
  }
  for (const auto& b : bounds) {
    if (!(b.lower <= b.upper)) {
      throw ConfigError("bounds", "each pair must satisfy lower <= upper");
    }
  }
  if (cost.P() != P) {
    throw ConfigError("cost", "cost function covers " +
                                  std::to_string(cost.P()) +
                                  " components, expected " + std::to_string(P));
  }
  cost.validate();
  if (noise_sd < 0.0) throw ConfigError("noise_sd", "must be >= 0");
  if (a_noise_sd < 0.0) throw ConfigError("a_noise_sd", "must be >= 0");
  if (eta_offsets.size() != 0 &&
      (eta_offsets.rows() != J || eta_offsets.cols() != P)) {
    throw ConfigError("eta_offsets", "must be a JxP matrix when present");
  }
  if (arm_ratio.intervention < 1 || arm_ratio.control < 1) {
    throw ConfigError("arm_ratio", "both parts must be >= 1");
  }
  if (replicates < 1) throw ConfigError("replicates", "must be >= 1");
  if (grid_resolution <= 0.0) throw ConfigError("grid_resolution", "must be > 0");
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("level", "must lie in (0, 1)");
  }
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
}

}  // namespace lago
