#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "lago/types.hpp"

namespace lago {

// Flat key=value configuration with dotted section prefixes.
// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
// Vectors are comma-separated scalars; matrices separate rows with `;`.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text,
                            const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Eigen::VectorXd get_vector(const std::string& key) const;
  Eigen::MatrixXd get_matrix(const std::string& key) const;

  std::vector<std::string> keys() const;
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<empty>";
};

// Builds a scenario from config keys named exactly after ScenarioConfig
// fields (J, P, n_by_centre_stage, beta_true, ..., use_lago). The returned
// scenario has been validated.
ScenarioConfig scenario_from_config(const Config& config);

// Builds a standalone optimization problem from a problem block:
// cost.kind/cost.linear/cost.terms, goal, direction, bounds.lower/.upper,
// weights.values, coefficients.beta_A/.gamma/.eta, include_eta,
// lower_bound_policy.
OptimizationProblem problem_from_config(const Config& config);

// Shared helper: reads the cost block (`cost.kind`, `cost.linear`,
// `cost.terms`) for a P-component package.
CostFunction cost_from_config(const Config& config, int P);

GoalDirection direction_from_string(const std::string& value,
                                    const std::string& key);
LowerBoundPolicy lb_policy_from_string(const std::string& value,
                                       const std::string& key);

}  // namespace lago
