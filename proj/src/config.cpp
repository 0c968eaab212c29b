#include "lago/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lago/errors.hpp"

namespace lago {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key, "empty numeric value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw ConfigError(key, "invalid number '" + t + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key, "empty integer value");
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw ConfigError(key, "invalid integer '" + t + "'");
  }
  return v;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin, lineno, "expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError(origin, lineno, "missing key before '='");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[trim(key)] = trim(value);
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "missing required key");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return parse_double(key, get_string(key));
}

int Config::get_int(const std::string& key) const {
  return static_cast<int>(parse_integer(key, get_string(key)));
}

int Config::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  return get_int(key);
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string t = trim(get_string(key));
  if (t.empty()) throw ConfigError(key, "empty integer value");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw ConfigError(key, "invalid integer '" + t + "'");
  }
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string t = trim(get_string(key));
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key, "invalid boolean '" + t + "'");
}

Eigen::VectorXd Config::get_vector(const std::string& key) const {
  const std::string raw = trim(get_string(key));
  if (raw.empty()) return Eigen::VectorXd();
  const std::vector<std::string> parts = split(raw, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double(key, parts[i]);
  }
  return v;
}

Eigen::MatrixXd Config::get_matrix(const std::string& key) const {
  const std::string raw = trim(get_string(key));
  if (raw.empty()) return Eigen::MatrixXd();
  const std::vector<std::string> rows = split(raw, ';');
  std::vector<std::vector<double>> parsed;
  for (const auto& row : rows) {
    const std::string r = trim(row);
    if (r.empty()) continue;
    std::vector<double> vals;
    for (const auto& cell : split(r, ',')) {
      vals.push_back(parse_double(key, cell));
    }
    if (!parsed.empty() && vals.size() != parsed.front().size()) {
      throw ConfigError(key, "rows have inconsistent lengths");
    }
    parsed.push_back(std::move(vals));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(parsed.size()),
                    parsed.empty() ? 0
                                   : static_cast<Eigen::Index>(parsed.front().size()));
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    for (std::size_t j = 0; j < parsed[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parsed[i][j];
    }
  }
  return m;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& kv : values_) out.push_back(kv.first);
  return out;
}

// ---------------------------------------------------------------------------

CostFunction cost_from_config(const Config& config, int P) {
  CostFunction cost;
  const std::string kind = config.get_string("cost.kind", "linear");
  if (kind == "linear") {
    cost.kind = CostFunction::Kind::linear;
    cost.linear = config.get_vector("cost.linear");
    if (cost.linear.size() != P) {
      throw ConfigError("cost.linear", "expected " + std::to_string(P) +
                                           " coefficients, got " +
                                           std::to_string(cost.linear.size()));
    }
  } else if (kind == "polynomial") {
    cost.kind = CostFunction::Kind::polynomial;
    cost.terms.assign(static_cast<std::size_t>(P), {});
    const std::string raw = config.get_string("cost.terms");
    for (const auto& chunk : split(raw, ';')) {
      const std::string t = trim(chunk);
      if (t.empty()) continue;
      const std::vector<std::string> f = split(t, ':');
      if (f.size() != 3) {
        throw ConfigError("cost.terms",
                          "term '" + t + "' is not component:power:coefficient");
      }
      const long long comp = parse_integer("cost.terms", f[0]);
      const long long power = parse_integer("cost.terms", f[1]);
      const double coef = parse_double("cost.terms", f[2]);
      if (comp < 1 || comp > P) {
        throw ConfigError("cost.terms", "component index " +
                                            std::to_string(comp) +
                                            " outside 1.." + std::to_string(P));
      }
      if (power < 1) {
        throw ConfigError("cost.terms", "power must be >= 1");
      }
      cost.terms[static_cast<std::size_t>(comp - 1)].push_back(
          PolyTerm{static_cast<int>(power), coef});
    }
  } else {
    throw ConfigError("cost.kind", "must be 'linear' or 'polynomial'");
  }
  try {
    cost.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(kind == "linear" ? "cost.linear" : "cost.terms", e.what());
  }
  return cost;
}

GoalDirection direction_from_string(const std::string& value,
                                    const std::string& key) {
  if (value == "at_least") return GoalDirection::at_least;
  if (value == "at_most") return GoalDirection::at_most;
  throw ConfigError(key, "must be 'at_least' or 'at_most', got '" + value + "'");
}

LowerBoundPolicy lb_policy_from_string(const std::string& value,
                                       const std::string& key) {
  if (value == "none") return LowerBoundPolicy::none;
  if (value == "previous_recommendation") {
    return LowerBoundPolicy::previous_recommendation;
  }
  throw ConfigError(key, "must be 'none' or 'previous_recommendation', got '" +
                             value + "'");
}

namespace {

std::vector<Bounds> bounds_from_config(const Config& config, int P) {
  const Eigen::VectorXd lower = config.get_vector("bounds.lower");
  const Eigen::VectorXd upper = config.get_vector("bounds.upper");
  if (lower.size() != P) {
    throw ConfigError("bounds.lower", "expected " + std::to_string(P) +
                                          " values, got " +
                                          std::to_string(lower.size()));
  }
  if (upper.size() != P) {
    throw ConfigError("bounds.upper", "expected " + std::to_string(P) +
                                          " values, got " +
                                          std::to_string(upper.size()));
  }
  std::vector<Bounds> bounds(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    bounds[static_cast<std::size_t>(p)] = Bounds{lower[p], upper[p]};
    if (lower[p] > upper[p]) {
      throw ConfigError("bounds.lower", "component " + std::to_string(p + 1) +
                                            " has lower > upper");
    }
  }
  return bounds;
}

ArmRatio arm_ratio_from_config(const Config& config) {
  ArmRatio ratio;
  if (!config.has("arm_ratio")) return ratio;
  const std::string raw = trim(config.get_string("arm_ratio"));
  const std::vector<std::string> parts = split(raw, ':');
  if (parts.size() != 2) {
    throw ConfigError("arm_ratio", "expected 'i:c', got '" + raw + "'");
  }
  ratio.intervention =
      static_cast<int>(parse_integer("arm_ratio", parts[0]));
  ratio.control = static_cast<int>(parse_integer("arm_ratio", parts[1]));
  if (ratio.intervention < 0 || ratio.control < 0 ||
      ratio.intervention + ratio.control <= 0) {
    throw ConfigError("arm_ratio", "ratio parts must be nonnegative with a positive sum");
  }
  return ratio;
}

}  // namespace

ScenarioConfig scenario_from_config(const Config& config) {
  ScenarioConfig sc;
  sc.K = config.get_int("K", 2);
  sc.J = config.get_int("J");
  sc.P = config.get_int("P");

  const Eigen::MatrixXd nmat = config.get_matrix("n_by_centre_stage");
  if (nmat.rows() != 1 && nmat.rows() != sc.J) {
    throw ConfigError("n_by_centre_stage",
                      "expected 1 or J=" + std::to_string(sc.J) + " rows, got " +
                          std::to_string(nmat.rows()));
  }
  if (nmat.cols() != sc.K) {
    throw ConfigError("n_by_centre_stage",
                      "expected K=" + std::to_string(sc.K) + " columns, got " +
                          std::to_string(nmat.cols()));
  }
  sc.n_by_centre_stage.resize(sc.J, sc.K);
  for (int j = 0; j < sc.J; ++j) {
    for (int k = 0; k < sc.K; ++k) {
      const double v = nmat(nmat.rows() == 1 ? 0 : j, k);
      const int iv = static_cast<int>(v);
      if (static_cast<double>(iv) != v || iv < 0) {
        throw ConfigError("n_by_centre_stage",
                          "entries must be nonnegative integers");
      }
      sc.n_by_centre_stage(j, k) = iv;
    }
  }

  sc.beta_true = config.get_vector("beta_true");
  sc.beta_z = config.get_double("beta_z", sc.beta_z);
  sc.rho_targets = config.get_vector("rho_targets");

  const std::string zmode =
      config.get_string("centre_Z_mode", "redraw_each_replicate");
  if (zmode == "fixed_list") {
    sc.centre_Z_mode = CentreZMode::fixed_list;
  } else if (zmode == "redraw_each_replicate") {
    sc.centre_Z_mode = CentreZMode::redraw_each_replicate;
  } else {
    throw ConfigError("centre_Z_mode",
                      "must be 'fixed_list' or 'redraw_each_replicate', got '" +
                          zmode + "'");
  }
  if (config.has("Z_values")) sc.Z_values = config.get_vector("Z_values");

  sc.x_stage1 = config.get_vector("x_stage1");
  sc.cost = cost_from_config(config, sc.P);
  sc.goal = config.get_double("goal");
  sc.direction = direction_from_string(config.get_string("direction"), "direction");
  sc.bounds = bounds_from_config(config, sc.P);
  sc.lower_bound_policy = lb_policy_from_string(
      config.get_string("lower_bound_policy", "none"), "lower_bound_policy");
  sc.noise_sd = config.get_double("noise_sd", sc.noise_sd);
  sc.a_noise_sd = config.get_double("a_noise_sd", sc.a_noise_sd);
  if (config.has("eta_offsets")) {
    sc.eta_offsets = config.get_matrix("eta_offsets");
    if (sc.eta_offsets.size() != 0 &&
        (sc.eta_offsets.rows() != sc.J || sc.eta_offsets.cols() != sc.P)) {
      throw ConfigError("eta_offsets",
                        "expected a J x P matrix (" + std::to_string(sc.J) +
                            " x " + std::to_string(sc.P) + ")");
    }
  }
  sc.arm_ratio = arm_ratio_from_config(config);
  sc.replicates = config.get_int("replicates", 1);
  sc.seed = config.get_u64("seed", 0);
  sc.use_lago = config.get_bool("use_lago", true);

  const std::string wmode = config.get_string("weights_mode", "from_data");
  if (wmode == "from_data") {
    sc.weights_mode = WeightsMode::from_data;
  } else if (wmode == "equal") {
    sc.weights_mode = WeightsMode::equal;
  } else {
    throw ConfigError("weights_mode",
                      "must be 'from_data' or 'equal', got '" + wmode + "'");
  }

  sc.grid_resolution = config.get_double("grid_resolution", sc.grid_resolution);
  sc.level = config.get_double("level", sc.level);
  const std::string bdf =
      config.get_string("band_df_policy", "coefficient_dim");
  if (bdf == "coefficient_dim") {
    sc.band_df_policy = BandDfPolicy::coefficient_dim;
  } else if (bdf == "contrast_span") {
    sc.band_df_policy = BandDfPolicy::contrast_span;
  } else {
    throw ConfigError("band_df_policy",
                      "must be 'coefficient_dim' or 'contrast_span', got '" +
                          bdf + "'");
  }
  sc.compute_set_band = config.get_bool("compute_set_band", true);
  sc.threads = config.get_int("threads", 1);

  sc.validate();
  return sc;
}

OptimizationProblem problem_from_config(const Config& config) {
  OptimizationProblem problem;
  const Eigen::VectorXd beta_A = config.get_vector("coefficients.beta_A");
  const int P = static_cast<int>(beta_A.size());
  if (P == 0) throw ConfigError("coefficients.beta_A", "must be nonempty");
  problem.coefficients.beta_A = beta_A;
  if (config.has("coefficients.gamma")) {
    problem.coefficients.gamma = config.get_vector("coefficients.gamma");
  }
  if (config.has("coefficients.eta")) {
    problem.coefficients.eta = config.get_vector("coefficients.eta");
  }
  problem.cost = cost_from_config(config, P);
  problem.goal = config.get_double("goal");
  problem.direction =
      direction_from_string(config.get_string("direction"), "direction");
  problem.bounds = bounds_from_config(config, P);

  const int J = static_cast<int>(problem.coefficients.gamma.size());
  if (config.has("weights.values")) {
    problem.weights = config.get_vector("weights.values");
  } else if (J > 0) {
    problem.weights = Eigen::VectorXd::Constant(J, 1.0 / J);
  }
  if (problem.weights.size() != J) {
    throw ConfigError("weights.values",
                      "expected " + std::to_string(J) + " weights, got " +
                          std::to_string(problem.weights.size()));
  }
  problem.include_eta = config.get_bool("include_eta", true);
  problem.lower_bound_policy = lb_policy_from_string(
      config.get_string("lower_bound_policy", "none"), "lower_bound_policy");
  return problem;
}

}  // namespace lago
