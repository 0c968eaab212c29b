#include "lago/report.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include "lago/errors.hpp"

namespace lago {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

const char* kind_name(TestKind kind) {
  switch (kind) {
    case TestKind::wald_individual: return "wald_individual";
    case TestKind::wald_joint: return "wald_joint";
    case TestKind::delta_randomized: return "delta_randomized";
  }
  return "unknown";
}

}  // namespace

json test_result_json(const TestResult& t) {
  return json{{"statistic", t.statistic},
              {"df", t.df},
              {"p_value", t.p_value},
              {"kind", kind_name(t.kind)}};
}

json analysis_report_json(const AnalysisArtifacts& a) {
  json tests;
  json individual = json::array();
  for (std::size_t p = 0; p < a.individual.size(); ++p) {
    json t = test_result_json(a.individual[p]);
    t["component"] = static_cast<int>(p + 1);
    individual.push_back(std::move(t));
  }
  tests["individual"] = std::move(individual);
  tests["joint"] = test_result_json(a.joint);
  tests["delta"] = a.has_delta ? test_result_json(a.delta) : json(nullptr);

  const Eigen::VectorXd coef = a.fit.coefficients();
  Eigen::VectorXd se(coef.size());
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    se[i] = std::sqrt(std::max(0.0, a.cov.cov_beta(i, i)));
  }

  json report;
  report["beta"] = vector_json(coef);
  report["se"] = vector_json(se);
  report["cov"] = matrix_json(a.cov.cov_beta);
  report["names"] = a.fit.coefficient_names;
  report["n"] = a.fit.n;
  report["condition_number"] = a.fit.condition_number;
  report["tests"] = std::move(tests);
  if (a.has_ci_mean) {
    report["ci_mean"] = json{{"level", a.ci_mean.level},
                             {"centre", a.ci_mean.centre},
                             {"half_width", a.ci_mean.half_width},
                             {"lower", a.ci_mean.lower},
                             {"upper", a.ci_mean.upper}};
  } else {
    report["ci_mean"] = json(nullptr);
  }
  report["set_mask_file"] =
      a.set_mask_file.empty() ? json(nullptr) : json(a.set_mask_file);
  report["band_file"] = a.band_file.empty() ? json(nullptr) : json(a.band_file);
  return report;
}

json aggregate_report_json(const AggregateReport& r) {
  json out;
  out["replicates_requested"] = r.replicates_requested;
  out["replicates_run"] = r.replicates_run;
  out["failed_replicates"] = r.failed_replicates;
  out["rel_bias_pct"] = vector_json(r.rel_bias_pct);
  out["se_over_emp_sd_pct"] = vector_json(r.se_over_empsd_pct);
  out["cp95"] = vector_json(r.cp95);
  out["alpha_individual"] = vector_json(r.alpha_individual);
  out["alpha_joint"] = r.alpha_joint;
  out["alpha_delta"] = r.alpha_delta;
  out["bias_xopt_stage1"] = vector_json(r.bias_x_stage2);
  out["bias_xopt_final"] = vector_json(r.bias_x_final);
  out["rmse_xopt_stage1"] = r.rmse_x_stage2;
  out["rmse_xopt_final"] = r.rmse_x_final;
  out["trueopt_stage1"] =
      json{{"q025", r.trueopt_stage2_q025}, {"q975", r.trueopt_stage2_q975}};
  out["trueopt_final"] =
      json{{"q025", r.trueopt_final_q025}, {"q975", r.trueopt_final_q975}};
  out["set_cp95"] = r.set_cp95;
  out["set_perc"] = r.set_perc_mean;
  out["bands_cp95"] = r.bands_cp95;
  out["mean_cost_actual"] =
      json{{"stage1", r.mean_cost_actual_s1}, {"stage2", r.mean_cost_actual_s2}};
  out["mean_cost_recommended"] =
      json{{"stage1", r.mean_cost_rec_s1}, {"stage2", r.mean_cost_rec_s2}};
  out["expected_outcome_actual"] =
      json{{"stage1", r.exp_out_act_s1}, {"stage2", r.exp_out_act_s2}};
  out["expected_outcome_recommended"] =
      json{{"stage1", r.exp_out_rec_s1}, {"stage2", r.exp_out_rec_s2}};
  out["expected_outcome_estimated_optimum"] = r.exp_out_estopt;
  out["avg_observed_outcome"] =
      json{{"stage1", r.avg_obs_out_s1}, {"stage2", r.avg_obs_out_s2}};
  out["interim_shrunk_count"] = r.interim_shrunk_count;
  out["final_shrunk_count"] = r.final_shrunk_count;
  return out;
}

json recommendation_json(const Recommendation& rec) {
  json out;
  out["x"] = vector_json(rec.x.components);
  out["feasible"] = rec.feasible;
  out["cost"] = rec.cost;
  out["achieved_mean"] = rec.achieved_mean;
  out["shrunk_to_previous"] = rec.shrunk_to_previous;
  return out;
}

void write_json(const std::string& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << value.dump(2) << '\n';
}

void write_run_meta(const std::string& path,
                    const std::vector<std::string>& argv) {
  json meta;
  meta["argv"] = argv;
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  meta["timestamp_utc"] = buf;
  write_json(path, meta);
}

}  // namespace lago
