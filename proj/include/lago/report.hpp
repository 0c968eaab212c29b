#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lago/types.hpp"

namespace lago {

// Everything emitted for one analysis (fit/test invocation).
struct AnalysisArtifacts {
  ModelFit fit;
  SandwichCovariance cov;
  std::vector<TestResult> individual;  // one per intervention component
  TestResult joint;
  bool has_delta = false;
  TestResult delta;
  bool has_ci_mean = false;
  ConfidenceInterval ci_mean;
  std::string set_mask_file;  // relative file name, empty if not computed
  std::string band_file;
};

nlohmann::json test_result_json(const TestResult& t);

// Analysis report with keys beta, se, cov, tests{individual, joint, delta},
// ci_mean, set_mask_file, band_file (plus coefficient names).
nlohmann::json analysis_report_json(const AnalysisArtifacts& artifacts);

nlohmann::json aggregate_report_json(const AggregateReport& report);

nlohmann::json recommendation_json(const Recommendation& rec);

void write_json(const std::string& path, const nlohmann::json& value);

// Metadata sidecar; the only output file that carries a timestamp.
void write_run_meta(const std::string& path,
                    const std::vector<std::string>& argv);

}  // namespace lago
