#include "lago/csvio.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "lago/errors.hpp"

namespace lago {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_cell_double(const std::string& file, int line,
                         const std::string& cell, const char* what) {
  const std::string t = trim(cell);
  if (t.empty()) {
    throw ParseError(file, line, std::string("empty ") + what + " value");
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw ParseError(file, line,
                     std::string("invalid ") + what + " value '" + t + "'");
  }
  return v;
}

int parse_cell_int(const std::string& file, int line, const std::string& cell,
                   const char* what) {
  const double v = parse_cell_double(file, line, cell, what);
  const int iv = static_cast<int>(v);
  if (static_cast<double>(iv) != v) {
    throw ParseError(file, line,
                     std::string(what) + " must be an integer, got '" +
                         trim(cell) + "'");
  }
  return iv;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

TrialDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5) {
    throw ParseError(path, lineno,
                     "header must be stage,centre,arm,a1..aP,y");
  }
  if (trim(header[0]) != "stage" || trim(header[1]) != "centre" ||
      trim(header[2]) != "arm" || trim(header.back()) != "y") {
    throw ParseError(path, lineno,
                     "header must be stage,centre,arm,a1..aP,y");
  }
  const int P = static_cast<int>(header.size()) - 4;
  for (int p = 0; p < P; ++p) {
    const std::string expected = "a" + std::to_string(p + 1);
    if (trim(header[static_cast<std::size_t>(3 + p)]) != expected) {
      throw ParseError(path, lineno,
                       "intervention column " + std::to_string(p + 1) +
                           " must be named '" + expected + "'");
    }
  }

  TrialDataset ds;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(path, lineno,
                       "expected " + std::to_string(header.size()) +
                           " columns, got " + std::to_string(cells.size()));
    }
    TrialRecord r;
    r.stage = parse_cell_int(path, lineno, cells[0], "stage");
    r.centre = parse_cell_int(path, lineno, cells[1], "centre");
    const int arm = parse_cell_int(path, lineno, cells[2], "arm");
    if (arm != 0 && arm != 1) {
      throw ParseError(path, lineno, "arm must be 0 or 1");
    }
    r.arm = arm == 1 ? Arm::intervention : Arm::control;
    r.actual.resize(P);
    for (int p = 0; p < P; ++p) {
      r.actual[p] = parse_cell_double(
          path, lineno, cells[static_cast<std::size_t>(3 + p)], "intervention");
    }
    if (arm == 0 && r.actual.cwiseAbs().maxCoeff() != 0.0) {
      throw ParseError(path, lineno,
                       "control row (arm=0) has nonzero intervention columns");
    }
    r.outcome = parse_cell_double(path, lineno, cells.back(), "outcome");
    ds.records.push_back(std::move(r));
  }
  ds.finalize();
  return ds;
}

void write_dataset(const std::string& path, const TrialDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "stage,centre,arm";
  for (int p = 0; p < dataset.P; ++p) out << ",a" << (p + 1);
  out << ",y\n";
  for (const auto& r : dataset.records) {
    out << r.stage << ',' << r.centre << ','
        << (r.arm == Arm::intervention ? 1 : 0);
    for (int p = 0; p < dataset.P; ++p) out << ',' << format_double(r.actual[p]);
    out << ',' << format_double(r.outcome) << '\n';
  }
}

void write_replicate_csv(const std::string& path,
                         const std::vector<ReplicateMetrics>& rows, int P) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "replicate,failed";
  for (int p = 0; p < P; ++p) out << ",beta_hat_" << (p + 1);
  for (int p = 0; p < P; ++p) out << ",se_" << (p + 1);
  for (int p = 0; p < P; ++p) out << ",covered_" << (p + 1);
  for (int p = 0; p < P; ++p) out << ",rej_individual_" << (p + 1);
  out << ",rej_joint,p_joint,p_delta";
  for (int p = 0; p < P; ++p) out << ",xopt_stage1_" << (p + 1);
  for (int p = 0; p < P; ++p) out << ",xopt_final_" << (p + 1);
  for (int p = 0; p < P; ++p) out << ",true_xopt_" << (p + 1);
  out << ",interim_shrunk,final_shrunk,set_covers_true,set_fraction,"
         "band_covers_all,true_mean_at_recommended,true_mean_at_final,"
         "cost_actual_s1,cost_actual_s2,cost_rec_s1,cost_rec_s2,"
         "exp_out_act_s1,exp_out_act_s2,exp_out_rec_s1,exp_out_rec_s2,"
         "exp_out_estopt,avg_obs_out_s1,avg_obs_out_s2,failure\n";

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto vec_cell = [&](const Eigen::VectorXd& v, int p) {
    return format_double(v.size() == P ? v[p] : nan);
  };
  auto flag_cell = [&](const std::vector<std::uint8_t>& v, int p) {
    return v.size() == static_cast<std::size_t>(P)
               ? std::string(v[static_cast<std::size_t>(p)] ? "1" : "0")
               : std::string("nan");
  };
  for (const auto& m : rows) {
    out << m.replicate << ',' << (m.failed ? 1 : 0);
    for (int p = 0; p < P; ++p) out << ',' << vec_cell(m.beta_hat, p);
    for (int p = 0; p < P; ++p) out << ',' << vec_cell(m.se, p);
    for (int p = 0; p < P; ++p) out << ',' << flag_cell(m.covered, p);
    for (int p = 0; p < P; ++p) out << ',' << flag_cell(m.rej_individual, p);
    out << ',' << (m.rej_joint ? 1 : 0) << ',' << format_double(m.p_joint)
        << ',' << format_double(m.p_delta);
    for (int p = 0; p < P; ++p) out << ',' << vec_cell(m.xopt_stage2, p);
    for (int p = 0; p < P; ++p) out << ',' << vec_cell(m.xopt_final, p);
    for (int p = 0; p < P; ++p) out << ',' << vec_cell(m.true_xopt, p);
    out << ',' << (m.interim_shrunk ? 1 : 0) << ',' << (m.final_shrunk ? 1 : 0)
        << ',' << (m.set_covers_true ? 1 : 0) << ','
        << format_double(m.set_fraction) << ',' << (m.band_covers_all ? 1 : 0)
        << ',' << format_double(m.true_mean_at_stage2) << ','
        << format_double(m.true_mean_at_final) << ','
        << format_double(m.cost_actual_s1) << ','
        << format_double(m.cost_actual_s2) << ','
        << format_double(m.cost_rec_s1) << ',' << format_double(m.cost_rec_s2)
        << ',' << format_double(m.exp_out_act_s1) << ','
        << format_double(m.exp_out_act_s2) << ','
        << format_double(m.exp_out_rec_s1) << ','
        << format_double(m.exp_out_rec_s2) << ','
        << format_double(m.exp_out_estopt) << ','
        << format_double(m.avg_obs_out_s1) << ','
        << format_double(m.avg_obs_out_s2) << ',' << csv_quote(m.failure)
        << '\n';
  }
}

void write_set_csv(const std::string& path, const ConfidenceSetResult& set) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  const int P = static_cast<int>(set.grid.box.size());
  for (int p = 0; p < P; ++p) out << 'x' << (p + 1) << ',';
  out << "in_set\n";
  const std::size_t total = set.grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    const Eigen::VectorXd x = set.grid.point(i);
    for (int p = 0; p < P; ++p) out << format_double(x[p]) << ',';
    out << (set.mask[i] ? 1 : 0) << '\n';
  }
}

void write_band_csv(const std::string& path, const ConfidenceBandResult& band) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  const int P = static_cast<int>(band.grid.box.size());
  for (int p = 0; p < P; ++p) out << 'x' << (p + 1) << ',';
  out << "lower,upper\n";
  const std::size_t total = band.grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    const Eigen::VectorXd x = band.grid.point(i);
    for (int p = 0; p < P; ++p) out << format_double(x[p]) << ',';
    out << format_double(band.centre[i] - band.half_width[i]) << ','
        << format_double(band.centre[i] + band.half_width[i]) << '\n';
  }
}

}  // namespace lago
