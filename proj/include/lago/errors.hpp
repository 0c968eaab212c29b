#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lago {

// Root of the project exception hierarchy. ValidationError maps to CLI exit
// code 2, NumericalError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public ValidationError {
 public:
  EmptyDataset() : ValidationError("dataset contains no records") {}
};

class NonContiguousCentres : public ValidationError {
 public:
  explicit NonContiguousCentres(const std::string& detail)
      : ValidationError("centre indices must be contiguous 1..J: " + detail) {}
};

class WeightDimensionMismatch : public ValidationError {
 public:
  WeightDimensionMismatch(std::size_t got, std::size_t expected)
      : ValidationError("weight vector has " + std::to_string(got) +
                        " entries, expected " + std::to_string(expected)) {}
};

class IndexOutOfRange : public ValidationError {
 public:
  IndexOutOfRange(int index, int max_index)
      : ValidationError("component index " + std::to_string(index) +
                        " out of range 1.." + std::to_string(max_index)) {}
};

class SingleArm : public ValidationError {
 public:
  SingleArm() : ValidationError("randomization test requires both arms present") {}
};

class RhoOutOfRange : public ValidationError {
 public:
  explicit RhoOutOfRange(double rho)
      : ValidationError("correlation target " + std::to_string(rho) +
                        " outside the open interval (-1, 1)") {}
};

class InvalidDirection : public ValidationError {
 public:
  explicit InvalidDirection(const std::string& got)
      : ValidationError("goal direction must be at_least or at_most, got '" + got + "'") {}
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& detail)
      : ValidationError(file + ":" + std::to_string(line) + ": " + detail),
        line_number(line) {}
  std::size_t line_number;
};

class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& key, const std::string& detail)
      : ValidationError("config key '" + key + "': " + detail) {}
};

class UnknownTable : public ValidationError {
 public:
  explicit UnknownTable(const std::string& id)
      : ValidationError("unknown table id '" + id + "'") {}
};

// Rank deficiency of the design crossproduct. Carries the offending columns
// (indices into the design matrix and their human-readable names).
class RankDeficient : public NumericalError {
 public:
  RankDeficient(std::string detail, std::vector<int> columns,
                std::vector<std::string> names)
      : NumericalError("design matrix is rank deficient: " + detail),
        collinear_columns(std::move(columns)),
        column_names(std::move(names)) {}
  std::vector<int> collinear_columns;
  std::vector<std::string> column_names;
};

class SingularJ : public NumericalError {
 public:
  SingularJ() : NumericalError("J-hat (average design crossproduct) is singular") {}
};

class SingularBlock : public NumericalError {
 public:
  SingularBlock()
      : NumericalError("intervention block of the covariance is singular") {}
};

class Infeasible : public NumericalError {
 public:
  explicit Infeasible(const std::string& detail)
      : NumericalError("goal unreachable on the intervention box: " + detail) {}
};

}  // namespace lago
