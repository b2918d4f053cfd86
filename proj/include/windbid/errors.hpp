#pragma once

#include <stdexcept>
#include <string>

namespace windbid {

// Base for every error the library raises. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from one of the groups below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data or configuration problems (exit code 3 in the CLI).
class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  SchemaError(const std::string& what, long line = -1)
      : DataError(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class DegenerateSeries : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

class DataExhausted : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

class ArchitectureMismatch : public Error {
 public:
  using Error::Error;
};

// Solver-side failures (exit code 4 in the CLI).
class SolverError : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

// A scenario LP failed inside a decomposed solve.
class ScenarioSolveError : public SolverError {
 public:
  ScenarioSolveError(int scenario, const std::string& what)
      : SolverError("scenario " + std::to_string(scenario) + ": " + what), scenario_(scenario) {}
  int scenario() const noexcept { return scenario_; }

 private:
  int scenario_;
};

}  // namespace windbid
