#pragma once

#include <stdexcept>
#include <string>

namespace poroscale {

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorClass : int {
  config = 1,      // bad or inconsistent configuration
  degeneracy = 2,  // geometry invalid, band violated, non-coercive data
  solver = 3,      // iteration failed to converge, stability bound violated
  horizon = 4,     // request beyond the validity horizon of a path or table
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), cls_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }
  const std::string& code() const { return code_; }

 private:
  ErrorClass cls_;
  std::string code_;  // short machine-parsable tag, e.g. "invalid-geometry"
};

class ConfigError : public Error {
 public:
  ConfigError(std::string code, const std::string& message)
      : Error(ErrorClass::config, std::move(code), message) {}
};

class DegeneracyError : public Error {
 public:
  DegeneracyError(std::string code, const std::string& message)
      : Error(ErrorClass::degeneracy, std::move(code), message) {}
};

class SolverError : public Error {
 public:
  SolverError(std::string code, const std::string& message)
      : Error(ErrorClass::solver, std::move(code), message) {}
};

class HorizonError : public Error {
 public:
  HorizonError(std::string code, const std::string& message)
      : Error(ErrorClass::horizon, std::move(code), message) {}
};

}  // namespace poroscale
