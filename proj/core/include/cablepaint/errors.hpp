#pragma once

#include <stdexcept>
#include <string>

namespace cablepaint {

// Error families map one-to-one onto CLI exit codes so callers can tell
// which pipeline stage rejected the input.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  parse = 2,
  plan = 3,
  optimize = 4,
  simulate = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// File/format/config problems: bad CSV, bad JSON, bad XML, missing files.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(ExitCode::parse, msg) {}
};

// Composition, path, and trajectory generation problems.
class PlanError : public Error {
 public:
  explicit PlanError(const std::string& msg) : Error(ExitCode::plan, msg) {}
};

// Model/optimizer problems: infeasibility, degenerate geometry, divergence.
class OptimizeError : public Error {
 public:
  explicit OptimizeError(const std::string& msg)
      : Error(ExitCode::optimize, msg) {}
};

// Closed-loop execution problems: plant divergence, inconsistent sensing.
class SimulateError : public Error {
 public:
  explicit SimulateError(const std::string& msg)
      : Error(ExitCode::simulate, msg) {}
};

}  // namespace cablepaint
