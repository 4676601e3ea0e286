#pragma once

#include <stdexcept>
#include <string>

namespace rdslack {

enum class ErrorCode {
  MalformedCase,
  DisconnectedNetwork,
  NonPositiveSusceptance,
  ZeroGeneration,
  NotConnected,
  NoConvergence,
  SlackNotGenerator,
  BadParticipation,
  ConstraintViolated,
  EmptyCandidateSet,
  NonConvexObjective,
  InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

// Every library failure is reported through this type; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// MalformedCase with the offending line (1-based, 0 when unknown).
class MalformedCaseError : public Error {
 public:
  MalformedCaseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::MalformedCase,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(int iterations, double residual, const std::string& what)
      : Error(ErrorCode::NoConvergence, what),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace rdslack
