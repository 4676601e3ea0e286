#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdslack/case_io.hpp"
#include "rdslack/errors.hpp"
#include "rdslack/powerflow.hpp"
#include "report.hpp"

namespace rdslack::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kSolverFailure = 2,
  kIdentityFailure = 3,
  kUsage = 64,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bus ids, or empty for "all generator buses".
struct CandidateSpec {
  bool all = false;
  std::vector<int> bus_ids;
};

struct CommonOptions {
  std::filesystem::path case_path;
  GammaMode mode = GammaMode::homogeneous(0.1);
  CandidateSpec candidates;
  double min_injection = 0.0;
  SolverConfig solver;
};

struct RankOptions {
  CommonOptions common;
  bool validate = false;
};

struct SweepOptions {
  CommonOptions common;
  std::vector<double> gammas;
};

struct CheckOptions {
  std::optional<std::filesystem::path> case_path;
  std::optional<std::filesystem::path> laplacian_path;
  GammaMode mode = GammaMode::homogeneous(0.1);
  SolverConfig solver;
  double threshold = 1e-8;
  double conservation_threshold = 1e-10;
};

/// "start:stop:step" (inclusive stop) or "a,b,c".
std::vector<double> parse_gammas(const std::string& text);

/// "all" or a comma list of bus ids.
CandidateSpec parse_candidates(const std::string& text);

RunReport run_rank(const RankOptions& opts);
RunReport run_sweep(const SweepOptions& opts);
RunReport run_check(const CheckOptions& opts);

/// Exit code for a library error.
int exit_code_for(const Error& e);

}  // namespace rdslack::cli
