#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdslack/case_io.hpp"
#include "rdslack/loss_analysis.hpp"
#include "rdslack/powerflow.hpp"
#include "rdslack/simplex.hpp"

namespace rdslack {

struct CandidateScore {
  std::size_t bus = 0;  // internal index; Network::bus_ids maps to the case id
  double score = 0.0;   // -Omega_g . P
  double d0 = 0.0;
  double predicted_loss_o2 = 0.0;
  double predicted_loss_o3 = 0.0;
  std::optional<double> exact_loss;
  std::optional<double> slack_total;  // sum of NR slack injections
  int iterations = 0;
  bool tied = false;   // score within 1e-9 (relative) of the best score
  std::string error;   // set when the NR solve failed for this candidate
};

struct ParticipationResult {
  std::vector<std::size_t> buses;
  Eigen::VectorXd factors;      // clamped below 1e-6 and renormalized
  Eigen::VectorXd raw_factors;  // straight from the QP
  double objective = 0.0;       // D0 + second + third order loss estimate, p.u.
  std::optional<double> gamma;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;

  /// Number of factors that survive clamping.
  std::size_t active_count() const;
};

/// Lossless operating point of a balanced network, ready for ranking.
struct OperatingPoint {
  Network network;  // balanced
  FlowSolution lossless;
  LosslessState state;
};

OperatingPoint prepare_operating_point(const CaseData& data, const GammaMode& mode,
                                       const SolverConfig& cfg = {});

/// Generator buses whose balanced output exceeds min_injection (p.u.).
std::vector<std::size_t> filter_candidates(const Network& net, double min_injection = 0.0);

/// Candidates sorted by -Omega_g . P; near-ties (1e-9 relative) ordered by bus index.
std::vector<CandidateScore> rank_candidates(const LosslessState& state, const Network& net,
                                            std::span<const std::size_t> candidates);

/// Loss-minimizing split of D0 over candidates, from the second- plus
/// third-order loss estimate restricted to nonnegative generator slacks.
ParticipationResult optimal_participation(const LosslessState& state, const Network& net,
                                          std::span<const std::size_t> candidates,
                                          const SimplexQpOptions& options = {});

struct SweepRow {
  double gamma = 0.0;
  std::vector<std::size_t> buses;
  Eigen::VectorXd factors;
  double objective = 0.0;
  std::string error;  // empty on success
};

std::vector<SweepRow> sweep_gamma(const CaseData& data, std::span<const std::size_t> candidates,
                                  std::span<const double> gammas, const SolverConfig& cfg = {});

/// rank_candidates plus a single-slack NR solve per candidate.
std::vector<CandidateScore> validate_ranking(const CaseData& data, const GammaMode& mode,
                                             std::span<const std::size_t> candidates,
                                             const SolverConfig& cfg = {});

/// Fills exact_loss / slack_total / iterations for already-ranked candidates.
void attach_exact_losses(std::vector<CandidateScore>& ranking, const OperatingPoint& op,
                         const SolverConfig& cfg = {});

}  // namespace rdslack
