#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "rdslack/case_io.hpp"

namespace rdslack {

struct SolverConfig {
  double tolerance = 1e-10;  // bound on both the max and the summed active-power mismatch, p.u.
  int max_iterations = 50;
  // Flat start when empty. Any constant offset is removed before iterating.
  std::optional<Eigen::VectorXd> warm_start;

  SolverConfig with_warm_start(const Eigen::VectorXd& theta) const {
    SolverConfig c = *this;
    c.warm_start = theta;
    return c;
  }
};

struct FlowSolution {
  Eigen::VectorXd theta;            // radians, reference bus at 0
  Eigen::VectorXd slack_injection;  // delta P per bus, p.u.
  std::size_t reference = 0;
  double slack_scale = 0.0;         // s in delta P = s * alpha (distributed solve)
  int iterations = 0;
  double residual = 0.0;
  // set when some |theta_i - theta_j| >= pi/2 across a line
  bool overloaded = false;
  double max_phase_difference = 0.0;

  double total_slack() const { return slack_injection.sum(); }
};

/// P_i = sum_j b_ij V_i V_j sin(theta_i - theta_j). Requires balanced injections;
/// bus 0 is the phase reference and its equation is dropped.
FlowSolution solve_lossless(const Network& net, const SolverConfig& cfg = {});

/// Lossy flow with all losses taken by `slack`, which must be a generator bus.
FlowSolution solve_single_slack(const Network& net, std::size_t slack,
                                const SolverConfig& cfg = {});

/// Lossy flow with delta P = s * alpha; alpha >= 0, sum 1, supported on
/// generators. The bus with the largest factor is the phase reference.
FlowSolution solve_distributed_slack(const Network& net, const Eigen::VectorXd& alpha,
                                     const SolverConfig& cfg = {});

/// sum over lines of g_ij (V_i^2 + V_j^2 - 2 V_i V_j cos(theta_i - theta_j)).
double exact_dissipation(const Network& net, const Eigen::VectorXd& theta);

/// Net active power leaving each bus into the network at phases `theta`.
Eigen::VectorXd network_injections(const Network& net, const Eigen::VectorXd& theta,
                                   bool include_conductance = true);

double max_phase_difference(const Network& net, const Eigen::VectorXd& theta);

}  // namespace rdslack
