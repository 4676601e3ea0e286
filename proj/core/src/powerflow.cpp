#include "rdslack/powerflow.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rdslack/errors.hpp"

namespace rdslack {

using Eigen::Index;

namespace {

void check_length(const Network& net, const Eigen::VectorXd& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != net.size()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " length does not match the number of buses");
  }
}

// d(injection)/d(theta), dense N x N.
Eigen::MatrixXd jacobian(const Network& net, const Eigen::VectorXd& theta, bool lossy) {
  const Index n = static_cast<Index>(net.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : net.edges) {
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    const double vv = net.voltage[i] * net.voltage[j];
    const double d = theta[i] - theta[j];
    const double bc = e.susceptance * vv * std::cos(d);
    const double gs = lossy ? e.conductance * vv * std::sin(d) : 0.0;
    // flow_i = b vv sin d + g V_i^2 - g vv cos d ; flow_j likewise with d -> -d
    const double di = bc + gs;
    const double dj = -bc + gs;
    jac(i, i) += di;
    jac(i, j) -= di;
    jac(j, i) += dj;
    jac(j, j) -= dj;
  }
  return jac;
}

std::vector<Index> all_but(Index n, std::size_t skip) {
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    if (static_cast<std::size_t>(k) != skip) keep.push_back(k);
  }
  return keep;
}

Eigen::VectorXd initial_phases(const Network& net, const SolverConfig& cfg, std::size_t ref) {
  const Index n = static_cast<Index>(net.size());
  if (!cfg.warm_start) return Eigen::VectorXd::Zero(n);
  check_length(net, *cfg.warm_start, "warm start");
  return cfg.warm_start->array() - (*cfg.warm_start)[static_cast<Index>(ref)];
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  if (cfg.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

[[noreturn]] void fail(const char* solver, int iterations, double residual) {
  std::ostringstream os;
  os << solver << " did not converge after " << iterations << " iterations (residual "
     << residual << " p.u.)";
  throw NoConvergenceError(iterations, residual, os.str());
}

void finish(const Network& net, FlowSolution& sol) {
  sol.max_phase_difference = max_phase_difference(net, sol.theta);
  sol.overloaded = sol.max_phase_difference >= std::numbers::pi / 2.0;
}

// Newton iteration on a subset of the equations with the reference phase fixed.
FlowSolution solve_fixed_reference(const Network& net, std::size_t ref, bool lossy,
                                   const SolverConfig& cfg, const char* name) {
  validate_config(cfg);
  const Index n = static_cast<Index>(net.size());
  const auto keep = all_but(n, ref);
  const Index m = static_cast<Index>(keep.size());

  FlowSolution sol;
  sol.reference = ref;
  sol.theta = initial_phases(net, cfg, ref);

  Eigen::VectorXd mismatch(m);
  Eigen::MatrixXd reduced(m, m);
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd full = network_injections(net, sol.theta, lossy) - net.injection;
    for (Index k = 0; k < m; ++k) mismatch[k] = full[keep[static_cast<std::size_t>(k)]];
    sol.residual = m > 0 ? mismatch.cwiseAbs().maxCoeff() : 0.0;
    sol.iterations = iter;
    if (!std::isfinite(sol.residual)) fail(name, iter, sol.residual);
    // summed mismatch bounds the slack/dissipation gap, so it must meet the tolerance too
    if (sol.residual < cfg.tolerance && (m == 0 || mismatch.lpNorm<1>() < cfg.tolerance)) break;
    if (iter >= cfg.max_iterations) fail(name, iter, sol.residual);

    const Eigen::MatrixXd jac = jacobian(net, sol.theta, lossy);
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < m; ++c) {
        reduced(r, c) = jac(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
      }
    }
    const Eigen::VectorXd step = reduced.partialPivLu().solve(mismatch);
    for (Index k = 0; k < m; ++k) sol.theta[keep[static_cast<std::size_t>(k)]] -= step[k];
  }
  return sol;
}

}  // namespace

Eigen::VectorXd network_injections(const Network& net, const Eigen::VectorXd& theta,
                                   bool include_conductance) {
  check_length(net, theta, "phase vector");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(net.size()));
  for (const auto& e : net.edges) {
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    const double vi = net.voltage[i];
    const double vj = net.voltage[j];
    const double d = theta[i] - theta[j];
    const double active = e.susceptance * vi * vj * std::sin(d);
    out[i] += active;
    out[j] -= active;
    if (include_conductance && e.conductance != 0.0) {
      const double c = std::cos(d);
      out[i] += e.conductance * vi * (vi - vj * c);
      out[j] += e.conductance * vj * (vj - vi * c);
    }
  }
  return out;
}

double max_phase_difference(const Network& net, const Eigen::VectorXd& theta) {
  double worst = 0.0;
  for (const auto& e : net.edges) {
    worst = std::max(worst, std::abs(theta[static_cast<Index>(e.from)] -
                                     theta[static_cast<Index>(e.to)]));
  }
  return worst;
}

double exact_dissipation(const Network& net, const Eigen::VectorXd& theta) {
  check_length(net, theta, "phase vector");
  double total = 0.0;
  for (const auto& e : net.edges) {
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    const double vi = net.voltage[i];
    const double vj = net.voltage[j];
    total += e.conductance * (vi * vi + vj * vj - 2.0 * vi * vj * std::cos(theta[i] - theta[j]));
  }
  return total;
}

FlowSolution solve_lossless(const Network& net, const SolverConfig& cfg) {
  const double imbalance = net.injection.sum();
  const double scale = std::max(1.0, net.injection.cwiseAbs().sum());
  if (std::abs(imbalance) > 1e-9 * scale) {
    std::ostringstream os;
    os << "lossless flow needs balanced injections (sum P = " << imbalance << " p.u.)";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  FlowSolution sol = solve_fixed_reference(net, 0, false, cfg, "lossless power flow");
  sol.slack_injection = Eigen::VectorXd::Zero(static_cast<Index>(net.size()));
  // the dropped reference equation holds by balance; report it anyway
  const Eigen::VectorXd full = network_injections(net, sol.theta, false) - net.injection;
  sol.residual = full.cwiseAbs().maxCoeff();
  finish(net, sol);
  return sol;
}

FlowSolution solve_single_slack(const Network& net, std::size_t slack, const SolverConfig& cfg) {
  if (slack >= net.size() || !net.is_generator(slack)) {
    throw Error(ErrorCode::SlackNotGenerator,
                "slack bus index " + std::to_string(slack) + " is not an in-service generator");
  }
  FlowSolution sol = solve_fixed_reference(net, slack, true, cfg, "single-slack power flow");
  const auto g = static_cast<Index>(slack);
  sol.slack_injection = Eigen::VectorXd::Zero(static_cast<Index>(net.size()));
  sol.slack_injection[g] = network_injections(net, sol.theta, true)[g] - net.injection[g];
  sol.slack_scale = sol.slack_injection[g];
  finish(net, sol);
  return sol;
}

FlowSolution solve_distributed_slack(const Network& net, const Eigen::VectorXd& alpha,
                                     const SolverConfig& cfg) {
  validate_config(cfg);
  check_length(net, alpha, "participation vector");
  const Index n = static_cast<Index>(net.size());
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(alpha[i]) || alpha[i] < 0.0) {
      throw Error(ErrorCode::BadParticipation, "participation factors must be finite and >= 0");
    }
    if (alpha[i] > 0.0 && !net.is_generator(static_cast<std::size_t>(i))) {
      throw Error(ErrorCode::BadParticipation,
                  "participation assigned to non-generator bus " +
                      std::to_string(net.bus_ids[static_cast<std::size_t>(i)]));
    }
  }
  if (std::abs(alpha.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::BadParticipation, "participation factors must sum to 1");
  }

  Index ref_index = 0;
  alpha.maxCoeff(&ref_index);  // first maximum -> lowest index on ties
  const auto ref = static_cast<std::size_t>(ref_index);
  const auto keep = all_but(n, ref);
  const Index m = static_cast<Index>(keep.size());

  FlowSolution sol;
  sol.reference = ref;
  sol.theta = initial_phases(net, cfg, ref);
  double s = 0.0;

  Eigen::MatrixXd system(n, n);
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd mismatch =
        network_injections(net, sol.theta, true) - net.injection - s * alpha;
    sol.residual = mismatch.cwiseAbs().maxCoeff();
    sol.iterations = iter;
    if (!std::isfinite(sol.residual)) fail("distributed-slack power flow", iter, sol.residual);
    if (mismatch.lpNorm<1>() < cfg.tolerance) break;
    if (iter >= cfg.max_iterations) fail("distributed-slack power flow", iter, sol.residual);

    const Eigen::MatrixXd jac = jacobian(net, sol.theta, true);
    for (Index c = 0; c < m; ++c) system.col(c) = jac.col(keep[static_cast<std::size_t>(c)]);
    system.col(m) = -alpha;
    const Eigen::VectorXd step = system.partialPivLu().solve(mismatch);
    for (Index k = 0; k < m; ++k) sol.theta[keep[static_cast<std::size_t>(k)]] -= step[k];
    s -= step[m];
  }
  sol.slack_scale = s;
  sol.slack_injection = s * alpha;
  finish(net, sol);
  return sol;
}

}  // namespace rdslack
