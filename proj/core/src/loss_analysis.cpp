#include "rdslack/loss_analysis.hpp"

#include <cmath>
#include <sstream>

#include "rdslack/errors.hpp"

namespace rdslack {

using Eigen::Index;

namespace {

void check_vector(const LosslessState& state, const Eigen::VectorXd& x, const char* what) {
  if (x.size() != state.theta0.size()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " length does not match the number of buses");
  }
}

// x_i - x_j for every line
Eigen::VectorXd line_differences(const Network& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(static_cast<Index>(net.edges.size()));
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    out[static_cast<Index>(k)] =
        x[static_cast<Index>(net.edges[k].from)] - x[static_cast<Index>(net.edges[k].to)];
  }
  return out;
}

void check_constraint(const LosslessState& state, const Eigen::VectorXd& slack) {
  const double total = slack.sum();
  if (std::abs(total - state.d0) > 1e-9 * std::max(1.0, state.d0)) {
    std::ostringstream os;
    os << "slack vector sums to " << total << " p.u. but D0 = " << state.d0 << " p.u.";
    throw Error(ErrorCode::ConstraintViolated, os.str());
  }
}

}  // namespace

LosslessState lossless_state(const Network& net, const Eigen::VectorXd& theta0) {
  if (static_cast<std::size_t>(theta0.size()) != net.size()) {
    throw Error(ErrorCode::InvalidArgument, "phase vector length does not match network");
  }
  LosslessState s;
  s.theta0 = theta0;
  s.injection = net.injection;
  s.laplacian = build_laplacian(net, theta0);
  s.spectrum = decompose(s.laplacian);

  const Index n = static_cast<Index>(net.size());
  const Index m = static_cast<Index>(net.edges.size());
  s.v = Eigen::VectorXd::Zero(n);
  s.loss_v = Eigen::VectorXd::Zero(n);
  s.line_gamma.resize(m);
  s.line_weight.resize(m);
  s.line_flow.resize(m);

  bool uniform = true;
  for (Index k = 0; k < m; ++k) {
    const auto& e = net.edges[static_cast<std::size_t>(k)];
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    const double vi = net.voltage[i];
    const double vj = net.voltage[j];
    const double d = theta0[i] - theta0[j];
    const double c = std::cos(d);
    const double ratio = e.conductance / e.susceptance;

    s.line_gamma[k] = ratio;
    s.line_weight[k] = e.susceptance * vi * vj * c;
    s.line_flow[k] = e.susceptance * vi * vj * std::sin(d);

    s.v[i] += e.susceptance * vi * (vi - vj * c);
    s.v[j] += e.susceptance * vj * (vj - vi * c);
    s.loss_v[i] += e.conductance * vi * (vi - vj * c);
    s.loss_v[j] += e.conductance * vj * (vj - vi * c);
    s.d0 += e.conductance * (vi * vi + vj * vj - 2.0 * vi * vj * c);

    if (k > 0 && ratio != s.line_gamma[0]) uniform = false;
  }
  if (m > 0 && uniform) s.gamma = s.line_gamma[0];
  return s;
}

Eigen::VectorXd delta_theta1(const LosslessState& state, const Network& net,
                             const Eigen::VectorXd& slack) {
  check_vector(state, slack, "slack vector");
  return line_differences(net, state.spectrum.solve(slack - state.loss_v));
}

double order2_total(const LosslessState& state, const Network& net, const Eigen::VectorXd& slack) {
  check_constraint(state, slack);
  const Eigen::VectorXd dtheta = delta_theta1(state, net, slack);
  return state.d0 +
         2.0 * (state.line_gamma.array() * state.line_flow.array() * dtheta.array()).sum();
}

double slack_term(const LosslessState& state, const Eigen::VectorXd& injection,
                  const Eigen::VectorXd& slack, double gamma) {
  check_vector(state, injection, "injection vector");
  check_vector(state, slack, "slack vector");
  const Eigen::VectorXd p = state.spectrum.project(injection);
  const Eigen::VectorXd q = state.spectrum.project(slack);
  const auto& lambda = state.spectrum.eigenvalues();
  double sum = 0.0;
  for (Index l = 1; l < lambda.size(); ++l) sum += p[l] * q[l] / lambda[l];
  return 2.0 * gamma * sum;
}

double resistance_score(const LosslessState& state, std::size_t anchor) {
  const auto omega = resistance_vector(state.spectrum, anchor);
  return -omega.values.dot(state.injection);
}

ResistanceForm resistance_form(const LosslessState& state, const Eigen::VectorXd& injection,
                               std::size_t anchor, double gamma) {
  check_vector(state, injection, "injection vector");
  const auto omega = resistance_vector(state.spectrum, anchor);
  ResistanceForm out;
  out.score = -omega.values.dot(injection);
  out.slack_dependent = gamma * state.d0 * out.score;
  out.offset = gamma * state.d0 * state.spectrum.pseudoinverse().diagonal().dot(injection);
  return out;
}

double nlo_correction(const LosslessState& state, const Network& net,
                      const Eigen::VectorXd& slack) {
  const Eigen::VectorXd dtheta = delta_theta1(state, net, slack);
  return (state.line_gamma.array() * state.line_weight.array() * dtheta.array().square()).sum();
}

double spectral_identity_check(const LosslessState& state, const Network& net) {
  const auto& t = state.spectrum.eigenvectors();
  const Eigen::VectorXd direct = t.transpose() * state.injection;
  Eigen::VectorXd via_lines = Eigen::VectorXd::Zero(t.cols());
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const auto i = static_cast<Index>(net.edges[k].from);
    const auto j = static_cast<Index>(net.edges[k].to);
    via_lines += state.line_flow[static_cast<Index>(k)] * (t.row(i) - t.row(j)).transpose();
  }
  return (direct - via_lines).tail(t.cols() - 1).cwiseAbs().maxCoeff();
}

Eigen::VectorXd single_slack_vector(const LosslessState& state, std::size_t bus) {
  if (bus >= static_cast<std::size_t>(state.theta0.size())) {
    throw Error(ErrorCode::InvalidArgument, "bus index out of range");
  }
  Eigen::VectorXd slack = Eigen::VectorXd::Zero(state.theta0.size());
  slack[static_cast<Index>(bus)] = state.d0;
  return slack;
}

LossBreakdown loss_breakdown(const LosslessState& state, const Network& net,
                             const Eigen::VectorXd& slack) {
  check_constraint(state, slack);
  const Eigen::VectorXd dtheta = delta_theta1(state, net, slack);
  const Eigen::VectorXd dispatch_only = line_differences(net, state.spectrum.solve(slack));

  const auto gamma_flow = state.line_gamma.array() * state.line_flow.array();
  LossBreakdown out;
  out.d0 = state.d0;
  out.slack_term = 2.0 * (gamma_flow * dispatch_only.array()).sum();
  out.order2 = state.d0 + 2.0 * (gamma_flow * dtheta.array()).sum();
  out.nlo_term =
      (state.line_gamma.array() * state.line_weight.array() * dtheta.array().square()).sum();
  out.analytic_total = out.order2 + out.nlo_term;
  return out;
}

}  // namespace rdslack
