#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "rdslack/case_io.hpp"
#include "rdslack/graph_metrics.hpp"

namespace rdslack {

/// Everything the loss expansion needs from the lossless operating point.
///
/// Slack vectors passed to the functions below are physical powers in p.u.
/// (gamma * delta P^(1) in expansion terms), and phase corrections come back
/// in radians. On networks with uneven g/b the per-line ratio gamma_ij enters
/// the D0, second- and third-order line sums; the spectral part is unchanged.
struct LosslessState {
  Eigen::VectorXd theta0;
  WeightedLaplacian laplacian;
  Spectrum spectrum;
  Eigen::VectorXd injection;  // P used for the lossless solve

  // v_i = sum_j b_ij V_i (V_i - V_j cos(theta_i - theta_j))
  Eigen::VectorXd v;
  // same sum weighted by g_ij instead of b_ij; equals gamma * v when homogeneous
  Eigen::VectorXd loss_v;
  double d0 = 0.0;

  // per line, in net.edges order
  Eigen::VectorXd line_gamma;   // g_ij / b_ij
  Eigen::VectorXd line_weight;  // b_ij V_i V_j cos(...)
  Eigen::VectorXd line_flow;    // b_ij V_i V_j sin(...)

  // common g/b ratio when every line shares it
  std::optional<double> gamma;
};

LosslessState lossless_state(const Network& net, const Eigen::VectorXd& theta0);

/// First-order phase corrections per line: (theta_i - theta_j) to first order
/// minus the lossless difference, for the given physical slack vector.
Eigen::VectorXd delta_theta1(const LosslessState& state, const Network& net,
                             const Eigen::VectorXd& slack);

/// D0 plus the full second-order term. Throws ConstraintViolated unless
/// sum(slack) == D0 within 1e-9 (scaled by max(1, D0)).
double order2_total(const LosslessState& state, const Network& net, const Eigen::VectorXd& slack);

/// Slack-dependent second-order piece
/// 2 gamma sum_{l>=2} (u_l . P)(u_l . slack) / lambda_l.
double slack_term(const LosslessState& state, const Eigen::VectorXd& injection,
                  const Eigen::VectorXd& slack, double gamma);

struct ResistanceForm {
  double slack_dependent = 0.0;  // gamma D0 (-Omega_g . P)
  double offset = 0.0;           // gamma D0 sum_{l>=2,i} P_i u_i^2 / lambda_l
  double score = 0.0;            // -Omega_g . P
};

ResistanceForm resistance_form(const LosslessState& state, const Eigen::VectorXd& injection,
                               std::size_t anchor, double gamma);

/// -Omega_g . P, the slack selection criterion.
double resistance_score(const LosslessState& state, std::size_t anchor);

/// Third-order term quadratic in the first-order phase corrections,
/// sum_ij gamma_ij b_ij V_i V_j cos(...) (delta theta_i - delta theta_j)^2.
double nlo_correction(const LosslessState& state, const Network& net,
                      const Eigen::VectorXd& slack);

/// u_l . P against sum_ij b_ij V_i V_j (u_i - u_j) sin(...), max deviation over l >= 2.
double spectral_identity_check(const LosslessState& state, const Network& net);

/// Slack vector with all of D0 at one bus.
Eigen::VectorXd single_slack_vector(const LosslessState& state, std::size_t bus);

struct LossBreakdown {
  double d0 = 0.0;
  double slack_term = 0.0;      // slack-dependent second-order piece
  double order2 = 0.0;          // D0 + full second-order term
  double nlo_term = 0.0;
  double analytic_total = 0.0;  // order2 + nlo_term
  std::optional<double> exact;
};

LossBreakdown loss_breakdown(const LosslessState& state, const Network& net,
                             const Eigen::VectorXd& slack);

}  // namespace rdslack
