#include "rdslack/slack_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "rdslack/errors.hpp"

namespace rdslack {

using Eigen::Index;

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr double kFactorFloor = 1e-6;

// Scores that vanish by symmetry carry only rounding noise, so the relative
// test gets a floor at the natural score magnitude |P|_1 * mean(Omega).
double score_floor(const LosslessState& state) {
  const auto& pinv = state.spectrum.pseudoinverse();
  const double n = static_cast<double>(pinv.rows());
  return state.injection.lpNorm<1>() * 2.0 * pinv.trace() / n;
}

bool near_tie(double a, double b, double floor) {
  return std::abs(a - b) <= kTieTolerance * std::max({std::abs(a), std::abs(b), floor});
}

void require_generators(const Network& net, std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidateSet, "no slack candidates");
  for (const auto bus : candidates) {
    if (bus >= net.size() || !net.is_generator(bus)) {
      throw Error(ErrorCode::SlackNotGenerator,
                  "candidate index " + std::to_string(bus) + " is not an in-service generator");
    }
  }
}

std::size_t best_score_index(const LosslessState& state, std::span<const std::size_t> candidates) {
  const double floor = score_floor(state);
  std::size_t best = 0;
  double best_score = resistance_score(state, candidates[0]);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double s = resistance_score(state, candidates[k]);
    if (s < best_score && !near_tie(s, best_score, floor)) {
      best = k;
      best_score = s;
    } else if (near_tie(s, best_score, floor) && candidates[k] < candidates[best]) {
      best = k;
    }
  }
  return best;
}

}  // namespace

std::size_t ParticipationResult::active_count() const {
  return static_cast<std::size_t>((factors.array() > 0.0).count());
}

OperatingPoint prepare_operating_point(const CaseData& data, const GammaMode& mode,
                                       const SolverConfig& cfg) {
  Network net = balance_injections(build_network(data, mode));
  SolverConfig lossless_cfg = cfg;
  lossless_cfg.warm_start.reset();
  FlowSolution lossless = solve_lossless(net, lossless_cfg);
  LosslessState state = lossless_state(net, lossless.theta);
  return OperatingPoint{std::move(net), std::move(lossless), std::move(state)};
}

std::vector<std::size_t> filter_candidates(const Network& net, double min_injection) {
  if (!(min_injection >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_injection must be >= 0");
  }
  std::vector<std::size_t> out;
  for (const auto bus : net.gen_buses) {
    if (net.generation[static_cast<Index>(bus)] > min_injection) out.push_back(bus);
  }
  return out;
}

std::vector<CandidateScore> rank_candidates(const LosslessState& state, const Network& net,
                                            std::span<const std::size_t> candidates) {
  require_generators(net, candidates);
  auto rows = detail::parallel_map(candidates.size(), [&](std::size_t k) {
    CandidateScore row;
    row.bus = candidates[k];
    row.score = resistance_score(state, row.bus);
    const auto breakdown = loss_breakdown(state, net, single_slack_vector(state, row.bus));
    row.d0 = breakdown.d0;
    row.predicted_loss_o2 = breakdown.order2;
    row.predicted_loss_o3 = breakdown.analytic_total;
    return row;
  });

  const double floor = score_floor(state);
  std::sort(rows.begin(), rows.end(), [](const CandidateScore& a, const CandidateScore& b) {
    return a.score != b.score ? a.score < b.score : a.bus < b.bus;
  });
  // runs of near-equal scores are reported in bus order
  for (std::size_t start = 0; start < rows.size();) {
    std::size_t end = start + 1;
    while (end < rows.size() && near_tie(rows[start].score, rows[end].score, floor)) ++end;
    std::sort(rows.begin() + static_cast<std::ptrdiff_t>(start),
              rows.begin() + static_cast<std::ptrdiff_t>(end),
              [](const CandidateScore& a, const CandidateScore& b) { return a.bus < b.bus; });
    start = end;
  }
  const auto tie_size = std::count_if(rows.begin(), rows.end(), [&](const CandidateScore& r) {
    return near_tie(r.score, rows.front().score, floor);
  });
  for (auto& row : rows) row.tied = tie_size > 1 && near_tie(row.score, rows.front().score, floor);
  return rows;
}

ParticipationResult optimal_participation(const LosslessState& state, const Network& net,
                                          std::span<const std::size_t> candidates,
                                          const SimplexQpOptions& options) {
  require_generators(net, candidates);
  const Index k = static_cast<Index>(candidates.size());
  const Index m = static_cast<Index>(net.edges.size());

  ParticipationResult out;
  out.buses.assign(candidates.begin(), candidates.end());
  out.gamma = state.gamma;

  const std::size_t best = best_score_index(state, candidates);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(k);
  start[static_cast<Index>(best)] = 1.0;

  if (state.d0 <= 0.0) {
    // no losses to share: the limit gamma -> 0 is the best single slack
    out.raw_factors = start;
    out.factors = start;
    out.objective = 0.0;
    out.converged = true;
    return out;
  }

  // Line phase corrections are affine in the factors z:
  //   dtheta = D0 * A z + c0,  A_ek = L+_{i,g_k} - L+_{j,g_k},  c0 = -diff(L+ loss_v).
  const auto& pinv = state.spectrum.pseudoinverse();
  Eigen::MatrixXd a(m, k);
  for (Index e = 0; e < m; ++e) {
    const auto i = static_cast<Index>(net.edges[static_cast<std::size_t>(e)].from);
    const auto j = static_cast<Index>(net.edges[static_cast<std::size_t>(e)].to);
    for (Index c = 0; c < k; ++c) {
      const auto g = static_cast<Index>(candidates[static_cast<std::size_t>(c)]);
      a(e, c) = pinv(i, g) - pinv(j, g);
    }
  }
  const Eigen::VectorXd base_shift = -(pinv * state.loss_v);
  Eigen::VectorXd c0(m);
  for (Index e = 0; e < m; ++e) {
    const auto& edge = net.edges[static_cast<std::size_t>(e)];
    c0[e] = base_shift[static_cast<Index>(edge.from)] - base_shift[static_cast<Index>(edge.to)];
  }

  // loss(z) = D0 + lin_e . dtheta + dtheta^T diag(quad_e) dtheta
  const Eigen::VectorXd lin_e = 2.0 * state.line_gamma.cwiseProduct(state.line_flow);
  const Eigen::VectorXd quad_e = state.line_gamma.cwiseProduct(state.line_weight);
  const double d0 = state.d0;

  const Eigen::MatrixXd weighted = quad_e.asDiagonal() * a;
  Eigen::MatrixXd hessian = 2.0 * d0 * d0 * (a.transpose() * weighted);
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  const Eigen::VectorXd linear =
      d0 * (a.transpose() * lin_e) + 2.0 * d0 * (weighted.transpose() * c0);
  const double constant = d0 + lin_e.dot(c0) + c0.dot(quad_e.cwiseProduct(c0));

  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian, Eigen::EigenvaluesOnly).eigenvalues();
  const double norm = eig.cwiseAbs().maxCoeff();
  if (eig.minCoeff() < -1e-10 * norm) {
    throw Error(ErrorCode::NonConvexObjective,
                "loss estimate is not convex in the participation factors; some line has "
                "|theta_i - theta_j| > pi/2");
  }

  const auto qp = minimize_on_simplex(hessian, linear, start, options);
  out.raw_factors = qp.x;
  out.objective = constant + qp.objective;
  out.kkt_residual = qp.kkt_residual;
  out.iterations = qp.iterations;
  out.converged = qp.converged;

  out.factors = (qp.x.array() < kFactorFloor).select(0.0, qp.x);
  const double kept = out.factors.sum();
  if (kept > 0.0) {
    out.factors /= kept;
  } else {
    out.factors = start;
  }
  return out;
}

std::vector<SweepRow> sweep_gamma(const CaseData& data, std::span<const std::size_t> candidates,
                                  std::span<const double> gammas, const SolverConfig& cfg) {
  if (gammas.empty()) throw Error(ErrorCode::InvalidArgument, "no gamma values to sweep");
  for (const double g : gammas) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::InvalidArgument, "gamma values must be finite and >= 0");
    }
  }
  // The lossless phases do not depend on gamma; solve once.
  const OperatingPoint base = prepare_operating_point(data, GammaMode::homogeneous(0.0), cfg);

  return detail::parallel_map(gammas.size(), [&](std::size_t idx) {
    SweepRow row;
    row.gamma = gammas[idx];
    row.buses.assign(candidates.begin(), candidates.end());
    try {
      const Network net =
          balance_injections(build_network(data, GammaMode::homogeneous(row.gamma)));
      const LosslessState state = lossless_state(net, base.lossless.theta);
      const auto result = optimal_participation(state, net, candidates);
      row.factors = result.factors;
      row.objective = result.objective;
      if (!result.converged) row.error = "participation QP hit the iteration limit";
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
      row.factors = Eigen::VectorXd::Constant(static_cast<Index>(candidates.size()), std::nan(""));
    }
    return row;
  });
}

void attach_exact_losses(std::vector<CandidateScore>& ranking, const OperatingPoint& op,
                         const SolverConfig& cfg) {
  const SolverConfig warm = cfg.warm_start ? cfg : cfg.with_warm_start(op.lossless.theta);
  auto solved = detail::parallel_map(ranking.size(), [&](std::size_t k) {
    CandidateScore row = ranking[k];
    try {
      const auto sol = solve_single_slack(op.network, row.bus, warm);
      row.exact_loss = exact_dissipation(op.network, sol.theta);
      row.slack_total = sol.total_slack();
      row.iterations = sol.iterations;
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    return row;
  });
  ranking = std::move(solved);
}

std::vector<CandidateScore> validate_ranking(const CaseData& data, const GammaMode& mode,
                                             std::span<const std::size_t> candidates,
                                             const SolverConfig& cfg) {
  const OperatingPoint op = prepare_operating_point(data, mode, cfg);
  auto ranking = rank_candidates(op.state, op.network, candidates);
  attach_exact_losses(ranking, op, cfg);
  return ranking;
}

}  // namespace rdslack
