#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "rdslack/errors.hpp"
#include "rdslack/graph_metrics.hpp"
#include "rdslack/loss_analysis.hpp"
#include "rdslack/slack_select.hpp"

namespace rdslack::cli {

namespace {

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw UsageError("invalid " + what + " '" + std::string(s) + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

Metadata make_metadata(const SolverConfig& cfg) {
  Metadata m;
  m.tolerance = cfg.tolerance;
  m.max_iterations = cfg.max_iterations;
  m.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                            fmt::gmtime(std::chrono::system_clock::to_time_t(
                                std::chrono::system_clock::now())));
  m.version = RDSLACK_VERSION;
  return m;
}

std::vector<std::size_t> resolve_candidates(const Network& net, const CandidateSpec& spec,
                                            double min_injection) {
  if (!spec.bus_ids.empty()) {
    std::vector<std::size_t> out;
    for (const int id : spec.bus_ids) out.push_back(net.index_of(id));
    return out;
  }
  if (spec.all) return net.gen_buses;
  return filter_candidates(net, min_injection);
}

WeightedLaplacian load_laplacian(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedCaseError(0, "cannot open Laplacian file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw MalformedCaseError(number, "non-numeric entry '" + token + "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto n = rows.size();
  if (n == 0) throw MalformedCaseError(0, "empty Laplacian file");
  WeightedLaplacian lap;
  lap.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw MalformedCaseError(0, "Laplacian matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      lap.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return lap;
}

void add_spectrum_checks(RunReport& report, const WeightedLaplacian& lap, const Spectrum& s,
                         double threshold) {
  const auto diag = spectrum_diagnostics(s, lap);
  report.checks.push_back({"laplacian_row_sums", lap.row_sum_defect(), threshold});
  report.checks.push_back({"laplacian_symmetry", lap.asymmetry(), threshold});
  report.checks.push_back({"spectrum_reconstruction", diag.reconstruction, threshold});
  report.checks.push_back({"spectrum_orthonormality", diag.orthonormality, threshold});
  report.checks.push_back({"gamma_inverse", gamma_inverse_identity_check(s, lap), threshold});
}

}  // namespace

std::vector<double> parse_gammas(const std::string& text) {
  if (text.find_first_not_of(' ') == std::string::npos) throw UsageError("empty gamma list");
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("gamma range must be start:stop:step");
    const double start = parse_double(parts[0], "gamma start");
    const double stop = parse_double(parts[1], "gamma stop");
    const double step = parse_double(parts[2], "gamma step");
    if (!(step > 0.0) || stop < start) throw UsageError("gamma range needs step > 0 and stop >= start");
    // count from the rounded number of steps so 0:0.6:0.02 gives 31 points
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item, "gamma"));
  }
  for (const double g : out) {
    if (g < 0.0) throw UsageError("gamma values must be >= 0");
  }
  return out;
}

CandidateSpec parse_candidates(const std::string& text) {
  CandidateSpec spec;
  if (text == "all") {
    spec.all = true;
    return spec;
  }
  for (const auto& item : split(text, ',')) {
    const double v = parse_double(item, "bus id");
    if (v != std::floor(v)) throw UsageError("bus ids must be integers: '" + item + "'");
    spec.bus_ids.push_back(static_cast<int>(v));
  }
  if (spec.bus_ids.empty()) throw UsageError("empty candidate list");
  return spec;
}

RunReport run_rank(const RankOptions& opts) {
  const auto& c = opts.common;
  const CaseData data = load_matpower(c.case_path);
  const OperatingPoint op = prepare_operating_point(data, c.mode, c.solver);
  const auto candidates = resolve_candidates(op.network, c.candidates, c.min_injection);
  auto ranking = rank_candidates(op.state, op.network, candidates);
  if (opts.validate) attach_exact_losses(ranking, op, c.solver);

  RunReport report;
  report.kind = ReportKind::Rank;
  report.case_name = data.name;
  report.mode = c.mode.describe();
  report.metadata = make_metadata(c.solver);
  for (const auto& r : ranking) {
    CandidateRow row;
    row.bus = op.network.bus_ids[r.bus];
    row.score = r.score;
    row.d0 = r.d0;
    row.d_o2 = r.predicted_loss_o2;
    row.d_o3 = r.predicted_loss_o3;
    row.d_exact = r.exact_loss;
    row.iterations = r.iterations;
    row.tied = r.tied;
    if (!r.error.empty()) row.status = r.error;
    report.candidates.push_back(std::move(row));
  }
  return report;
}

RunReport run_sweep(const SweepOptions& opts) {
  const auto& c = opts.common;
  if (opts.gammas.empty()) throw UsageError("empty gamma list");
  const CaseData data = load_matpower(c.case_path);
  const Network net = balance_injections(build_network(data, GammaMode::homogeneous(0.0)));
  const auto candidates = resolve_candidates(net, c.candidates, c.min_injection);
  const auto rows = sweep_gamma(data, candidates, opts.gammas, c.solver);

  RunReport report;
  report.kind = ReportKind::Sweep;
  report.case_name = data.name;
  report.mode = "homogeneous(sweep)";
  report.metadata = make_metadata(c.solver);
  for (const auto b : candidates) report.sweep_buses.push_back(net.bus_ids[b]);
  for (const auto& row : rows) {
    SweepPoint pt;
    pt.gamma = row.gamma;
    if (row.error.empty()) {
      pt.objective = row.objective;
    } else {
      pt.status = row.error;
    }
    report.sweep_points.push_back(pt);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      ParticipationRow p;
      p.gamma = row.gamma;
      p.bus = net.bus_ids[candidates[k]];
      const double f = row.factors[static_cast<Eigen::Index>(k)];
      if (std::isfinite(f)) p.factor = f;
      report.participation.push_back(p);
    }
  }
  return report;
}

RunReport run_check(const CheckOptions& opts) {
  RunReport report;
  report.kind = ReportKind::Check;
  report.metadata = make_metadata(opts.solver);

  if (opts.laplacian_path) {
    const auto lap = load_laplacian(*opts.laplacian_path);
    report.case_name = opts.laplacian_path->stem().string();
    report.mode = "laplacian";
    const Eigen::MatrixXd off =
        lap.matrix - Eigen::MatrixXd(lap.matrix.diagonal().asDiagonal());
    const double scale = std::max(lap.matrix.cwiseAbs().maxCoeff(), 1e-300);
    report.checks.push_back({"laplacian_offdiagonal_sign", std::max(0.0, off.maxCoeff()) / scale,
                             opts.threshold});
    add_spectrum_checks(report, lap, decompose(lap), opts.threshold);
    return report;
  }
  if (!opts.case_path) throw UsageError("check needs --case or --laplacian");

  const CaseData data = load_matpower(*opts.case_path);
  const OperatingPoint op = prepare_operating_point(data, opts.mode, opts.solver);
  report.case_name = data.name;
  report.mode = opts.mode.describe();

  report.checks.push_back({"lossless_residual", op.lossless.residual, opts.threshold});
  add_spectrum_checks(report, op.state.laplacian, op.state.spectrum, opts.threshold);
  report.checks.push_back(
      {"spectral_projection", spectral_identity_check(op.state, op.network), opts.threshold});
  report.checks.push_back(
      {"loss_potentials", std::abs(op.state.loss_v.sum() - op.state.d0), opts.threshold});

  const auto ranking = rank_candidates(op.state, op.network, op.network.gen_buses);
  const auto sol = solve_single_slack(op.network, ranking.front().bus,
                                      SolverConfig(opts.solver).with_warm_start(op.lossless.theta));
  report.checks.push_back({"slack_conservation",
                           std::abs(sol.total_slack() - exact_dissipation(op.network, sol.theta)),
                           opts.conservation_threshold});
  return report;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NotConnected:
    case ErrorCode::NoConvergence:
    case ErrorCode::NonConvexObjective:
    case ErrorCode::BadParticipation:
    case ErrorCode::ConstraintViolated:
      return kSolverFailure;
    default:
      return kInputError;
  }
}

}  // namespace rdslack::cli
