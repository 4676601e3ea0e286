#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "rdslack/errors.hpp"

namespace {

using namespace rdslack::cli;

struct Flags {
  std::string case_path;
  std::optional<double> gamma;
  bool tabulated = false;
  std::string gammas;
  std::string candidates;
  double min_injection = 0.0;
  bool validate = false;
  std::string format = "csv";
  double tol = 1e-10;
  int max_iter = 50;
  std::string out;
  std::string laplacian;
};

void add_output_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--tol", f.tol, "Newton-Raphson mismatch tolerance (p.u.)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "Newton-Raphson iteration limit")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Write output to this file instead of stdout");
}

void add_mode_flags(CLI::App* cmd, Flags& f) {
  auto* g = cmd->add_option("--gamma", f.gamma, "Homogeneous g/b ratio on every line")
                ->check(CLI::NonNegativeNumber);
  auto* t = cmd->add_flag("--tabulated", f.tabulated, "Use r and x from the case file");
  g->excludes(t);
}

void add_candidate_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--candidates", f.candidates, "Comma-separated bus ids, or 'all'");
  cmd->add_option("--min-injection", f.min_injection,
                  "Keep generators with output above this (p.u.)")
      ->check(CLI::NonNegativeNumber);
}

CommonOptions common_from(const Flags& f) {
  CommonOptions c;
  c.case_path = f.case_path;
  if (f.tabulated) {
    c.mode = rdslack::GammaMode::tabulated();
  } else if (f.gamma) {
    c.mode = rdslack::GammaMode::homogeneous(*f.gamma);
  }
  if (!f.candidates.empty()) c.candidates = parse_candidates(f.candidates);
  c.min_injection = f.min_injection;
  c.solver.tolerance = f.tol;
  c.solver.max_iterations = f.max_iter;
  return c;
}

void emit(const RunReport& report, const Flags& f) {
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) throw rdslack::Error(rdslack::ErrorCode::InvalidArgument, "cannot write " + f.out);
  }
  std::ostream& os = f.out.empty() ? std::cout : file;
  if (f.format == "json") {
    os << nlohmann::json(report).dump(2) << '\n';
  } else {
    write_csv(os, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slack bus selection by resistance distance"};
  app.set_version_flag("--version", RDSLACK_VERSION);
  app.require_subcommand(1);

  Flags f;

  auto* rank = app.add_subcommand("rank", "Rank slack candidates by the resistance-distance score");
  rank->add_option("--case", f.case_path, "MATPOWER case file")->required();
  add_mode_flags(rank, f);
  add_candidate_flags(rank, f);
  rank->add_flag("--validate", f.validate, "Add exact Newton-Raphson losses per candidate");
  add_output_flags(rank, f);

  auto* sweep = app.add_subcommand("sweep", "Optimal participation factors over a range of g/b");
  sweep->add_option("--case", f.case_path, "MATPOWER case file")->required();
  sweep->add_option("--gammas", f.gammas, "start:stop:step or a comma list")->required();
  add_candidate_flags(sweep, f);
  add_output_flags(sweep, f);

  auto* check = app.add_subcommand("check", "Run the numerical identity checks");
  auto* check_case = check->add_option("--case", f.case_path, "MATPOWER case file");
  auto* check_lap = check->add_option("--laplacian", f.laplacian, "Whitespace-separated matrix file");
  check_case->excludes(check_lap);
  add_mode_flags(check, f);
  add_output_flags(check, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*rank) {
      RankOptions opts;
      opts.common = common_from(f);
      opts.validate = f.validate;
      emit(run_rank(opts), f);
    } else if (*sweep) {
      SweepOptions opts;
      opts.common = common_from(f);
      opts.gammas = parse_gammas(f.gammas);
      emit(run_sweep(opts), f);
    } else {
      CheckOptions opts;
      const auto c = common_from(f);
      if (!f.case_path.empty()) opts.case_path = f.case_path;
      if (!f.laplacian.empty()) opts.laplacian_path = f.laplacian;
      opts.mode = c.mode;
      opts.solver = c.solver;
      const auto report = run_check(opts);
      emit(report, f);
      if (!report.checks_passed()) {
        std::cerr << "rdslack: identity check failed\n";
        return kIdentityFailure;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "rdslack: " << e.what() << '\n';
    return kUsage;
  } catch (const rdslack::Error& e) {
    std::cerr << "rdslack: " << rdslack::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}
