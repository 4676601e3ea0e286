#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rdslack::cli {

enum class ReportKind { Rank, Sweep, Check };

struct CandidateRow {
  int bus = 0;  // case bus id
  double score = 0.0;
  double d0 = 0.0;
  double d_o2 = 0.0;
  double d_o3 = 0.0;
  std::optional<double> d_exact;
  int iterations = 0;
  bool tied = false;
  std::string status = "ok";
};

struct ParticipationRow {
  double gamma = 0.0;
  int bus = 0;
  std::optional<double> factor;  // empty when the sweep point failed
};

struct SweepPoint {
  double gamma = 0.0;
  std::optional<double> objective;
  std::string status = "ok";
};

struct CheckRow {
  std::string name;
  double deviation = 0.0;
  double threshold = 0.0;
  bool passed() const { return deviation <= threshold; }
};

struct Metadata {
  double tolerance = 0.0;
  int max_iterations = 0;
  std::string timestamp;
  std::string version;
};

struct RunReport {
  ReportKind kind = ReportKind::Rank;
  std::string case_name;
  std::string mode;
  std::vector<CandidateRow> candidates;
  std::vector<int> sweep_buses;
  std::vector<SweepPoint> sweep_points;
  std::vector<ParticipationRow> participation;
  std::vector<CheckRow> checks;
  Metadata metadata;

  bool checks_passed() const;
};

std::string format_number(double x);

void write_csv(std::ostream& os, const RunReport& report);

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

}  // namespace rdslack::cli
