#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace rdslack::cli {

using nlohmann::json;

namespace {

const char* kind_name(ReportKind k) {
  switch (k) {
    case ReportKind::Rank: return "rank";
    case ReportKind::Sweep: return "sweep";
    case ReportKind::Check: return "check";
  }
  return "rank";
}

ReportKind kind_from(const std::string& s) {
  if (s == "rank") return ReportKind::Rank;
  if (s == "sweep") return ReportKind::Sweep;
  if (s == "check") return ReportKind::Check;
  throw std::invalid_argument("unknown report kind '" + s + "'");
}

std::string optional_number(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? format_number(*x) : std::string();
}

json optional_json(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? json(*x) : json(nullptr);
}

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

bool RunReport::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& c) { return c.passed(); });
}

std::string format_number(double x) {
  if (x == 0.0) return "0";  // no "-0"
  return fmt::format("{:.12g}", x);
}

void write_csv(std::ostream& os, const RunReport& r) {
  switch (r.kind) {
    case ReportKind::Rank:
      os << "bus,score,d0,d_o2,d_o3,d_exact,iterations,tied,status\n";
      for (const auto& c : r.candidates) {
        os << c.bus << ',' << format_number(c.score) << ',' << format_number(c.d0) << ','
           << format_number(c.d_o2) << ',' << format_number(c.d_o3) << ','
           << optional_number(c.d_exact) << ',' << c.iterations << ',' << (c.tied ? 1 : 0) << ','
           << c.status << '\n';
      }
      break;
    case ReportKind::Sweep: {
      os << "gamma";
      for (const int b : r.sweep_buses) os << ",bus_" << b;
      os << ",objective,status\n";
      const std::size_t width = r.sweep_buses.size();
      for (std::size_t p = 0; p < r.sweep_points.size(); ++p) {
        const auto& pt = r.sweep_points[p];
        os << format_number(pt.gamma);
        for (std::size_t k = 0; k < width; ++k) {
          os << ',' << optional_number(r.participation[p * width + k].factor);
        }
        os << ',' << optional_number(pt.objective) << ',' << pt.status << '\n';
      }
      break;
    }
    case ReportKind::Check:
      os << "check,deviation,threshold,status\n";
      for (const auto& c : r.checks) {
        os << c.name << ',' << format_number(c.deviation) << ',' << format_number(c.threshold)
           << ',' << (c.passed() ? "pass" : "fail") << '\n';
      }
      break;
  }
}

void to_json(json& j, const RunReport& r) {
  j = json{{"kind", kind_name(r.kind)},
           {"case_name", r.case_name},
           {"mode", r.mode},
           {"metadata",
            {{"tolerance", r.metadata.tolerance},
             {"max_iterations", r.metadata.max_iterations},
             {"timestamp", r.metadata.timestamp},
             {"version", r.metadata.version}}}};
  json cands = json::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"bus", c.bus},
                     {"score", c.score},
                     {"d0", c.d0},
                     {"d_o2", c.d_o2},
                     {"d_o3", c.d_o3},
                     {"d_exact", optional_json(c.d_exact)},
                     {"iterations", c.iterations},
                     {"tied", c.tied},
                     {"status", c.status}});
  }
  j["candidates"] = std::move(cands);
  j["sweep_buses"] = r.sweep_buses;
  json points = json::array();
  for (const auto& p : r.sweep_points) {
    points.push_back({{"gamma", p.gamma}, {"objective", optional_json(p.objective)}, {"status", p.status}});
  }
  j["sweep_points"] = std::move(points);
  json part = json::array();
  for (const auto& p : r.participation) {
    part.push_back({{"gamma", p.gamma}, {"bus", p.bus}, {"factor", optional_json(p.factor)}});
  }
  j["participation"] = std::move(part);
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"deviation", c.deviation},
                      {"threshold", c.threshold},
                      {"passed", c.passed()}});
  }
  j["checks"] = std::move(checks);
}

void from_json(const json& j, RunReport& r) {
  r = RunReport{};
  r.kind = kind_from(j.at("kind").get<std::string>());
  r.case_name = j.at("case_name").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  const auto& m = j.at("metadata");
  r.metadata.tolerance = m.at("tolerance").get<double>();
  r.metadata.max_iterations = m.at("max_iterations").get<int>();
  r.metadata.timestamp = m.at("timestamp").get<std::string>();
  r.metadata.version = m.at("version").get<std::string>();
  for (const auto& c : j.at("candidates")) {
    CandidateRow row;
    row.bus = c.at("bus").get<int>();
    row.score = c.at("score").get<double>();
    row.d0 = c.at("d0").get<double>();
    row.d_o2 = c.at("d_o2").get<double>();
    row.d_o3 = c.at("d_o3").get<double>();
    row.d_exact = optional_from(c.at("d_exact"));
    row.iterations = c.at("iterations").get<int>();
    row.tied = c.at("tied").get<bool>();
    row.status = c.at("status").get<std::string>();
    r.candidates.push_back(std::move(row));
  }
  r.sweep_buses = j.at("sweep_buses").get<std::vector<int>>();
  for (const auto& p : j.at("sweep_points")) {
    r.sweep_points.push_back(
        {p.at("gamma").get<double>(), optional_from(p.at("objective")), p.at("status").get<std::string>()});
  }
  for (const auto& p : j.at("participation")) {
    r.participation.push_back(
        {p.at("gamma").get<double>(), p.at("bus").get<int>(), optional_from(p.at("factor"))});
  }
  for (const auto& c : j.at("checks")) {
    r.checks.push_back({c.at("name").get<std::string>(), c.at("deviation").get<double>(),
                        c.at("threshold").get<double>()});
  }
}

}  // namespace rdslack::cli
