#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rdslack {

/// Raw rows of a MATPOWER case, restricted to the columns this library uses.
/// Units are those of the file: MW for powers, p.u. for impedances and |V|.
struct BusRow {
  int id = 0;
  double demand_mw = 0.0;
  double voltage_pu = 1.0;
};

struct GenRow {
  int bus_id = 0;
  double output_mw = 0.0;
  bool in_service = true;
};

struct BranchRow {
  int from_bus = 0;
  int to_bus = 0;
  double resistance = 0.0;
  double reactance = 0.0;
  bool in_service = true;
};

struct CaseData {
  std::string name;
  double base_mva = 100.0;
  std::vector<BusRow> buses;
  std::vector<GenRow> gens;
  std::vector<BranchRow> branches;
  // Non-fatal notes collected while parsing (ignored shunts, taps, ...).
  std::vector<std::string> warnings;
};

/// How line conductances are assigned when building a Network.
class GammaMode {
 public:
  /// g_ij = gamma * b_ij on every line.
  static GammaMode homogeneous(double gamma);
  /// g_ij = r / (r^2 + x^2) from the case file.
  static GammaMode tabulated() { return GammaMode(true, 0.0); }

  bool is_tabulated() const noexcept { return tabulated_; }
  double gamma() const noexcept { return gamma_; }
  std::string describe() const;

 private:
  GammaMode(bool tabulated, double gamma) : tabulated_(tabulated), gamma_(gamma) {}

  bool tabulated_;
  double gamma_;
};

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double susceptance = 0.0;
  double conductance = 0.0;
};

/// Per-unit network. Buses are indexed 0..N-1 in case-file order; `bus_ids`
/// maps back to the external numbering.
struct Network {
  std::vector<int> bus_ids;
  std::vector<Edge> edges;
  Eigen::VectorXd voltage;
  Eigen::VectorXd generation;
  Eigen::VectorXd demand;
  Eigen::VectorXd injection;  // generation - demand
  std::vector<std::size_t> gen_buses;  // sorted, unique
  double generation_scale = 1.0;  // factor applied by balance_injections

  std::size_t size() const noexcept { return bus_ids.size(); }
  bool is_generator(std::size_t bus) const;
  std::size_t index_of(int bus_id) const;  // throws InvalidArgument
};

CaseData parse_matpower(std::string_view text);
CaseData load_matpower(const std::filesystem::path& path);

/// Writes the subset of columns this library reads; output parses back to the
/// same CaseData (up to name and warnings).
std::string serialize_matpower(const CaseData& data);

Network build_network(const CaseData& data, const GammaMode& mode);

/// Scales generator output uniformly so that injections sum to zero.
Network balance_injections(const Network& net);

/// Connected components of the graph formed by `edges` over `n` nodes.
std::vector<std::vector<std::size_t>> connected_components(std::size_t n,
                                                           const std::vector<Edge>& edges);

}  // namespace rdslack
