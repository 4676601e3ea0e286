#include "rdslack/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rdslack/errors.hpp"

namespace rdslack {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedCase: return "MalformedCase";
    case ErrorCode::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::NonPositiveSusceptance: return "NonPositiveSusceptance";
    case ErrorCode::ZeroGeneration: return "ZeroGeneration";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SlackNotGenerator: return "SlackNotGenerator";
    case ErrorCode::BadParticipation: return "BadParticipation";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::NonConvexObjective: return "NonConvexObjective";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

GammaMode GammaMode::homogeneous(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must be finite and >= 0");
  }
  return GammaMode(false, gamma);
}

std::string GammaMode::describe() const {
  if (tabulated_) return "tabulated";
  std::ostringstream os;
  os << "homogeneous(" << gamma_ << ")";
  return os.str();
}

bool Network::is_generator(std::size_t bus) const {
  return std::binary_search(gen_buses.begin(), gen_buses.end(), bus);
}

std::size_t Network::index_of(int bus_id) const {
  auto it = std::find(bus_ids.begin(), bus_ids.end(), bus_id);
  if (it == bus_ids.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown bus id " + std::to_string(bus_id));
  }
  return static_cast<std::size_t>(it - bus_ids.begin());
}

namespace {

struct MatrixBlock {
  std::size_t first_line = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  // from_chars rejects a leading '+'
  std::string_view t = token;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw MalformedCaseError(line, "non-numeric token '" + std::string(token) + "'");
  }
  return value;
}

// Splits one line of a matrix body into tokens, closing a row at each ';'.
void consume_matrix_text(std::string_view body, std::size_t line, MatrixBlock& block,
                         std::vector<double>& pending) {
  std::size_t i = 0;
  auto flush = [&] {
    if (!pending.empty()) {
      block.rows.push_back(std::move(pending));
      block.row_lines.push_back(line);
      pending.clear();
    }
  };
  while (i < body.size()) {
    const char c = body[i];
    if (c == ';') {
      flush();
      ++i;
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      ++i;
    } else {
      std::size_t j = i;
      while (j < body.size() && body[j] != ';' && body[j] != ' ' && body[j] != '\t' &&
             body[j] != ',' && body[j] != '\r') {
        ++j;
      }
      pending.push_back(parse_number(body.substr(i, j - i), line));
      i = j;
    }
  }
  // a newline also terminates a row
  flush();
}

void require_columns(const MatrixBlock& block, std::string_view name, std::size_t min_cols) {
  std::optional<std::size_t> width;
  for (std::size_t r = 0; r < block.rows.size(); ++r) {
    const auto cols = block.rows[r].size();
    if (cols < min_cols) {
      throw MalformedCaseError(block.row_lines[r],
                               "mpc." + std::string(name) + " row has " + std::to_string(cols) +
                                   " columns, need at least " + std::to_string(min_cols));
    }
    if (width && *width != cols) {
      throw MalformedCaseError(block.row_lines[r],
                               "mpc." + std::string(name) + " row has " + std::to_string(cols) +
                                   " columns, previous rows have " + std::to_string(*width));
    }
    width = cols;
  }
}

int as_id(double v, std::size_t line) {
  if (v != std::floor(v)) throw MalformedCaseError(line, "bus id is not an integer");
  return static_cast<int>(v);
}

}  // namespace

CaseData parse_matpower(std::string_view text) {
  CaseData data;
  std::optional<double> base_mva;
  std::map<std::string, MatrixBlock, std::less<>> blocks;

  MatrixBlock* open = nullptr;
  std::string open_name;
  std::vector<double> pending;
  bool skipping_other = false;  // inside a matrix/cell block we do not read

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto pct = line.find('%'); pct != std::string_view::npos) line = line.substr(0, pct);
    line = trim(line);
    if (line.empty()) continue;

    if (open != nullptr) {
      const auto close = line.find(']');
      consume_matrix_text(line.substr(0, close), line_no, *open, pending);
      if (close != std::string_view::npos) open = nullptr;
      continue;
    }
    if (skipping_other) {
      if (line.find(']') != std::string_view::npos || line.find('}') != std::string_view::npos) {
        skipping_other = false;
      }
      continue;
    }

    if (!line.starts_with("mpc.")) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string name(trim(line.substr(4, eq - 4)));
    std::string_view rhs = trim(line.substr(eq + 1));

    if (name == "baseMVA") {
      if (!rhs.empty() && rhs.back() == ';') rhs.remove_suffix(1);
      base_mva = parse_number(trim(rhs), line_no);
      continue;
    }
    const bool wanted = name == "bus" || name == "gen" || name == "branch";
    if (!rhs.empty() && (rhs.front() == '[' || rhs.front() == '{')) {
      const char closer = rhs.front() == '[' ? ']' : '}';
      if (!wanted || rhs.front() == '{') {
        skipping_other = rhs.find(closer) == std::string_view::npos;
        continue;
      }
      if (blocks.contains(name)) {
        throw MalformedCaseError(line_no, "duplicate mpc." + name + " block");
      }
      auto& block = blocks[name];
      block.first_line = line_no;
      rhs.remove_prefix(1);
      const auto close = rhs.find(closer);
      consume_matrix_text(rhs.substr(0, close), line_no, block, pending);
      if (close == std::string_view::npos) {
        open = &block;
        open_name = name;
      }
    }
  }
  if (open != nullptr) {
    throw MalformedCaseError(open->first_line, "unterminated mpc." + open_name + " block");
  }

  if (!base_mva) throw MalformedCaseError(0, "missing mpc.baseMVA");
  if (!(*base_mva > 0.0)) throw MalformedCaseError(0, "mpc.baseMVA must be positive");
  data.base_mva = *base_mva;
  for (const char* required : {"bus", "gen", "branch"}) {
    if (!blocks.contains(required)) {
      throw MalformedCaseError(0, std::string("missing mpc.") + required + " block");
    }
  }

  const auto& bus = blocks.at("bus");
  const auto& gen = blocks.at("gen");
  const auto& branch = blocks.at("branch");
  require_columns(bus, "bus", 8);
  require_columns(gen, "gen", 8);
  require_columns(branch, "branch", 11);

  std::unordered_set<int> ids;
  bool shunt_warned = false;
  for (std::size_t r = 0; r < bus.rows.size(); ++r) {
    const auto& row = bus.rows[r];
    BusRow b{as_id(row[0], bus.row_lines[r]), row[2], row[7]};
    if (!ids.insert(b.id).second) {
      throw MalformedCaseError(bus.row_lines[r], "duplicate bus id " + std::to_string(b.id));
    }
    if (!shunt_warned && (row[4] != 0.0 || row[5] != 0.0)) {
      data.warnings.emplace_back("bus shunts (GS/BS) are ignored");
      shunt_warned = true;
    }
    data.buses.push_back(b);
  }

  for (std::size_t r = 0; r < gen.rows.size(); ++r) {
    const auto& row = gen.rows[r];
    GenRow g{as_id(row[0], gen.row_lines[r]), row[1], row[7] > 0.0};
    if (!ids.contains(g.bus_id)) {
      throw MalformedCaseError(gen.row_lines[r],
                               "generator at unknown bus " + std::to_string(g.bus_id));
    }
    data.gens.push_back(g);
  }

  bool charging_warned = false;
  bool tap_warned = false;
  for (std::size_t r = 0; r < branch.rows.size(); ++r) {
    const auto& row = branch.rows[r];
    const auto line = branch.row_lines[r];
    BranchRow br{as_id(row[0], line), as_id(row[1], line), row[2], row[3], row[10] > 0.0};
    if (!ids.contains(br.from_bus) || !ids.contains(br.to_bus)) {
      throw MalformedCaseError(line, "branch references unknown bus");
    }
    if (br.from_bus == br.to_bus) throw MalformedCaseError(line, "branch is a self-loop");
    if (!charging_warned && row[4] != 0.0) {
      data.warnings.emplace_back("line charging susceptance is ignored");
      charging_warned = true;
    }
    if (!tap_warned && ((row[8] != 0.0 && row[8] != 1.0) || row[9] != 0.0)) {
      data.warnings.emplace_back("transformer taps and phase shifts are ignored");
      tap_warned = true;
    }
    data.branches.push_back(br);
  }
  return data;
}

CaseData load_matpower(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedCaseError(0, "cannot open case file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  CaseData data = parse_matpower(buffer.str());
  data.name = path.stem().string();
  return data;
}

std::string serialize_matpower(const CaseData& data) {
  std::ostringstream os;
  os.precision(17);
  os << "function mpc = " << (data.name.empty() ? "case" : data.name) << "\n";
  os << "mpc.version = '2';\n";
  os << "mpc.baseMVA = " << data.base_mva << ";\n";
  os << "%% bus_i type Pd Qd Gs Bs area Vm\n";
  os << "mpc.bus = [\n";
  for (const auto& b : data.buses) {
    os << "\t" << b.id << "\t2\t" << b.demand_mw << "\t0\t0\t0\t1\t" << b.voltage_pu << ";\n";
  }
  os << "];\n";
  os << "%% bus Pg Qg Qmax Qmin Vg mBase status\n";
  os << "mpc.gen = [\n";
  for (const auto& g : data.gens) {
    os << "\t" << g.bus_id << "\t" << g.output_mw << "\t0\t0\t0\t1\t100\t"
       << (g.in_service ? 1 : 0) << ";\n";
  }
  os << "];\n";
  os << "%% fbus tbus r x b rateA rateB rateC ratio angle status\n";
  os << "mpc.branch = [\n";
  for (const auto& br : data.branches) {
    os << "\t" << br.from_bus << "\t" << br.to_bus << "\t" << br.resistance << "\t"
       << br.reactance << "\t0\t0\t0\t0\t0\t0\t" << (br.in_service ? 1 : 0) << ";\n";
  }
  os << "];\n";
  return os.str();
}

std::vector<std::vector<std::size_t>> connected_components(std::size_t n,
                                                           const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    const auto a = find(e.from);
    const auto b = find(e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

Network build_network(const CaseData& data, const GammaMode& mode) {
  Network net;
  const std::size_t n = data.buses.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "case has no buses");

  std::unordered_map<int, std::size_t> index;
  net.bus_ids.reserve(n);
  net.voltage.resize(static_cast<Eigen::Index>(n));
  net.demand.resize(static_cast<Eigen::Index>(n));
  net.generation = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = data.buses[i];
    index.emplace(b.id, i);
    net.bus_ids.push_back(b.id);
    if (!(b.voltage_pu > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "bus " + std::to_string(b.id) + " has non-positive voltage magnitude");
    }
    net.voltage[static_cast<Eigen::Index>(i)] = b.voltage_pu;
    net.demand[static_cast<Eigen::Index>(i)] = b.demand_mw / data.base_mva;
  }

  for (const auto& g : data.gens) {
    if (!g.in_service) continue;
    const auto i = index.at(g.bus_id);
    net.generation[static_cast<Eigen::Index>(i)] += g.output_mw / data.base_mva;
    net.gen_buses.push_back(i);
  }
  std::sort(net.gen_buses.begin(), net.gen_buses.end());
  net.gen_buses.erase(std::unique(net.gen_buses.begin(), net.gen_buses.end()),
                      net.gen_buses.end());
  net.injection = net.generation - net.demand;

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> merged;
  for (const auto& br : data.branches) {
    if (!br.in_service) continue;
    if (!(br.reactance > 0.0)) {
      throw Error(ErrorCode::NonPositiveSusceptance,
                  "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) +
                      " has non-positive reactance");
    }
    const double z2 = br.resistance * br.resistance + br.reactance * br.reactance;
    const double b = br.reactance / z2;
    const double g = mode.is_tabulated() ? br.resistance / z2 : mode.gamma() * b;
    if (g < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "branch " + std::to_string(br.from_bus) + "-" +
                                                  std::to_string(br.to_bus) +
                                                  " has negative resistance");
    }
    auto i = index.at(br.from_bus);
    auto j = index.at(br.to_bus);
    if (i > j) std::swap(i, j);
    auto [it, inserted] = merged.try_emplace({i, j}, net.edges.size());
    if (inserted) {
      net.edges.push_back(Edge{i, j, b, g});
    } else {
      net.edges[it->second].susceptance += b;
      net.edges[it->second].conductance += g;
    }
  }
  if (!mode.is_tabulated()) {
    // keep g/b exactly gamma after merging parallel lines
    for (auto& e : net.edges) e.conductance = mode.gamma() * e.susceptance;
  }

  const auto components = connected_components(n, net.edges);
  if (components.size() > 1) {
    std::ostringstream os;
    os << "network has " << components.size() << " components:";
    for (std::size_t c = 0; c < components.size() && c < 8; ++c) {
      os << " {";
      for (std::size_t k = 0; k < components[c].size() && k < 6; ++k) {
        os << (k ? "," : "") << net.bus_ids[components[c][k]];
      }
      if (components[c].size() > 6) os << ",...";
      os << "}";
    }
    if (components.size() > 8) os << " ...";
    throw Error(ErrorCode::DisconnectedNetwork, os.str());
  }
  return net;
}

Network balance_injections(const Network& net) {
  Network out = net;
  const double total_generation = net.generation.sum();
  const double total_demand = net.demand.sum();
  if (total_generation == 0.0) {
    if (total_demand != 0.0) {
      throw Error(ErrorCode::ZeroGeneration, "total generation is zero but demand is not");
    }
    return out;
  }
  const double scale = total_demand / total_generation;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::ZeroGeneration,
                "total generation and demand have opposite signs; cannot balance");
  }
  out.generation = net.generation * scale;
  out.injection = out.generation - out.demand;
  // push the floating-point residue onto the largest generator
  const double residue = out.injection.sum();
  if (residue != 0.0) {
    Eigen::Index largest = 0;
    out.generation.maxCoeff(&largest);
    out.generation[largest] -= residue;
    out.injection[largest] -= residue;
  }
  out.generation_scale = net.generation_scale * scale;
  return out;
}

}  // namespace rdslack
