#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdslack/case_io.hpp"
#include "rdslack/graph_metrics.hpp"

namespace rdslack::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(RDSLACK_DATA_DIR) / name;
}

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(RDSLACK_FIXTURE_DIR) / name;
}

// 1 generator (50 MW at bus 1), 50 MW load at bus 2, one line r, x.
inline CaseData two_bus_case(double r = 0.0, double x = 0.1, double mw = 50.0) {
  CaseData c;
  c.name = "two_bus";
  c.base_mva = 100.0;
  c.buses = {{1, 0.0, 1.0}, {2, mw, 1.0}};
  c.gens = {{1, mw, true}};
  c.branches = {{1, 2, r, x, true}};
  return c;
}

// Network built directly: N buses, unit voltages, given lines and injections.
inline Network make_network(std::size_t n, const std::vector<Edge>& edges,
                            const Eigen::VectorXd& injection,
                            std::vector<std::size_t> gens) {
  Network net;
  for (std::size_t i = 0; i < n; ++i) net.bus_ids.push_back(static_cast<int>(i + 1));
  net.edges = edges;
  net.voltage = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  net.injection = injection;
  net.generation = injection.cwiseMax(0.0);
  net.demand = (-injection).cwiseMax(0.0);
  net.gen_buses = std::move(gens);
  return net;
}

// Random connected weighted graph: a random spanning tree plus extra edges.
inline std::vector<WeightedEdge> random_connected_graph(std::mt19937_64& rng, std::size_t n,
                                                        double extra_density = 0.15) {
  std::uniform_real_distribution<double> weight(0.1, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<WeightedEdge> edges;
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    edges.push_back({order[k], order[pick(rng)], weight(rng)});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (unit(rng) < extra_density) edges.push_back({i, j, weight(rng)});
    }
  }
  return edges;
}

}  // namespace rdslack::testing
