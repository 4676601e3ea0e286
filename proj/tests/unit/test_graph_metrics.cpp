#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rdslack/errors.hpp"
#include "rdslack/graph_metrics.hpp"
#include "rdslack/powerflow.hpp"

using namespace rdslack;
using rdslack::testing::data_path;

namespace {

WeightedLaplacian unit_triangle() {
  const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  return laplacian_from_edges(3, e);
}

WeightedLaplacian path(std::initializer_list<double> weights) {
  std::vector<WeightedEdge> e;
  std::size_t k = 0;
  for (const double w : weights) {
    e.push_back({k, k + 1, w});
    ++k;
  }
  return laplacian_from_edges(k + 1, e);
}

Network loaded_two_bus(double b, double delta) {
  Eigen::VectorXd p(2);
  p << b * std::sin(delta), -b * std::sin(delta);
  return rdslack::testing::make_network(2, {{0, 1, b, 0.0}}, p, {0});
}

}  // namespace

TEST_CASE("build_laplacian examples") {
  SUBCASE("flat phases") {
    const auto net = loaded_two_bus(10.0, 0.0);
    const auto lap = build_laplacian(net, Eigen::Vector2d(0.0, 0.0));
    CHECK(lap.matrix(0, 0) == doctest::Approx(10.0));
    CHECK(lap.matrix(0, 1) == doctest::Approx(-10.0));
    CHECK(lap.matrix(1, 0) == doctest::Approx(-10.0));
    CHECK(lap.matrix(1, 1) == doctest::Approx(10.0));
  }
  SUBCASE("phase difference pi/3 halves the weight") {
    const auto net = loaded_two_bus(10.0, 0.0);
    const auto lap = build_laplacian(net, Eigen::Vector2d(std::numbers::pi / 3, 0.0));
    CHECK(lap.matrix(0, 1) == doctest::Approx(-5.0));
  }
  SUBCASE("unit triangle") {
    const auto lap = unit_triangle();
    CHECK(lap.matrix.diagonal().isApprox(Eigen::Vector3d(2, 2, 2)));
    CHECK(lap.row_sum_defect() == 0.0);
    CHECK(lap.asymmetry() == 0.0);
  }
}

TEST_CASE("decompose examples") {
  SUBCASE("single edge") {
    const auto s = decompose(path({1.0}));
    CHECK(s.eigenvalues()[0] == 0.0);
    CHECK(s.eigenvalues()[1] == doctest::Approx(2.0));
    const double u = std::abs(s.eigenvectors()(0, 1));
    CHECK(u == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.eigenvectors()(0, 1) == doctest::Approx(-s.eigenvectors()(1, 1)));
  }
  SUBCASE("unit triangle") {
    const auto s = decompose(unit_triangle());
    CHECK(s.eigenvalues()[0] == 0.0);
    CHECK(s.eigenvalues()[1] == doctest::Approx(3.0));
    CHECK(s.eigenvalues()[2] == doctest::Approx(3.0));
    CHECK(s.eigenvectors().col(0).isApprox(Eigen::Vector3d::Constant(1.0 / std::sqrt(3.0))));
  }
  SUBCASE("disconnected graph") {
    const std::vector<WeightedEdge> e{{0, 1, 1.0}, {2, 3, 1.0}};
    try {
      decompose(laplacian_from_edges(4, e));
      FAIL("expected NotConnected");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::NotConnected);
    }
  }
}

TEST_CASE("IEEE-57 operating-point spectrum satisfies its invariants") {
  const auto net = balance_injections(
      build_network(load_matpower(data_path("case57.m")), GammaMode::homogeneous(0.0)));
  const auto flow = solve_lossless(net);
  const auto lap = build_laplacian(net, flow.theta);
  CHECK(lap.row_sum_defect() < 1e-10);
  CHECK(lap.asymmetry() == 0.0);
  for (Eigen::Index i = 0; i < lap.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < lap.matrix.cols(); ++j) {
      if (i != j) REQUIRE(lap.matrix(i, j) <= 0.0);
    }
  }
  const auto s = decompose(lap);
  const auto d = spectrum_diagnostics(s, lap);
  CHECK(d.reconstruction < 1e-8);
  CHECK(d.orthonormality < 1e-10);
  CHECK(s.eigenvalues()[1] > 0.0);
}

TEST_CASE("resistance_distance examples") {
  CHECK(resistance_distance(decompose(path({2.0})), 0, 1) == doctest::Approx(0.5));
  CHECK(resistance_distance(decompose(path({1.0, 1.0})), 0, 2) == doctest::Approx(2.0));
  CHECK(resistance_distance(decompose(unit_triangle()), 0, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("resistance_vector examples") {
  const auto s = decompose(path({1.0, 1.0}));
  const auto r = resistance_vector(s, 0);
  CHECK(r.values[0] == 0.0);
  CHECK(r.values[1] == doctest::Approx(1.0));
  CHECK(r.values[2] == doctest::Approx(2.0));
  CHECK(resistance_vector(s, 2).values[2] == 0.0);
}

TEST_CASE("IEEE-118 resistance vector matches the explicit Gamma inverse") {
  const auto c = load_matpower(data_path("case118.m"));
  const auto net = balance_injections(build_network(c, GammaMode::homogeneous(0.0)));
  const auto flow = solve_lossless(net);
  const auto lap = build_laplacian(net, flow.theta);
  const auto s = decompose(lap);
  const auto omega = rdslack::testing::gamma_matrix_resistances(lap.matrix);
  // tabulated slack is bus 69
  const auto g = net.index_of(69);
  const auto r = resistance_vector(s, g);
  CHECK((r.values - omega.row(static_cast<Eigen::Index>(g)).transpose()).cwiseAbs().maxCoeff() < 1e-8);
  for (std::size_t i = 0; i < net.size(); i += 13) {
    CHECK(resistance_distance(s, g, i) == doctest::Approx(r.values[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("gamma_inverse_identity_check") {
  CHECK(gamma_inverse_identity_check(decompose(path({1.0})), path({1.0})) < 1e-12);
  CHECK(gamma_inverse_identity_check(decompose(unit_triangle()), unit_triangle()) < 1e-12);

  const auto net = balance_injections(
      build_network(load_matpower(data_path("case89pegase.m")), GammaMode::homogeneous(0.0)));
  const auto lap = build_laplacian(net, solve_lossless(net).theta);
  CHECK(gamma_inverse_identity_check(decompose(lap), lap) < 1e-8);
}

TEST_CASE("metric axioms and unit-current equivalence on random graphs") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    const auto edges = rdslack::testing::random_connected_graph(rng, n);
    const auto lap = laplacian_from_edges(n, edges);
    const auto s = decompose(lap);
    Eigen::MatrixXd omega(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) omega(i, j) = resistance_distance(s, i, j);
    }
    CAPTURE(trial);
    REQUIRE(omega.minCoeff() >= -1e-9);
    REQUIRE((omega - omega.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    double worst_triangle = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
          worst_triangle = std::max(worst_triangle, omega(i, j) - omega(i, l) - omega(l, j));
        }
      }
    }
    REQUIRE(worst_triangle <= 1e-9);
    // spot-check pairs against the grounded linear solve
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int k = 0; k < 5; ++k) {
      const auto i = pick(rng);
      const auto j = pick(rng);
      REQUIRE(std::abs(omega(i, j) - rdslack::testing::unit_current_resistance(lap.matrix, i, j)) < 1e-9);
    }
  }
}

TEST_CASE("series and parallel laws") {
  const auto s = decompose(path({1.0, 2.0, 4.0, 0.5}));
  CHECK(resistance_distance(s, 0, 4) == doctest::Approx(1.0 + 0.5 + 0.25 + 2.0));

  const std::vector<WeightedEdge> doubled{{0, 1, 1.5}, {0, 1, 2.5}, {1, 2, 1.0}};
  const auto sp = decompose(laplacian_from_edges(3, doubled));
  CHECK(resistance_distance(sp, 0, 1) == doctest::Approx(1.0 / 4.0));
}

TEST_CASE("adding an edge never increases a resistance distance") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 20);
    auto edges = rdslack::testing::random_connected_graph(rng, n, 0.05);
    const auto before = decompose(laplacian_from_edges(n, edges));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    edges.push_back({a, b, w(rng)});
    const auto after = decompose(laplacian_from_edges(n, edges));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        REQUIRE(resistance_distance(after, i, j) <= resistance_distance(before, i, j) + 1e-12);
      }
    }
  }
}

TEST_CASE("resistance grows with line loading") {
  double previous = 0.0;
  for (double delta = 0.0; delta < std::numbers::pi / 2 - 0.05; delta += 0.1) {
    const auto net = loaded_two_bus(10.0, delta);
    const auto s = decompose(build_laplacian(net, Eigen::Vector2d(delta, 0.0)));
    const double omega = resistance_distance(s, 0, 1);
    CHECK(omega == doctest::Approx(1.0 / (10.0 * std::cos(delta))));
    if (delta > 0.0) CHECK(omega > previous);
    previous = omega;
  }
}
