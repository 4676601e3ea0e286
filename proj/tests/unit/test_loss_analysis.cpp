#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rdslack/errors.hpp"
#include "rdslack/loss_analysis.hpp"
#include "rdslack/powerflow.hpp"
#include "rdslack/slack_select.hpp"

using namespace rdslack;
using rdslack::testing::data_path;

namespace {

Network two_bus(double b, double gamma, double p) {
  Eigen::VectorXd inj(2);
  inj << p, -p;
  return rdslack::testing::make_network(2, {{0, 1, b, gamma * b}}, inj, {0});
}

OperatingPoint case_point(const char* file, const GammaMode& mode) {
  return prepare_operating_point(load_matpower(data_path(file)), mode);
}

double exact_single_slack_loss(const OperatingPoint& op, std::size_t bus) {
  const auto sol =
      solve_single_slack(op.network, bus, SolverConfig{}.with_warm_start(op.lossless.theta));
  return exact_dissipation(op.network, sol.theta);
}

// second-order estimate minus the exact 2-bus loss
double two_bus_order2_error(double gamma) {
  const auto net = two_bus(1.0, gamma, 0.5);
  const auto st = lossless_state(net, solve_lossless(net).theta);
  const double predicted = order2_total(st, net, single_slack_vector(st, 0));
  const double d = rdslack::testing::two_bus_exact_phase(1.0, gamma, 0.5);
  return predicted - 2.0 * gamma * (1.0 - std::cos(d));
}

}  // namespace

TEST_CASE("lossless_state on two buses") {
  const auto net = two_bus(1.0, 0.1, 0.5);
  const auto st = lossless_state(net, solve_lossless(net).theta);
  CHECK(st.d0 == doctest::Approx(0.1 * (2.0 - std::sqrt(3.0))).epsilon(1e-12));
  REQUIRE(st.gamma.has_value());
  CHECK(*st.gamma == doctest::Approx(0.1));

  const auto idle = two_bus(1.0, 0.1, 0.0);
  CHECK(lossless_state(idle, solve_lossless(idle).theta).d0 == 0.0);
}

TEST_CASE("D0 equals the summed loss potentials") {
  for (const char* file : {"case57.m", "case118.m", "case89pegase.m"}) {
    CAPTURE(file);
    const auto op = case_point(file, GammaMode::homogeneous(0.1));
    CHECK(std::abs(0.1 * op.state.v.sum() - op.state.d0) < 1e-12);
    CHECK(std::abs(op.state.loss_v.sum() - op.state.d0) < 1e-12);
  }
  const auto tab = case_point("case57.m", GammaMode::tabulated());
  CHECK(std::abs(tab.state.loss_v.sum() - tab.state.d0) < 1e-12);
  CHECK(std::abs(tab.state.d0 - exact_dissipation(tab.network, tab.lossless.theta)) < 1e-12);
}

TEST_CASE("order2_total against the closed-form two-bus expansion") {
  const auto e = rdslack::testing::two_bus_expansion(1.0, 0.5);
  for (const double gamma : {0.01, 0.05, 0.1}) {
    CAPTURE(gamma);
    const auto net = two_bus(1.0, gamma, 0.5);
    const auto st = lossless_state(net, solve_lossless(net).theta);
    const double expected = gamma * e.loss_o1 + gamma * gamma * e.loss_o2;
    CHECK(order2_total(st, net, single_slack_vector(st, 0)) == doctest::Approx(expected).epsilon(1e-12));
    const auto dx = delta_theta1(st, net, single_slack_vector(st, 0));
    CHECK(dx[0] == doctest::Approx(gamma * e.first_order).epsilon(1e-12));
    CHECK(nlo_correction(st, net, single_slack_vector(st, 0)) ==
          doctest::Approx(gamma * gamma * gamma * e.loss_o3_quadratic).epsilon(1e-12));
  }
}

TEST_CASE("order2_total examples and errors") {
  SUBCASE("no load, no loss") {
    const auto net = two_bus(1.0, 0.1, 0.0);
    const auto st = lossless_state(net, solve_lossless(net).theta);
    CHECK(order2_total(st, net, Eigen::Vector2d::Zero()) == 0.0);
  }
  SUBCASE("slack must cover D0") {
    const auto net = two_bus(1.0, 0.1, 0.5);
    const auto st = lossless_state(net, solve_lossless(net).theta);
    try {
      order2_total(st, net, Eigen::Vector2d(st.d0 * 0.5, 0.0));
      FAIL("expected ConstraintViolated");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ConstraintViolated);
    }
  }
  SUBCASE("IEEE-57, gamma = 0.01, within 1% of Newton-Raphson") {
    const auto op = case_point("case57.m", GammaMode::homogeneous(0.01));
    for (const auto g : op.network.gen_buses) {
      CAPTURE(op.network.bus_ids[g]);
      const double predicted = order2_total(op.state, op.network, single_slack_vector(op.state, g));
      const double exact = exact_single_slack_loss(op, g);
      CHECK(std::abs(predicted - exact) / exact < 0.01);
    }
  }
}

TEST_CASE("second-order error shrinks like gamma cubed") {
  const double coarse = two_bus_order2_error(0.02);
  const double fine = two_bus_order2_error(0.01);
  CHECK(coarse / fine == doctest::Approx(8.0).epsilon(0.05));
}

TEST_CASE("slack_term examples") {
  const auto op = case_point("case57.m", GammaMode::homogeneous(0.1));
  const auto n = static_cast<Eigen::Index>(op.network.size());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, op.state.d0 / static_cast<double>(n));

  CHECK(slack_term(op.state, zero, single_slack_vector(op.state, 0), 0.1) == 0.0);
  CHECK(std::abs(slack_term(op.state, op.state.injection, uniform, 0.1)) < 1e-14);

  for (const auto g : op.network.gen_buses) {
    CAPTURE(op.network.bus_ids[g]);
    const auto slack = single_slack_vector(op.state, g);
    const double spectral = slack_term(op.state, op.state.injection, slack, 0.1);
    const auto form = resistance_form(op.state, op.state.injection, g, 0.1);
    CHECK(std::abs(spectral - (form.slack_dependent + form.offset)) < 1e-10);
    // per-line form used by loss_breakdown
    CHECK(std::abs(spectral - loss_breakdown(op.state, op.network, slack).slack_term) < 1e-10);
  }
}

TEST_CASE("resistance_form properties") {
  const auto op = case_point("case118.m", GammaMode::homogeneous(0.1));
  const auto& gens = op.network.gen_buses;
  const double offset = resistance_form(op.state, op.state.injection, gens.front(), 0.1).offset;
  for (const auto g : gens) {
    const auto form = resistance_form(op.state, op.state.injection, g, 0.1);
    CHECK(form.offset == doctest::Approx(offset).epsilon(1e-12));
    CHECK(form.score == doctest::Approx(resistance_score(op.state, g)).epsilon(1e-12));
    CHECK(form.slack_dependent == doctest::Approx(0.1 * op.state.d0 * form.score).epsilon(1e-12));
  }
  // Omega is symmetric, so the pairwise score contributions are too
  const auto a = gens[3];
  const auto b = gens[11];
  const auto ra = resistance_vector(op.state.spectrum, a);
  const auto rb = resistance_vector(op.state.spectrum, b);
  CHECK(ra.values[static_cast<Eigen::Index>(b)] ==
        doctest::Approx(rb.values[static_cast<Eigen::Index>(a)]).epsilon(1e-10));
}

TEST_CASE("nlo_correction") {
  SUBCASE("vanishes when the slack matches the local loss potentials") {
    const auto op = case_point("case57.m", GammaMode::homogeneous(0.1));
    CHECK(std::abs(nlo_correction(op.state, op.network, op.state.loss_v)) < 1e-20);
  }
  SUBCASE("IEEE-57, gamma = 0.1, full estimate within 1% of Newton-Raphson") {
    const auto op = case_point("case57.m", GammaMode::homogeneous(0.1));
    for (const auto g : op.network.gen_buses) {
      CAPTURE(op.network.bus_ids[g]);
      const auto b = loss_breakdown(op.state, op.network, single_slack_vector(op.state, g));
      CHECK(b.nlo_term >= 0.0);
      CHECK(b.analytic_total == doctest::Approx(b.order2 + b.nlo_term));
      const double exact = exact_single_slack_loss(op, g);
      CHECK(std::abs(b.analytic_total - exact) / exact < 0.01);
    }
  }
}

TEST_CASE("delta_theta1 against independent computations") {
  const auto op = case_point("case118.m", GammaMode::homogeneous(0.1));
  const auto& net = op.network;
  const auto g = net.index_of(69);
  const auto slack = single_slack_vector(op.state, g);

  const Eigen::VectorXd x =
      rdslack::testing::grounded_solve(op.state.laplacian.matrix, slack - op.state.loss_v);
  const auto dx = delta_theta1(op.state, net, slack);
  double worst = 0.0;
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const double ref = x[static_cast<Eigen::Index>(net.edges[k].from)] -
                       x[static_cast<Eigen::Index>(net.edges[k].to)];
    worst = std::max(worst, std::abs(dx[static_cast<Eigen::Index>(k)] - ref));
  }
  CHECK(worst < 1e-10);

  // Newton-Raphson at a tiny gamma: the phase shift is first order in gamma
  const auto tiny = case_point("case118.m", GammaMode::homogeneous(1e-4));
  const auto tiny_slack = single_slack_vector(tiny.state, g);
  const auto predicted = delta_theta1(tiny.state, tiny.network, tiny_slack);
  const auto sol = solve_single_slack(tiny.network, g,
                                      SolverConfig{}.with_warm_start(tiny.lossless.theta));
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < tiny.network.edges.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(tiny.network.edges[k].from);
    const auto j = static_cast<Eigen::Index>(tiny.network.edges[k].to);
    const double actual = (sol.theta[i] - sol.theta[j]) - (tiny.lossless.theta[i] - tiny.lossless.theta[j]);
    err = std::max(err, std::abs(actual - predicted[static_cast<Eigen::Index>(k)]));
    scale = std::max(scale, std::abs(actual));
  }
  CHECK(scale > 0.0);
  CHECK(err / scale < 1e-3);
}

TEST_CASE("spectral_identity_check") {
  for (const char* file : {"case57.m", "case118.m", "case89pegase.m"}) {
    CAPTURE(file);
    const auto op = case_point(file, GammaMode::homogeneous(0.1));
    CHECK(spectral_identity_check(op.state, op.network) < 1e-9);
  }
}

TEST_CASE("single_slack_vector") {
  const auto net = two_bus(1.0, 0.1, 0.5);
  const auto st = lossless_state(net, solve_lossless(net).theta);
  const auto s = single_slack_vector(st, 1);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == st.d0);
  CHECK_THROWS_AS(single_slack_vector(st, 2), Error);
}
