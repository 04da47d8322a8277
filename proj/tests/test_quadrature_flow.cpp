#include <cmath>
#include <numbers>

#include <doctest/doctest.h>

#include "ratlas/flow.hpp"
#include "ratlas/phase_graph.hpp"
#include "ratlas/quadrature.hpp"

using namespace ratlas;

TEST_CASE("linear potential edge has closed-form time and action") {
  // V(x) = x, E0 = 1 on [0, 1]: time = 1, action = 2/3, both exact.
  const auto V = [](double x) { return x; };
  const EdgeIntegrals ei = edge_integrals(V, 0.0, 1.0, 1.0, 1e-10);
  CHECK(std::abs(ei.time - 1.0) < 1e-9);
  CHECK(std::abs(ei.action - 2.0 / 3.0) < 1e-9);
}

TEST_CASE("quadratic well edge with singular endpoints on both sides") {
  // V = x^2, E0 = 1 on [-1, 1]: time = pi/2, action = pi/2.
  const auto V = [](double x) { return x * x; };
  const EdgeIntegrals ei = edge_integrals(V, -1.0, 1.0, 1.0, 1e-10);
  CHECK(ei.time == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
  CHECK(ei.action == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
}

TEST_CASE("edge integral building blocks report error estimates") {
  const auto V = [](double x) { return std::tanh(x); };
  const double x1 = std::atanh(0.5);
  const QuadResult t = edge_time(V, 0.0, x1, 0.5, 1e-10);
  const QuadResult s = edge_action(V, 0.0, x1, 0.5, 1e-10);
  // frozen reference values for this arc
  CHECK(t.value == doctest::Approx(0.82418327228601595).epsilon(1e-9));
  CHECK(s.value == doctest::Approx(0.25110834777886533).epsilon(1e-9));
  CHECK(t.error_estimate < 1e-6);
  CHECK(s.error_estimate < 1e-6);
}

TEST_CASE("edge integrals reject empty intervals") {
  const auto V = [](double x) { return x; };
  CHECK_THROWS_AS(edge_integrals(V, 1.0, 1.0, 2.0, 1e-10), Error);
  CHECK_THROWS_AS(edge_integrals(V, 2.0, 1.0, 2.0, 1e-10), Error);
}

TEST_CASE("flow endpoint matches the closed-form linear-potential orbit") {
  // V' = 1: x(t) = x0 + 2 xi0 t - t^2, xi(t) = xi0 - t.
  const auto dV = [](double) { return 1.0; };
  const PhasePoint start{-0.5, 1.2, 0.0};
  for (double t : {0.3, 1.0, 2.5}) {
    const PhasePoint p = flow_endpoint(dV, start, t);
    CHECK(p.x == doctest::Approx(-0.5 + 2 * 1.2 * t - t * t).epsilon(1e-9));
    CHECK(p.xi == doctest::Approx(1.2 - t).epsilon(1e-9));
    CHECK(p.t == doctest::Approx(t));
  }
}

TEST_CASE("flow to turning locates the xi = 0 crossing") {
  const auto dV = [](double) { return 1.0; };
  const PhasePoint p = flow_to_turning(dV, {0.0, 1.0, 0.0}, 10.0);
  CHECK(p.t == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(p.xi) < 1e-10);
}

TEST_CASE("flow to turning gives up when xi never vanishes") {
  const auto dV = [](double) { return -1.0; }; // xi grows forever
  CHECK_THROWS_AS(flow_to_turning(dV, {0.0, 1.0, 0.0}, 5.0), ODEStepFailure);
}

TEST_CASE("ODE transit time agrees with the quadrature time") {
  // branch V = tanh x at E0 = 0.5, from the crossing to the turning point
  const auto dV = [](double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  };
  const PhasePoint p = flow_to_turning(dV, {0.0, std::sqrt(0.5), 0.0}, 10.0);
  CHECK(std::abs(p.t - 0.82418327228601595) < 1e-6);
  CHECK(std::abs(p.x - std::atanh(0.5)) < 1e-6);
}

TEST_CASE("singular integrator handles plain smooth integrands too") {
  const QuadResult q =
      integrate_singular([](double x) { return std::sin(x); }, 0.0,
                         std::numbers::pi, 1e-12);
  CHECK(q.value == doctest::Approx(2.0).epsilon(1e-11));
}
