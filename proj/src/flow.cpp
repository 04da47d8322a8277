#include "ratlas/flow.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

namespace ratlas {

namespace {

using State = std::array<double, 2>;
namespace ode = boost::numeric::odeint;

auto make_system(const std::function<double(double)>& dV) {
  return [&dV](const State& s, State& dsdt, double) {
    dsdt[0] = 2.0 * s[1];
    dsdt[1] = -dV(s[0]);
  };
}

} // namespace

PhasePoint flow_endpoint(const std::function<double(double)>& dV, PhasePoint start,
                         double t_end, double tol) {
  if (t_end < 0.0) throw ODEStepFailure("flow duration must be non-negative");
  State s{start.x, start.xi};
  if (t_end == 0.0) return {s[0], s[1], start.t};
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_adaptive(stepper, make_system(dV), s, 0.0, t_end,
                            std::min(1e-3, t_end / 16.0));
  } catch (const std::exception& e) {
    throw ODEStepFailure(std::string("flow integration failed: ") + e.what());
  }
  return {s[0], s[1], start.t + t_end};
}

PhasePoint flow_to_turning(const std::function<double(double)>& dV, PhasePoint start,
                           double t_cap, double tol) {
  auto stepper =
      ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  State s{start.x, start.xi};
  stepper.initialize(s, 0.0, std::min(1e-3, t_cap / 16.0));

  const double sign0 = start.xi >= 0.0 ? 1.0 : -1.0;
  while (stepper.current_time() < t_cap) {
    try {
      stepper.do_step(make_system(dV));
    } catch (const std::exception& e) {
      throw ODEStepFailure(std::string("flow step failed: ") + e.what());
    }
    const State& cur = stepper.current_state();
    if (cur[1] * sign0 <= 0.0) {
      // sign change inside [previous_time, current_time]: bisect dense output
      double lo = stepper.previous_time(), hi = stepper.current_time();
      State mid;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
        const double tm = 0.5 * (lo + hi);
        stepper.calc_state(tm, mid);
        (mid[1] * sign0 > 0.0 ? lo : hi) = tm;
      }
      stepper.calc_state(hi, mid);
      return {mid[0], mid[1], start.t + hi};
    }
  }
  std::ostringstream os;
  os << "no turning (xi sign change) within flow time " << t_cap;
  throw ODEStepFailure(os.str());
}

} // namespace ratlas
