#pragma once

#include <functional>

#include "ratlas/errors.hpp"

namespace ratlas {

struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
  double t = 0.0;
};

// Endpoint of the Hamiltonian flow x' = 2 xi, xi' = -V'(x) started at `start`
// and run for duration t_end (adaptive Dormand-Prince).
PhasePoint flow_endpoint(const std::function<double(double)>& dV, PhasePoint start,
                         double t_end, double tol = 1e-12);

// Runs the same flow until the first sign change of xi, located by bisection
// on the dense output. Throws ODEStepFailure if none occurs before t_cap.
PhasePoint flow_to_turning(const std::function<double(double)>& dV, PhasePoint start,
                           double t_cap, double tol = 1e-12);

} // namespace ratlas
