#pragma once

#include <complex>
#include <functional>

#include "ratlas/errors.hpp"

namespace ratlas {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Integral of f over (a, b) where f may blow up like an inverse square root
// at either endpoint. Throws QuadratureNonConvergence if the requested
// tolerance cannot be certified.
QuadResult integrate_singular(const std::function<double(double)>& f, double a,
                              double b, double tol);

// Time along one branch between x-values a < b at energy E0:
//   t = int dx / (2 sqrt(E0 - V(x))).
// V is the branch potential; endpoints may be turning points (E0 - V -> 0).
QuadResult edge_time(const std::function<double(double)>& V, double a, double b,
                     double E0, double tol);

// Action along the same stretch: S = int sqrt(E0 - V(x)) dx.
QuadResult edge_action(const std::function<double(double)>& V, double a, double b,
                       double E0, double tol);

} // namespace ratlas
