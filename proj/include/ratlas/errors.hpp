#pragma once

#include <stdexcept>
#include <string>

namespace ratlas {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// potential evaluation outside the guaranteed analyticity region
struct StripViolation : Error { using Error::Error; };

// root finding / geometry
struct DegenerateTurningPoint : Error { using Error::Error; };
struct TangentialCrossing : Error { using Error::Error; };
struct CrossingAtTurning : Error { using Error::Error; };

// numerics
struct QuadratureNonConvergence : Error { using Error::Error; };
struct ODEStepFailure : Error { using Error::Error; };
struct CycleBudgetExceeded : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };
struct ContourThroughZero : Error { using Error::Error; };
struct EigensolveFailure : Error { using Error::Error; };

// semiclassics preconditions
struct TooCloseToVertex : Error { using Error::Error; };
struct NotPrCycle : Error { using Error::Error; };
struct TopologyUnsupported : Error { using Error::Error; };
struct NoCycles : Error { using Error::Error; };

// config
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

} // namespace ratlas
