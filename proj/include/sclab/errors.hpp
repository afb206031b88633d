#pragma once

#include <stdexcept>
#include <string>

namespace sclab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A ray exceeded T_max without leaving the interaction region.
struct TrappedRay : Error {
  using Error::Error;
};

// Energy conservation along a ray drifted past the accepted tolerance.
struct EnergyDrift : Error {
  using Error::Error;
};

// det D(x)/D(y,s) vanished over an interval instead of at isolated points.
struct DegenerateCaustic : Error {
  using Error::Error;
};

// A preimage of the requested direction sits on (or too close to) a caustic.
struct NonregularDirection : Error {
  using Error::Error;
};

// Newton refinement of a branch neither converged nor cleanly diverged.
struct BranchUncertain : Error {
  using Error::Error;
};

// The radial deflection integrand has a (near-)double turning point.
struct OrbitingDetected : Error {
  using Error::Error;
};

// Phase-shift matching at the support boundary was ill conditioned.
struct MatchFailure : Error {
  using Error::Error;
};

// The phase-shift tail at l_max is not yet below the negligibility threshold.
struct TailNotConverged : Error {
  using Error::Error;
};

// Doubling the surface quadrature order still moves the result.
struct QuadratureUnderResolved : Error {
  using Error::Error;
};

// Bad run configuration or an assumption violation detected up front.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace sclab
