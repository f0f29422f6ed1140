#pragma once

#include <stdexcept>
#include <string>

namespace rdshift {

/// Bad call-site input: invalid grids, mismatched meshes, out-of-range options.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A structural hypothesis the machinery relies on (monotonicity, sign of a
/// mean, ...) failed a numeric check; the message carries a witness point.
struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A root bracket did not straddle a sign change.
struct NoSignChange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative root refinement ran out of iterations before the bracket closed.
struct RootBracketFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A coefficient that must average to zero over one period does not.
struct NotZeroMean : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Advection CFL or reaction-Lipschitz bound violated for the chosen step.
struct CflViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// NaN or infinity appeared in a field during time integration.
struct NonFiniteValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An envelope's residual check failed where the construction promised a
/// sign; the message carries the witness node and residual value.
struct EnvelopeInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An envelope recipe's strict parameter inequalities cannot be satisfied
/// (wrong speed regime, no feasible bump width, empty support on the grid).
struct ParamsInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A fixed-point or fitting iteration hit its cap before meeting tolerance.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A wave iteration converged, but to a profile with no interior content
/// (sup below 10x tolerance away from the clamped boundary): either the
/// speed is at/above the existence threshold or the domain is too small.
struct DegenerateWave : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A profile that must be monotone in space (e.g. a front used as a moving
/// habitat) failed the monotonicity check beyond tolerance.
struct MonotonicityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too few samples to fit the requested model.
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A time did not land on the period/step lattice where it had to.
struct PhaseMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Transmission thresholds are undefined (the transmission mean vanishes).
struct DegenerateTransmission : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config file could not be parsed; message carries file:line and the token.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config parsed but a value is out of range / inconsistent for the run.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rdshift
