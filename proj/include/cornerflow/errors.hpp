#pragma once

#include <stdexcept>
#include <string>

namespace cornerflow {

// Error taxonomy shared across the library.  Every failure mode the solvers
// can diagnose maps to one of these so callers (and the CLI) can translate
// them into exit codes without string matching.

// An iterative solve (Newton, Picard) failed to meet its tolerance.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The density/sound-speed base 1 + (g-1)(B0 - dtPhi - |grad Phi|^2/2)
// dropped to zero or below: hyperbolicity is lost.
struct VacuumReached : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested time step violates the explicit-scheme stability bound.
struct CFLViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solution norm blew past the instability guard during time stepping.
struct InstabilityDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mollifier width is below the resolvable limit (eps < 2h).
struct KernelUnderresolved : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Multiplier matrix failed its positivity conditions.
struct NotHyperbolic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A documented precondition of a check was violated by its inputs.
struct PreconditionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid too coarse to evaluate the requested derivative order.
struct OrderUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inadmissible scenario configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cornerflow
