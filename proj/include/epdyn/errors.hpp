#pragma once

#include <stdexcept>
#include <string>

namespace epdyn {

// Physical-domain violation (bad exponent, self-coupling, sonic speed, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Lattice sum does not converge (s <= 1).
struct DivergenceError : DomainError {
    using DomainError::DomainError;
};

// Sonic denominator v^2 - w/m vanished.
struct SonicSingularityError : DomainError {
    using DomainError::DomainError;
};

// Grid wavenumbers exceed the lattice Brillouin zone.
struct AliasingError : DomainError {
    using DomainError::DomainError;
};

// Bad integrator / run configuration (CFL guard, cadence, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf appeared mid-integration.
struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver did not reach its residual target.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver collapsed to the zero solution.
struct TrivialAttractorError : ConvergenceError {
    using ConvergenceError::ConvergenceError;
};

}  // namespace epdyn
