// errors.hpp — Exception taxonomy shared by all otesim modules

#pragma once

#include <stdexcept>
#include <string>

namespace otesim {

// Model construction violated a structural constraint (ladder rule,
// resonance mismatch, bad geometry).
struct ConstraintViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An input left the mathematical domain of an operation (nonpositive
// frequency/temperature, negative population, Gamma+ <= Gamma-).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A spectral-response provider returned values incompatible with real
// positive local rates.
struct UnphysicalAlpha : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The Liouvillian nullspace is not one-dimensional.
struct DegenerateSteadyState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear solve or positivity repair failed beyond tolerance.
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// RK4 step exceeds the stability bound.
struct StepTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two algebraically equivalent flux evaluations disagreed.
struct FormMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dissipator kernel cannot be constructed (complex non-local rates).
struct KernelUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Efficiency requested outside the refrigeration regime.
struct NotRefrigerating : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carnot bound requested outside the temperature ordering it is derived for.
struct OrderingViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Power maximisation found no frequency with positive resonant flux.
struct NoRefrigerationWindow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Appendix-style heat/work audit detected a nonzero work rate or effective
// Hamiltonian, signalling a solver or assembly defect.
struct AuditFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file is malformed or inconsistent.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace otesim
