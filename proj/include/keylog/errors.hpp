#pragma once

#include <stdexcept>
#include <string>

namespace keylog {

// Base class for all simulator failures.
struct SimError : std::runtime_error {
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionTooSmall : SimError {
    explicit DimensionTooSmall(const std::string& msg) : SimError(msg) {}
};

struct DimensionMismatch : SimError {
    explicit DimensionMismatch(const std::string& msg) : SimError(msg) {}
};

struct DimensionGuardExceeded : SimError {
    explicit DimensionGuardExceeded(const std::string& msg) : SimError(msg) {}
};

// Requested displacement (or state) carries too much energy for the cutoff,
// or a run's recorded leakage exceeded the guard threshold.
struct TruncationRisk : SimError {
    explicit TruncationRisk(const std::string& msg) : SimError(msg) {}
};

struct NotAQubit : SimError {
    explicit NotAQubit(const std::string& msg) : SimError(msg) {}
};

struct BadAssignment : SimError {
    explicit BadAssignment(const std::string& msg) : SimError(msg) {}
};

// A recovered loop phase was not close to 0 or pi: the displacement was not
// in the Pauli alphabet, or the numerics failed.
struct PhaseOutOfAlphabet : SimError {
    explicit PhaseOutOfAlphabet(const std::string& msg) : SimError(msg) {}
};

// The final qubit-mode state failed to factorize within tolerance.
struct EntanglementResidue : SimError {
    explicit EntanglementResidue(const std::string& msg) : SimError(msg) {}
};

struct IoFailure : SimError {
    explicit IoFailure(const std::string& msg) : SimError(msg) {}
};

}  // namespace keylog
