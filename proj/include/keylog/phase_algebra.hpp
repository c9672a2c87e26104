#pragma once

#include <complex>
#include <string>

#include "keylog/errors.hpp"

// Exact scalar algebra of phased displacement operators e^{i phase} D(alpha).
// Composition follows D(a)D(b) = e^{i s Im(a conj(b))} D(a+b); the sign s is a
// single convention constant fixed once against the Fock-matrix oracle.

namespace keylog {

using Complex = std::complex<double>;

// Comparison tolerance for the exact (scalar) layer, in radians.
inline constexpr double kPhaseTol = 1e-9;

// BCH sign convention in D(a)D(b) = e^{i s Im(a conj(b))} D(a+b).
// Fixed by the Exponential-vs-composition Fock oracle (see test_fock).
inline constexpr double kBchSign = 1.0;

// Checked constructor for complex amplitudes; rejects NaN/Inf components.
Complex complex_amplitude(double re, double im);

// Reduce an angle to [0, 2*pi).
double canonical_phase(double phase);

// Wraparound-aware distance between two angles, in [0, pi].
double phase_distance(double a, double b);

// e^{i phase} D(alpha); phase is stored canonicalized to [0, 2*pi).
struct PhasedDisplacement {
    double phase = 0.0;
    Complex alpha{0.0, 0.0};

    PhasedDisplacement() = default;
    PhasedDisplacement(double phase_, Complex alpha_);
};

bool approx_equal(const PhasedDisplacement& a, const PhasedDisplacement& b,
                  double phase_tol = kPhaseTol, double amp_tol = kPhaseTol);

enum class PauliLetter { I, X, Z, Y };

PauliLetter parse_letter(const std::string& s);
std::string letter_name(PauliLetter letter);

// Logical GKP Paulis: X = D(sqrt(pi/2)), Z = D(i sqrt(pi/2)), Y = i X Z.
// The phase of Y comes out of compose, never hand-entered.
PhasedDisplacement make_pauli(PauliLetter letter);

// Operator product d1 * d2.
PhasedDisplacement compose(const PhasedDisplacement& d1,
                           const PhasedDisplacement& d2);

PhasedDisplacement inverse(const PhasedDisplacement& d);

// theta = Im(alpha * conj(beta)); not reduced mod 2*pi.
double symplectic_phase(Complex alpha, Complex beta);

// D(-beta) D(alpha) D(beta), evaluated through compose. The displacement is
// unchanged; only the loop phase (twice the symplectic area) survives.
PhasedDisplacement conjugate_loop(Complex alpha, Complex beta);

struct CommutationClass {
    enum class Kind { Commute, Anticommute, GeneralPhase };
    Kind kind;
    double two_theta;  // 2*theta mod 2*pi
};

CommutationClass commutation_class(const PhasedDisplacement& d1,
                                   const PhasedDisplacement& d2);

// Decode the Pauli letter from the loop phases (2*theta mod 2*pi) recovered
// by the real-beta and imaginary-beta runs. Each phase must sit within tol
// of 0 or pi; otherwise PhaseOutOfAlphabet.
PauliLetter infer_letter(double phase_real_run, double phase_imag_run,
                         double tol = kPhaseTol);

}  // namespace keylog
