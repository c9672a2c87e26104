#include "keylog/phase_algebra.hpp"

#include <cmath>
#include <numbers>

namespace keylog {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kHalfLattice = std::sqrt(std::numbers::pi / 2.0);
}  // namespace

Complex complex_amplitude(double re, double im) {
    if (!std::isfinite(re) || !std::isfinite(im)) {
        throw SimError("complex amplitude components must be finite");
    }
    return Complex{re, im};
}

double canonical_phase(double phase) {
    double p = std::fmod(phase, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p >= kTwoPi) p = 0.0;  // fmod rounding at the seam
    return p;
}

double phase_distance(double a, double b) {
    double d = std::fabs(canonical_phase(a) - canonical_phase(b));
    return std::min(d, kTwoPi - d);
}

PhasedDisplacement::PhasedDisplacement(double phase_, Complex alpha_)
    : phase(canonical_phase(phase_)),
      alpha(complex_amplitude(alpha_.real(), alpha_.imag())) {
    if (!std::isfinite(phase_)) {
        throw SimError("displacement phase must be finite");
    }
}

bool approx_equal(const PhasedDisplacement& a, const PhasedDisplacement& b,
                  double phase_tol, double amp_tol) {
    return phase_distance(a.phase, b.phase) <= phase_tol &&
           std::abs(a.alpha - b.alpha) <= amp_tol;
}

PauliLetter parse_letter(const std::string& s) {
    if (s == "I") return PauliLetter::I;
    if (s == "X") return PauliLetter::X;
    if (s == "Z") return PauliLetter::Z;
    if (s == "Y") return PauliLetter::Y;
    throw SimError("unknown Pauli letter: " + s);
}

std::string letter_name(PauliLetter letter) {
    switch (letter) {
        case PauliLetter::I: return "I";
        case PauliLetter::X: return "X";
        case PauliLetter::Z: return "Z";
        case PauliLetter::Y: return "Y";
    }
    throw SimError("invalid Pauli letter");
}

PhasedDisplacement make_pauli(PauliLetter letter) {
    const PhasedDisplacement x{0.0, Complex{kHalfLattice, 0.0}};
    const PhasedDisplacement z{0.0, Complex{0.0, kHalfLattice}};
    switch (letter) {
        case PauliLetter::I: return PhasedDisplacement{0.0, Complex{0.0, 0.0}};
        case PauliLetter::X: return x;
        case PauliLetter::Z: return z;
        case PauliLetter::Y: {
            PhasedDisplacement xz = compose(x, z);
            return PhasedDisplacement{xz.phase + std::numbers::pi / 2.0,
                                      xz.alpha};
        }
    }
    throw SimError("invalid Pauli letter");
}

PhasedDisplacement compose(const PhasedDisplacement& d1,
                           const PhasedDisplacement& d2) {
    double bch = kBchSign * symplectic_phase(d1.alpha, d2.alpha);
    return PhasedDisplacement{d1.phase + d2.phase + bch, d1.alpha + d2.alpha};
}

PhasedDisplacement inverse(const PhasedDisplacement& d) {
    return PhasedDisplacement{-d.phase, -d.alpha};
}

double symplectic_phase(Complex alpha, Complex beta) {
    return std::imag(alpha * std::conj(beta));
}

PhasedDisplacement conjugate_loop(Complex alpha, Complex beta) {
    PhasedDisplacement neg_b{0.0, -beta};
    PhasedDisplacement a{0.0, alpha};
    PhasedDisplacement b{0.0, beta};
    return compose(compose(neg_b, a), b);
}

CommutationClass commutation_class(const PhasedDisplacement& d1,
                                   const PhasedDisplacement& d2) {
    double two_theta =
        canonical_phase(2.0 * symplectic_phase(d1.alpha, d2.alpha));
    if (phase_distance(two_theta, 0.0) <= kPhaseTol) {
        return {CommutationClass::Kind::Commute, two_theta};
    }
    if (phase_distance(two_theta, std::numbers::pi) <= kPhaseTol) {
        return {CommutationClass::Kind::Anticommute, two_theta};
    }
    return {CommutationClass::Kind::GeneralPhase, two_theta};
}

namespace {
bool near_pi(double phase, double tol) {
    if (phase_distance(phase, std::numbers::pi) <= tol) return true;
    if (phase_distance(phase, 0.0) <= tol) return false;
    throw PhaseOutOfAlphabet("loop phase " + std::to_string(phase) +
                             " is not within tolerance of 0 or pi");
}
}  // namespace

PauliLetter infer_letter(double phase_real_run, double phase_imag_run,
                         double tol) {
    // A real beta sees the imaginary part of alpha (the Z component), an
    // imaginary beta sees the real part (the X component).
    bool bit_z = near_pi(phase_real_run, tol);
    bool bit_x = near_pi(phase_imag_run, tol);
    if (bit_x && bit_z) return PauliLetter::Y;
    if (bit_x) return PauliLetter::X;
    if (bit_z) return PauliLetter::Z;
    return PauliLetter::I;
}

}  // namespace keylog
