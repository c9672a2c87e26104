#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "keylog/fock.hpp"
#include "keylog/phase_algebra.hpp"
#include "keylog/register.hpp"

// End-to-end protocol implementations: discrete-variable superdense coding,
// the geometric-phase channel, standard / one-shot / cross-Kerr phase
// estimation, and the full keystroke attack.

namespace keylog {

enum class Backend { ExactAlgebra, FockNumeric };

struct QpeConfig {
    int n = 1;                    // register size; Fourier order d = 2^n
    Complex beta{0.0, 0.0};       // protocol displacement (attack fixes its own)
    Backend backend = Backend::FockNumeric;
    GkpParams gkp{};              // mode-c codeword parameters (Fock backend)
    bool use_crosskerr = false;   // attack: cross-Kerr readout instead of QFT
    bool ancilla_as_mode = false; // realize ancilla a as a Mode, not a Qudit
    bool crosskerr_postselect = true;  // see qpe_crosskerr
    double leakage_guard = 1e-3;  // loud-failure threshold on recorded leakage

    int fourier_order() const;    // 2^n, guarded
    void validate() const;
};

struct QpeOutcome {
    Eigen::VectorXd distribution;  // over k = 0 .. 2^n - 1
    int ell = 0;                   // theta = 2^-n pi (ell + delta)
    double delta = 0.0;            // in [-1/2, 1/2)
    std::optional<FockVector> post_mode_state;        // Fock backend only
    std::optional<Eigen::MatrixXcd> post_mode_density;  // collapsed, Fock only
    double leakage_max = 0.0;
    int alpha_applications = 0;    // instrumented count of D(alpha) uses
};

struct AttackReport {
    PauliLetter true_letter;
    PauliLetter inferred_letter;
    QpeOutcome run_real;
    QpeOutcome run_imag;
    double codeword_fidelity = 1.0;
    double leakage_max = 0.0;
};

struct SuperdenseResult {
    std::array<int, 2> decoded;     // bits handed to the receiver
    std::array<int, 2> zz_outcome;  // raw ZZ readout
};

// Encode two classical bits on half of a Bell pair, run the Bell measurement
// (CNOT, H, ZZ readout) and decode through the fixed outcome table.
SuperdenseResult superdense_dv(std::array<int, 2> bits);

// Standard 2x2 Pauli matrix for the letter.
Eigen::Matrix2cd pauli_matrix(PauliLetter letter);

// Closed-form outcome distribution p(k) of phase estimation for a unitary
// with eigenvalue e^{-2 i theta} on an n-bit register; the removable
// singularity at integer k - 2^n theta/pi is handled exactly.
Eigen::VectorXd qpe_outcome_distribution(int n, double theta);

// theta = 2^-n pi (ell + delta) with ell in {0..2^n-1}, delta in [-1/2, 1/2).
std::pair<int, double> ell_delta_from_theta(int n, double theta);

// theta such that the one-shot circuit for (alpha, beta) reproduces
// qpe_outcome_distribution(n, theta): the conjugate loop multiplies the
// qubit's |1> branch by e^{i phi} per unit j, and e^{-2 i theta} = e^{i phi}.
double effective_theta(Complex alpha, Complex beta);

// Full circuit simulation: n ancilla qubits, controlled powers of
// U = diag(1, e^{-2 i theta}) on a target qubit, register QFT, exact readout.
QpeOutcome qpe_standard(int n, double theta);

// Conjugate an ancilla qubit's controlled displacement around D(alpha) and
// return the verified product factors (U |psi>, D(alpha) |phi>).
std::pair<Eigen::Vector2cd, FockVector> geometric_phase_channel(
    Complex alpha, Complex beta, const Eigen::Vector2cd& psi,
    const FockVector& phi);

// One-shot phase estimation: ancilla a (dim 2^n) in equal superposition,
// qubit b = |1>, mode c; number-controlled displacement D(j beta), a single
// application of D(alpha), the inverse controlled displacement, then a QFT
// on a and exact readout. mode_state overrides the GKP codeword when given.
QpeOutcome qpe_oneshot(const QpeConfig& config, Complex alpha,
                       const std::optional<FockVector>& mode_state = {});

// As qpe_oneshot, but the QFT on a is replaced by a cross-Kerr interaction
// with a second ancilla a' and readout happens on a'. The a register is
// projected back onto its initial equal superposition before readout
// (config.crosskerr_postselect); without that projection the a' marginal is
// exactly uniform and carries no information.
QpeOutcome qpe_crosskerr(const QpeConfig& config, Complex alpha,
                         const std::optional<FockVector>& mode_state = {});

// Two parallel runs (beta real, beta imaginary) against D(alpha_letter),
// decoded through the recovered loop phases. Each run gets its own
// independently prepared mode-c state.
AttackReport keystroke_attack(PauliLetter letter, const QpeConfig& config);

struct SweepCell {
    PauliLetter letter;
    double envelope_delta;
    int cutoff;
    int n;
    std::optional<AttackReport> report;  // empty on per-cell failure
    std::string error;
};

// Cartesian-product convergence sweep; per-cell failures are recorded in the
// row rather than aborting. Rows are merged in input order regardless of
// worker completion order.
std::vector<SweepCell> attack_sweep(const std::vector<PauliLetter>& letters,
                                    const std::vector<double>& envelope_deltas,
                                    const std::vector<int>& cutoffs,
                                    const std::vector<int>& n_values,
                                    const QpeConfig& base,
                                    int workers = 0);

}  // namespace keylog
