#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <utility>

#include "keylog/errors.hpp"
#include "keylog/phase_algebra.hpp"

// Truncated single-mode Fock-space numerics. A FockVector is a complex
// amplitude vector over number states |0>..|N-1>; a ModeOperator is the
// matching N x N matrix.

namespace keylog {

using FockVector = Eigen::VectorXcd;
using ModeOperator = Eigen::MatrixXcd;

// Numerical tolerances of the truncated layer.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kTruncTol = 1e-8;

// a = sum sqrt(n) |n-1><n|. Requires N >= 2.
ModeOperator ladder_lower(int dim);

// q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)). Requires N >= 2.
std::pair<ModeOperator, ModeOperator> quadratures(int dim);

// diag(0, 1, ..., N-1).
ModeOperator number_operator(int dim);

enum class DisplacementMethod {
    Exponential,  // matrix exponential of the truncated generator (unitary)
    Analytic,     // closed-form Laguerre matrix elements of the true operator
};

// D(alpha) = exp(alpha a^dag - conj(alpha) a), truncated to dim levels.
// Requires dim >= 8 and |alpha|^2 <= dim/4.
ModeOperator displacement_matrix(Complex alpha, int dim,
                                 DisplacementMethod method);

// Shared cache over (alpha, dim, method); safe for concurrent readers.
std::shared_ptr<const ModeOperator> cached_displacement(
    Complex alpha, int dim, DisplacementMethod method);

FockVector vacuum_state(int dim);
FockVector number_state(int n, int dim);
FockVector coherent_state(Complex alpha, int dim);

void normalize(FockVector& v);

// Probability mass in the top ceil(N/10) levels; truncation diagnostic.
double leakage(const FockVector& v);

// |<v1|v2>|^2. Requires equal dims.
double fidelity(const FockVector& v1, const FockVector& v2);

// <v|op|v>.
Complex expectation(const ModeOperator& op, const FockVector& v);

// Finite-energy GKP construction parameters. The ideal codeword is not
// normalizable; a Gaussian envelope of width delta over the q-lattice
// stands in for it.
struct GkpParams {
    int mu = 0;           // logical value, 0 or 1
    double delta = 0.25;  // envelope width
    int cutoff = 150;     // Fock dimension N
    int s_max = 0;        // lattice truncation radius; 0 = derive from delta

    void validate() const;
};

// Smallest s_max with dropped lattice weight e^{-pi delta^2 (2 s_max+2)^2 / 2}
// below 1e-12.
int default_s_max(double delta);

// Normalized Gaussian wavepacket of width delta centered at q0, in the Fock
// basis. Computed by the ladder recursion for the state annihilated by
// (1+delta^2) a + (1-delta^2) a^dag - sqrt(2) q0.
FockVector squeezed_position_state(double q0, double delta, int dim);

// Normalized codeword proportional to
//   sum_s exp(-delta^2 q_s^2 / 2) |wavepacket at q_s = (2s+mu) sqrt(pi)>.
// Throws TruncationRisk if the result's leakage exceeds 1e-6.
FockVector gkp_codeword(const GkpParams& params);

}  // namespace keylog
