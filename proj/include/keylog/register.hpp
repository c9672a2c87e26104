#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "keylog/errors.hpp"
#include "keylog/fock.hpp"

// Dense state-vector simulation over an ordered composite of qubits, qudits
// and truncated modes. Subsystem 0 is the slowest-varying (most significant)
// factor of the amplitude layout; the ordering is fixed at creation.

namespace keylog {

struct SubsystemSpec {
    enum class Kind { Qubit, Qudit, Mode };
    Kind kind;
    int dim;

    static SubsystemSpec qubit() { return {Kind::Qubit, 2}; }
    static SubsystemSpec qudit(int d);
    static SubsystemSpec mode(int n);
};

// Per-subsystem preparation: a basis index, an equal superposition, or an
// explicit amplitude vector (for modes).
struct EqualSuperposition {};
using Preparation = std::variant<int, EqualSuperposition, FockVector>;

class RegisterState;

struct MeasurementResult {
    int outcome;
    Eigen::VectorXd distribution;
    std::shared_ptr<RegisterState> collapsed;
};

inline constexpr std::int64_t kDimensionGuard = std::int64_t{1} << 24;

class RegisterState {
public:
    RegisterState(std::vector<SubsystemSpec> specs,
                  const std::vector<Preparation>& preps);

    int num_subsystems() const { return static_cast<int>(specs_.size()); }
    const SubsystemSpec& spec(int idx) const;
    std::int64_t total_dim() const { return amps_.size(); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    double norm() const { return amps_.norm(); }

    // I (x) ... (x) op (x) ... (x) I, without materializing the Kronecker.
    void apply_local(const Eigen::MatrixXcd& op, int idx);

    // Apply a (d1*d2)-dimensional operator to the ordered pair of subsystems
    // (idx_a, idx_b); the operator's basis is |a,b> with a most significant.
    void apply_pair(const Eigen::MatrixXcd& op, int idx_a, int idx_b);

    // Apply a D-dimensional operator to the contiguous range [first, last]
    // of subsystems, D = product of their dims.
    void apply_range(const Eigen::MatrixXcd& op, int first, int last);

    void apply_cnot(int control_idx, int target_idx);

    // Branch with the control qubit in |1> gets D(beta) on the mode.
    void apply_qubit_controlled_displacement(int control_idx, int mode_idx,
                                             Complex beta,
                                             DisplacementMethod method);

    // Branch (j, qubit = 1) gets D(sign * j * beta) on the mode.
    void apply_number_controlled_displacement(int qudit_idx, int qubit_idx,
                                              int mode_idx, Complex beta,
                                              int sign,
                                              DisplacementMethod method);

    // Basis state |j>|k> of the pair acquires phase e^{2 pi i j k / d}.
    void apply_cross_kerr(int idx_a, int idx_b, int fourier_order);

    // d-dimensional discrete Fourier matrix on one subsystem.
    void apply_qft(int idx);

    // Marginal outcome distribution of one subsystem.
    Eigen::VectorXd marginal(int idx) const;

    // Joint marginal over the contiguous range [first, last].
    Eigen::VectorXd marginal_range(int first, int last) const;

    // Exact: full marginal, collapsed state for the argmax outcome.
    MeasurementResult measure_exact(int idx) const;

    // Sample one outcome with a seeded mt19937_64 generator and collapse.
    MeasurementResult measure_sample(int idx, std::uint64_t seed) const;

    // Reduced density matrix of one subsystem.
    Eigen::MatrixXcd reduced_density(int idx) const;

    // Project subsystem idx onto basis state `outcome` and renormalize.
    RegisterState collapse(int idx, int outcome) const;

    void renormalize();

private:
    RegisterState() = default;
    void check_idx(int idx) const;
    std::int64_t stride(int idx) const;  // product of dims after idx

    std::vector<SubsystemSpec> specs_;
    Eigen::VectorXcd amps_;
};

// d x d discrete Fourier matrix, |j> -> d^{-1/2} sum_k e^{2 pi i j k / d}|k>.
Eigen::MatrixXcd dft_matrix(int d);

}  // namespace keylog
