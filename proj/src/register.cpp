#include "keylog/register.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace keylog {

SubsystemSpec SubsystemSpec::qudit(int d) {
    if (d < 2) throw DimensionTooSmall("qudit dimension must be >= 2");
    return {Kind::Qudit, d};
}

SubsystemSpec SubsystemSpec::mode(int n) {
    if (n < 2) throw DimensionTooSmall("mode dimension must be >= 2");
    return {Kind::Mode, n};
}

RegisterState::RegisterState(std::vector<SubsystemSpec> specs,
                             const std::vector<Preparation>& preps)
    : specs_(std::move(specs)) {
    if (specs_.empty()) throw BadAssignment("register needs >= 1 subsystem");
    if (preps.size() != specs_.size()) {
        throw BadAssignment("one preparation per subsystem required");
    }
    std::int64_t total = 1;
    for (const auto& s : specs_) {
        total *= s.dim;
        if (total > kDimensionGuard) {
            throw DimensionGuardExceeded("register dimension exceeds 2^24");
        }
    }
    // product state, built subsystem by subsystem (index 0 most significant)
    amps_ = Eigen::VectorXcd::Ones(1);
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const int d = specs_[i].dim;
        Eigen::VectorXcd factor(d);
        if (const int* basis = std::get_if<int>(&preps[i])) {
            if (*basis < 0 || *basis >= d) {
                throw BadAssignment("basis index out of range");
            }
            factor.setZero();
            factor(*basis) = 1.0;
        } else if (std::get_if<EqualSuperposition>(&preps[i])) {
            factor.setConstant(1.0 / std::sqrt(static_cast<double>(d)));
        } else {
            const auto& v = std::get<FockVector>(preps[i]);
            if (v.size() != d) {
                throw BadAssignment("prepared vector dimension mismatch");
            }
            factor = v;
        }
        Eigen::VectorXcd next(amps_.size() * d);
        for (std::int64_t a = 0; a < amps_.size(); ++a) {
            next.segment(a * d, d) = amps_(a) * factor;
        }
        amps_ = std::move(next);
    }
    renormalize();
}

const SubsystemSpec& RegisterState::spec(int idx) const {
    check_idx(idx);
    return specs_[idx];
}

void RegisterState::check_idx(int idx) const {
    if (idx < 0 || idx >= num_subsystems()) {
        throw DimensionMismatch("subsystem index out of range");
    }
}

std::int64_t RegisterState::stride(int idx) const {
    std::int64_t s = 1;
    for (std::size_t i = idx + 1; i < specs_.size(); ++i) s *= specs_[i].dim;
    return s;
}

void RegisterState::apply_local(const Eigen::MatrixXcd& op, int idx) {
    check_idx(idx);
    const int d = specs_[idx].dim;
    if (op.rows() != d || op.cols() != d) {
        throw DimensionMismatch("local operator dimension mismatch");
    }
    const std::int64_t str = stride(idx);
    const std::int64_t block = str * d;
    Eigen::VectorXcd scratch(d);
    for (std::int64_t base = 0; base < amps_.size(); base += block) {
        for (std::int64_t inner = 0; inner < str; ++inner) {
            for (int k = 0; k < d; ++k) {
                scratch(k) = amps_(base + k * str + inner);
            }
            scratch = op * scratch;
            for (int k = 0; k < d; ++k) {
                amps_(base + k * str + inner) = scratch(k);
            }
        }
    }
}

void RegisterState::apply_pair(const Eigen::MatrixXcd& op, int idx_a,
                               int idx_b) {
    check_idx(idx_a);
    check_idx(idx_b);
    if (idx_a == idx_b) throw DimensionMismatch("pair indices must differ");
    const int da = specs_[idx_a].dim;
    const int db = specs_[idx_b].dim;
    if (op.rows() != da * db || op.cols() != da * db) {
        throw DimensionMismatch("pair operator dimension mismatch");
    }
    const std::int64_t sa = stride(idx_a);
    const std::int64_t sb = stride(idx_b);
    Eigen::VectorXcd scratch(da * db);
    const std::int64_t n = amps_.size();
    for (std::int64_t base = 0; base < n; ++base) {
        // visit each orbit once, at its element with both digits zero
        if ((base / sa) % da != 0 || (base / sb) % db != 0) continue;
        for (int a = 0; a < da; ++a) {
            for (int b = 0; b < db; ++b) {
                scratch(a * db + b) = amps_(base + a * sa + b * sb);
            }
        }
        scratch = op * scratch;
        for (int a = 0; a < da; ++a) {
            for (int b = 0; b < db; ++b) {
                amps_(base + a * sa + b * sb) = scratch(a * db + b);
            }
        }
    }
}

void RegisterState::apply_range(const Eigen::MatrixXcd& op, int first,
                                int last) {
    check_idx(first);
    check_idx(last);
    if (first > last) throw DimensionMismatch("empty subsystem range");
    std::int64_t d = 1;
    for (int i = first; i <= last; ++i) d *= specs_[i].dim;
    if (op.rows() != d || op.cols() != d) {
        throw DimensionMismatch("range operator dimension mismatch");
    }
    const std::int64_t str = stride(last);
    const std::int64_t block = str * d;
    Eigen::VectorXcd scratch(d);
    for (std::int64_t base = 0; base < amps_.size(); base += block) {
        for (std::int64_t inner = 0; inner < str; ++inner) {
            for (std::int64_t k = 0; k < d; ++k) {
                scratch(k) = amps_(base + k * str + inner);
            }
            scratch = op * scratch;
            for (std::int64_t k = 0; k < d; ++k) {
                amps_(base + k * str + inner) = scratch(k);
            }
        }
    }
}

void RegisterState::apply_cnot(int control_idx, int target_idx) {
    check_idx(control_idx);
    check_idx(target_idx);
    if (specs_[control_idx].kind != SubsystemSpec::Kind::Qubit ||
        specs_[target_idx].kind != SubsystemSpec::Kind::Qubit) {
        throw NotAQubit("CNOT requires qubit subsystems");
    }
    Eigen::MatrixXcd cnot = Eigen::MatrixXcd::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    apply_pair(cnot, control_idx, target_idx);
}

void RegisterState::apply_qubit_controlled_displacement(
    int control_idx, int mode_idx, Complex beta, DisplacementMethod method) {
    check_idx(control_idx);
    check_idx(mode_idx);
    if (specs_[control_idx].kind != SubsystemSpec::Kind::Qubit) {
        throw NotAQubit("controlled displacement needs a qubit control");
    }
    if (specs_[mode_idx].kind != SubsystemSpec::Kind::Mode) {
        throw DimensionMismatch("controlled displacement target must be a mode");
    }
    const int nmode = specs_[mode_idx].dim;
    auto d = cached_displacement(beta, nmode, method);
    const std::int64_t sc = stride(control_idx);
    const std::int64_t sm = stride(mode_idx);
    // iterate over all positions with control digit 1 and mode digit 0
    const std::int64_t n = amps_.size();
    Eigen::VectorXcd scratch(nmode);
    for (std::int64_t i = 0; i < n; ++i) {
        if ((i / sc) % 2 != 1) continue;
        if ((i / sm) % nmode != 0) continue;
        for (int k = 0; k < nmode; ++k) scratch(k) = amps_(i + k * sm);
        scratch = (*d) * scratch;
        for (int k = 0; k < nmode; ++k) amps_(i + k * sm) = scratch(k);
    }
}

void RegisterState::apply_number_controlled_displacement(
    int qudit_idx, int qubit_idx, int mode_idx, Complex beta, int sign,
    DisplacementMethod method) {
    check_idx(qudit_idx);
    check_idx(qubit_idx);
    check_idx(mode_idx);
    if (specs_[qubit_idx].kind != SubsystemSpec::Kind::Qubit) {
        throw NotAQubit("number-controlled displacement needs a qubit");
    }
    if (specs_[mode_idx].kind != SubsystemSpec::Kind::Mode) {
        throw DimensionMismatch("displacement target must be a mode");
    }
    if (sign != 1 && sign != -1) {
        throw SimError("sign must be +1 or -1");
    }
    const int dq = specs_[qudit_idx].dim;
    const int nmode = specs_[mode_idx].dim;
    if (std::norm((dq - 1.0) * beta) > nmode / 4.0) {
        throw TruncationRisk("amplified displacement exceeds N/4 guard");
    }
    std::vector<std::shared_ptr<const ModeOperator>> ops(dq);
    for (int j = 0; j < dq; ++j) {
        ops[j] = cached_displacement(static_cast<double>(sign) *
                                     static_cast<double>(j) * beta,
                                     nmode, method);
    }
    const std::int64_t sq = stride(qudit_idx);
    const std::int64_t sb = stride(qubit_idx);
    const std::int64_t sm = stride(mode_idx);
    const std::int64_t n = amps_.size();
    Eigen::VectorXcd scratch(nmode);
    for (std::int64_t i = 0; i < n; ++i) {
        if ((i / sb) % 2 != 1) continue;
        if ((i / sm) % nmode != 0) continue;
        const int j = static_cast<int>((i / sq) % dq);
        if (j == 0) continue;
        for (int k = 0; k < nmode; ++k) scratch(k) = amps_(i + k * sm);
        scratch = (*ops[j]) * scratch;
        for (int k = 0; k < nmode; ++k) amps_(i + k * sm) = scratch(k);
    }
}

void RegisterState::apply_cross_kerr(int idx_a, int idx_b, int fourier_order) {
    check_idx(idx_a);
    check_idx(idx_b);
    if (specs_[idx_a].kind == SubsystemSpec::Kind::Qubit ||
        specs_[idx_b].kind == SubsystemSpec::Kind::Qubit) {
        // qubits are number-like too, but the protocol only pairs qudits/modes
        throw DimensionMismatch("cross-Kerr expects number-like subsystems");
    }
    if (fourier_order < 2) throw DimensionMismatch("Fourier order must be >= 2");
    const std::int64_t sa = stride(idx_a);
    const std::int64_t sb = stride(idx_b);
    const int da = specs_[idx_a].dim;
    const int db = specs_[idx_b].dim;
    const double w = 2.0 * std::numbers::pi / fourier_order;
    for (std::int64_t i = 0; i < amps_.size(); ++i) {
        const std::int64_t j = (i / sa) % da;
        const std::int64_t k = (i / sb) % db;
        amps_(i) *= std::exp(Complex{0.0, w * static_cast<double>(j * k)});
    }
}

void RegisterState::apply_qft(int idx) {
    check_idx(idx);
    apply_local(dft_matrix(specs_[idx].dim), idx);
}

Eigen::VectorXd RegisterState::marginal(int idx) const {
    return marginal_range(idx, idx);
}

Eigen::VectorXd RegisterState::marginal_range(int first, int last) const {
    check_idx(first);
    check_idx(last);
    if (first > last) throw DimensionMismatch("empty subsystem range");
    std::int64_t d = 1;
    for (int i = first; i <= last; ++i) d *= specs_[i].dim;
    const std::int64_t str = stride(last);
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(d);
    for (std::int64_t i = 0; i < amps_.size(); ++i) {
        probs((i / str) % d) += std::norm(amps_(i));
    }
    return probs;
}

MeasurementResult RegisterState::measure_exact(int idx) const {
    Eigen::VectorXd probs = marginal(idx);
    int argmax = 0;
    probs.maxCoeff(&argmax);
    auto collapsed = std::make_shared<RegisterState>(collapse(idx, argmax));
    return {argmax, std::move(probs), std::move(collapsed)};
}

MeasurementResult RegisterState::measure_sample(int idx,
                                                std::uint64_t seed) const {
    Eigen::VectorXd probs = marginal(idx);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng);
    double acc = 0.0;
    int outcome = static_cast<int>(probs.size()) - 1;
    for (int k = 0; k < probs.size(); ++k) {
        acc += probs(k);
        if (u < acc) {
            outcome = k;
            break;
        }
    }
    auto collapsed = std::make_shared<RegisterState>(collapse(idx, outcome));
    return {outcome, std::move(probs), std::move(collapsed)};
}

Eigen::MatrixXcd RegisterState::reduced_density(int idx) const {
    check_idx(idx);
    const int d = specs_[idx].dim;
    const std::int64_t str = stride(idx);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    const std::int64_t block = str * d;
    for (std::int64_t base = 0; base < amps_.size(); base += block) {
        for (std::int64_t inner = 0; inner < str; ++inner) {
            for (int m = 0; m < d; ++m) {
                const Complex am = amps_(base + m * str + inner);
                if (am == Complex{0.0, 0.0}) continue;
                for (int n = 0; n < d; ++n) {
                    rho(m, n) += am * std::conj(amps_(base + n * str + inner));
                }
            }
        }
    }
    return rho;
}

RegisterState RegisterState::collapse(int idx, int outcome) const {
    check_idx(idx);
    const int d = specs_[idx].dim;
    if (outcome < 0 || outcome >= d) {
        throw BadAssignment("collapse outcome out of range");
    }
    const std::int64_t str = stride(idx);
    RegisterState out;
    out.specs_ = specs_;
    out.amps_ = amps_;
    for (std::int64_t i = 0; i < out.amps_.size(); ++i) {
        if ((i / str) % d != outcome) out.amps_(i) = 0.0;
    }
    out.renormalize();
    return out;
}

void RegisterState::renormalize() {
    const double n = amps_.norm();
    if (n <= 0.0 || !std::isfinite(n)) {
        throw SimError("register state has zero or non-finite norm");
    }
    amps_ /= n;
}

Eigen::MatrixXcd dft_matrix(int d) {
    if (d < 2) throw DimensionMismatch("DFT order must be >= 2");
    Eigen::MatrixXcd f(d, d);
    const double w = 2.0 * std::numbers::pi / d;
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            f(k, j) = s * std::exp(Complex{0.0, w * j * k});
        }
    }
    return f;
}

}  // namespace keylog
