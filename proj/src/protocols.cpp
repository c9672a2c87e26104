#include "keylog/protocols.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace keylog {

namespace {

constexpr double kPi = std::numbers::pi;
const double kHalfLattice = std::sqrt(kPi / 2.0);

double tail_mass(const Eigen::VectorXd& probs) {
    const int dim = static_cast<int>(probs.size());
    const int top = (dim + 9) / 10;
    return probs.tail(top).sum();
}

// mode-c leakage of the current register state
double mode_leakage(const RegisterState& state, int mode_idx) {
    return tail_mass(state.marginal(mode_idx));
}

void guard_leakage(double leak, double threshold) {
    if (leak > threshold) {
        throw TruncationRisk("recorded mode leakage " + std::to_string(leak) +
                             " exceeds guard " + std::to_string(threshold));
    }
}

FockVector dominant_eigenvector(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const int last = static_cast<int>(rho.rows()) - 1;  // largest eigenvalue
    FockVector v = es.eigenvectors().col(last);
    normalize(v);
    return v;
}

}  // namespace

int QpeConfig::fourier_order() const {
    if (n < 1 || n > 20) throw DimensionGuardExceeded("n out of range");
    return 1 << n;
}

void QpeConfig::validate() const {
    (void)fourier_order();
    if (backend == Backend::FockNumeric) gkp.validate();
    if (!(leakage_guard > 0.0)) throw SimError("leakage guard must be positive");
}

Eigen::Matrix2cd pauli_matrix(PauliLetter letter) {
    const Complex i{0.0, 1.0};
    Eigen::Matrix2cd m;
    switch (letter) {
        case PauliLetter::I: m << 1, 0, 0, 1; break;
        case PauliLetter::X: m << 0, 1, 1, 0; break;
        case PauliLetter::Y: m << 0, -i, i, 0; break;
        case PauliLetter::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

SuperdenseResult superdense_dv(std::array<int, 2> bits) {
    if ((bits[0] != 0 && bits[0] != 1) || (bits[1] != 0 && bits[1] != 1)) {
        throw BadAssignment("superdense input must be two bits");
    }
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);

    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qubit()},
                        {0, 0});
    state.apply_local(h, 0);
    state.apply_cnot(0, 1);

    // bits -> letter, matching the paper's encoded-state table
    static constexpr PauliLetter kEncode[4] = {PauliLetter::I, PauliLetter::X,
                                               PauliLetter::Y, PauliLetter::Z};
    const int b = bits[0] * 2 + bits[1];
    state.apply_local(pauli_matrix(kEncode[b]), 0);

    // Bell measurement
    state.apply_cnot(0, 1);
    state.apply_local(h, 0);
    Eigen::VectorXd probs = state.marginal_range(0, 1);
    int outcome = 0;
    probs.maxCoeff(&outcome);

    // ZZ outcomes (00,01,10,11) decode to bits (00,01,11,10)
    static constexpr int kDecode[4] = {0, 1, 3, 2};
    const int dec = kDecode[outcome];
    return {{dec >> 1, dec & 1}, {outcome >> 1, outcome & 1}};
}

Eigen::VectorXd qpe_outcome_distribution(int n, double theta) {
    if (n < 1) throw DimensionGuardExceeded("n must be >= 1");
    const int d = 1 << n;
    Eigen::VectorXd p(d);
    const double t = static_cast<double>(d) * theta / kPi;
    for (int k = 0; k < d; ++k) {
        const double x = k - t;
        const double u = x / d;
        if (std::fabs(u - std::round(u)) < 1e-12) {
            p(k) = 1.0;
        } else {
            const double s = std::sin(kPi * x) / (d * std::sin(kPi * u));
            p(k) = s * s;
        }
    }
    return p;
}

std::pair<int, double> ell_delta_from_theta(int n, double theta) {
    const int d = 1 << n;
    double t = std::fmod(static_cast<double>(d) * theta / kPi, d);
    if (t < 0.0) t += d;
    int ell = static_cast<int>(std::floor(t + 0.5));
    double delta = t - ell;
    if (ell == d) ell = 0;  // wrapped; delta is negative there
    return {ell, delta};
}

double effective_theta(Complex alpha, Complex beta) {
    // loop multiplies the |1> branch by e^{i phi} per unit j; the closed form
    // is stated for eigenvalue e^{-2 i theta}
    return -0.5 * conjugate_loop(alpha, beta).phase;
}

QpeOutcome qpe_standard(int n, double theta) {
    if (n < 1 || n > 10) {
        throw DimensionGuardExceeded("qpe_standard requires 1 <= n <= 10");
    }
    std::vector<SubsystemSpec> specs(n + 1, SubsystemSpec::qubit());
    std::vector<Preparation> preps(n, EqualSuperposition{});
    preps.emplace_back(1);  // eigenstate |1> of U = diag(1, e^{-2 i theta})
    RegisterState state(specs, preps);

    for (int t = 0; t < n; ++t) {
        // qubit t carries binary weight 2^(n-1-t)
        const double power = static_cast<double>(1 << (n - 1 - t));
        Eigen::Matrix4cd cu = Eigen::Matrix4cd::Identity();
        cu(3, 3) = std::exp(Complex{0.0, -2.0 * theta * power});
        state.apply_pair(cu, t, n);
    }
    state.apply_range(dft_matrix(1 << n), 0, n - 1);

    QpeOutcome out;
    out.distribution = state.marginal_range(0, n - 1);
    std::tie(out.ell, out.delta) = ell_delta_from_theta(n, theta);
    return out;
}

std::pair<Eigen::Vector2cd, FockVector> geometric_phase_channel(
    Complex alpha, Complex beta, const Eigen::Vector2cd& psi,
    const FockVector& phi) {
    const int nmode = static_cast<int>(phi.size());
    Eigen::VectorXcd qubit = psi;
    FockVector mode = phi;
    normalize(qubit);
    normalize(mode);

    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::mode(nmode)},
                        {FockVector(qubit), mode});
    state.apply_qubit_controlled_displacement(0, 1, beta,
                                              DisplacementMethod::Exponential);
    state.apply_local(*cached_displacement(alpha, nmode,
                                           DisplacementMethod::Analytic),
                      1);
    state.renormalize();
    state.apply_qubit_controlled_displacement(0, 1, -beta,
                                              DisplacementMethod::Exponential);
    state.renormalize();

    // Schmidt check: the joint state must be a product
    Eigen::MatrixXcd joint(2, nmode);
    for (int b = 0; b < 2; ++b) {
        for (int m = 0; m < nmode; ++m) {
            joint(b, m) = state.amplitudes()(b * nmode + m);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(joint);
    if (svd.singularValues()(1) * svd.singularValues()(1) > kTruncTol) {
        throw EntanglementResidue("qubit-mode state failed to factorize");
    }

    // expected factors: U|psi> with U = diag(1, e^{i phi_loop}), D(alpha)|phi>
    const double loop = conjugate_loop(alpha, beta).phase;
    Eigen::Vector2cd qubit_out = qubit;
    qubit_out(1) *= std::exp(Complex{0.0, loop});
    FockVector mode_out =
        *cached_displacement(alpha, nmode, DisplacementMethod::Analytic) * mode;
    normalize(mode_out);

    const Eigen::VectorXcd expected = [&] {
        Eigen::VectorXcd e(2 * nmode);
        for (int b = 0; b < 2; ++b) {
            e.segment(b * nmode, nmode) = qubit_out(b) * mode_out;
        }
        return e;
    }();
    if (std::norm(expected.dot(state.amplitudes())) < 1.0 - 1e-6) {
        throw EntanglementResidue("factorized state disagrees with circuit");
    }
    return {qubit_out, mode_out};
}

namespace {

// shared Fock-backend pipeline for the one-shot and cross-Kerr variants
QpeOutcome oneshot_fock(const QpeConfig& config, Complex alpha,
                        const std::optional<FockVector>& mode_state,
                        bool crosskerr) {
    const int d = config.fourier_order();
    const int nmode = config.gkp.cutoff;
    FockVector phi = mode_state ? *mode_state : gkp_codeword(config.gkp);
    if (phi.size() != nmode) {
        throw DimensionMismatch("mode state does not match the cutoff");
    }

    std::vector<SubsystemSpec> specs;
    std::vector<Preparation> preps;
    specs.push_back(config.ancilla_as_mode ? SubsystemSpec::mode(d)
                                           : SubsystemSpec::qudit(d));
    preps.emplace_back(EqualSuperposition{});
    int readout_idx = 0;
    if (crosskerr) {
        specs.push_back(SubsystemSpec::qudit(d));
        preps.emplace_back(EqualSuperposition{});
        readout_idx = 1;
    }
    const int qubit_idx = crosskerr ? 2 : 1;
    const int mode_idx = crosskerr ? 3 : 2;
    specs.push_back(SubsystemSpec::qubit());
    preps.emplace_back(1);
    specs.push_back(SubsystemSpec::mode(nmode));
    preps.emplace_back(phi);
    RegisterState state(specs, preps);

    QpeOutcome out;
    out.leakage_max = mode_leakage(state, mode_idx);

    state.apply_number_controlled_displacement(
        0, qubit_idx, mode_idx, config.beta, +1,
        DisplacementMethod::Exponential);
    out.leakage_max = std::max(out.leakage_max, mode_leakage(state, mode_idx));

    // the single application of the unknown operation
    state.apply_local(*cached_displacement(alpha, nmode,
                                           DisplacementMethod::Analytic),
                      mode_idx);
    state.renormalize();
    out.alpha_applications += 1;
    out.leakage_max = std::max(out.leakage_max, mode_leakage(state, mode_idx));

    state.apply_number_controlled_displacement(
        0, qubit_idx, mode_idx, config.beta, -1,
        DisplacementMethod::Exponential);
    out.leakage_max = std::max(out.leakage_max, mode_leakage(state, mode_idx));
    guard_leakage(out.leakage_max, config.leakage_guard);

    RegisterState* readout_state = &state;
    std::optional<RegisterState> projected;
    if (!crosskerr) {
        state.apply_qft(0);
    } else {
        state.apply_cross_kerr(0, 1, d);
        if (config.crosskerr_postselect) {
            // disentangle a: project it back onto the equal superposition
            // (without this the a' marginal is exactly uniform)
            Eigen::MatrixXcd proj =
                Eigen::MatrixXcd::Constant(d, d, 1.0 / d);
            state.apply_local(proj, 0);
            state.renormalize();
        }
    }
    out.distribution = readout_state->marginal(readout_idx);

    int argmax = 0;
    out.distribution.maxCoeff(&argmax);
    RegisterState collapsed = readout_state->collapse(readout_idx, argmax);
    out.post_mode_density = collapsed.reduced_density(mode_idx);
    out.post_mode_state = dominant_eigenvector(*out.post_mode_density);

    std::tie(out.ell, out.delta) =
        ell_delta_from_theta(config.n, effective_theta(alpha, config.beta));
    return out;
}

QpeOutcome oneshot_exact(const QpeConfig& config, Complex alpha,
                         bool crosskerr) {
    const int d = config.fourier_order();
    const double loop = conjugate_loop(alpha, config.beta).phase;

    QpeOutcome out;
    out.alpha_applications = 1;
    Eigen::VectorXd p(d);
    if (crosskerr && !config.crosskerr_postselect) {
        // literal cross-Kerr readout: provably uniform
        p.setConstant(1.0 / d);
    } else {
        // amplitude over k after the Fourier step (or the post-selected
        // cross-Kerr equivalent): sum_j e^{i j loop} e^{2 pi i j k / d}
        for (int k = 0; k < d; ++k) {
            Complex acc{0.0, 0.0};
            for (int j = 0; j < d; ++j) {
                acc += std::exp(
                    Complex{0.0, j * (loop + 2.0 * kPi * k / d)});
            }
            p(k) = std::norm(acc) / (static_cast<double>(d) * d);
        }
        const double total = p.sum();
        if (total <= 0.0) throw SimError("degenerate outcome distribution");
        p /= total;
    }
    out.distribution = std::move(p);
    std::tie(out.ell, out.delta) =
        ell_delta_from_theta(config.n, effective_theta(alpha, config.beta));
    return out;
}

}  // namespace

QpeOutcome qpe_oneshot(const QpeConfig& config, Complex alpha,
                       const std::optional<FockVector>& mode_state) {
    config.validate();
    if (config.backend == Backend::ExactAlgebra) {
        return oneshot_exact(config, alpha, /*crosskerr=*/false);
    }
    return oneshot_fock(config, alpha, mode_state, /*crosskerr=*/false);
}

QpeOutcome qpe_crosskerr(const QpeConfig& config, Complex alpha,
                         const std::optional<FockVector>& mode_state) {
    config.validate();
    if (config.backend == Backend::ExactAlgebra) {
        return oneshot_exact(config, alpha, /*crosskerr=*/true);
    }
    return oneshot_fock(config, alpha, mode_state, /*crosskerr=*/true);
}

AttackReport keystroke_attack(PauliLetter letter, const QpeConfig& config) {
    config.validate();
    const Complex alpha = make_pauli(letter).alpha;
    const int d = config.fourier_order();

    auto run = [&](Complex beta) {
        QpeConfig c = config;
        c.beta = beta;
        return config.use_crosskerr ? qpe_crosskerr(c, alpha)
                                    : qpe_oneshot(c, alpha);
    };
    AttackReport report;
    report.true_letter = letter;
    report.run_real = run(Complex{kHalfLattice, 0.0});
    report.run_imag = run(Complex{0.0, kHalfLattice});

    auto recovered_phase = [&](const QpeOutcome& o) {
        int k = 0;
        o.distribution.maxCoeff(&k);
        return 2.0 * kPi * k / d;
    };
    report.inferred_letter = infer_letter(recovered_phase(report.run_real),
                                          recovered_phase(report.run_imag));
    report.leakage_max =
        std::max(report.run_real.leakage_max, report.run_imag.leakage_max);

    if (config.backend == Backend::FockNumeric) {
        const int nmode = config.gkp.cutoff;
        FockVector ref =
            *cached_displacement(alpha, nmode, DisplacementMethod::Analytic) *
            gkp_codeword(config.gkp);
        normalize(ref);
        auto fid = [&](const QpeOutcome& o) {
            const Eigen::MatrixXcd& rho = *o.post_mode_density;
            return std::real(ref.dot(rho * ref)) /
                   std::real(rho.trace());
        };
        report.codeword_fidelity =
            std::min(fid(report.run_real), fid(report.run_imag));
    }
    return report;
}

std::vector<SweepCell> attack_sweep(const std::vector<PauliLetter>& letters,
                                    const std::vector<double>& envelope_deltas,
                                    const std::vector<int>& cutoffs,
                                    const std::vector<int>& n_values,
                                    const QpeConfig& base, int workers) {
    if (letters.empty() || envelope_deltas.empty() || cutoffs.empty() ||
        n_values.empty()) {
        throw BadAssignment("sweep parameter lists must be non-empty");
    }
    std::vector<SweepCell> cells;
    for (PauliLetter letter : letters) {
        for (double delta : envelope_deltas) {
            for (int cutoff : cutoffs) {
                for (int n : n_values) {
                    cells.push_back({letter, delta, cutoff, n, {}, {}});
                }
            }
        }
    }
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = std::min<int>(workers, static_cast<int>(cells.size()));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            SweepCell& cell = cells[i];
            try {
                QpeConfig c = base;
                c.n = cell.n;
                c.gkp.delta = cell.envelope_delta;
                c.gkp.cutoff = cell.cutoff;
                c.gkp.s_max = 0;  // re-derive for the cell's envelope
                cell.report = keystroke_attack(cell.letter, c);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return cells;
}

}  // namespace keylog
