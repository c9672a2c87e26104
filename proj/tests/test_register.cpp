#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "keylog/register.hpp"

using namespace keylog;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
        }
    }
    return out;
}

Eigen::VectorXcd random_factor(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex{g(rng), g(rng)};
    v /= v.norm();
    return v;
}

Eigen::MatrixXcd random_unitary(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = Complex{g(rng), g(rng)};
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
}

}  // namespace

TEST_CASE("subsystem spec guards") {
    CHECK_THROWS_AS((void)SubsystemSpec::qudit(1), DimensionTooSmall);
    CHECK_THROWS_AS((void)SubsystemSpec::mode(0), DimensionTooSmall);
    CHECK(SubsystemSpec::qubit().dim == 2);
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(RegisterState({}, {}), BadAssignment);
    CHECK_THROWS_AS(RegisterState({SubsystemSpec::qubit()}, {}),
                    BadAssignment);
    CHECK_THROWS_AS(RegisterState({SubsystemSpec::qubit()}, {2}),
                    BadAssignment);
    CHECK_THROWS_AS(
        RegisterState({SubsystemSpec::mode(1 << 13), SubsystemSpec::mode(
                           1 << 13)},
                      {0, 0}),
        DimensionGuardExceeded);
}

TEST_CASE("product preparation layout: index 0 is most significant") {
    // |1> (x) |+> over qubit, qutrit-like qudit would order amplitudes as
    // a_{jk} at flat index j * 3 + k
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qudit(3)},
                        {1, EqualSuperposition{}});
    const auto& a = state.amplitudes();
    REQUIRE(a.size() == 6);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(a(k)) < 1e-15);
        CHECK(std::abs(a(3 + k) - Complex{1.0 / std::sqrt(3.0), 0.0}) < 1e-15);
    }
}

TEST_CASE("local and pair application match the Kronecker oracle") {
    std::mt19937_64 rng(777);
    const std::vector<SubsystemSpec> specs = {SubsystemSpec::qubit(),
                                              SubsystemSpec::qudit(3),
                                              SubsystemSpec::mode(4)};
    const auto f0 = random_factor(2, rng);
    const auto f1 = random_factor(3, rng);
    const auto f2 = random_factor(4, rng);
    Eigen::VectorXcd full = kron(kron(f0, f1), f2);

    RegisterState state(specs, {FockVector(f0), FockVector(f1),
                                FockVector(f2)});
    REQUIRE((state.amplitudes() - full).norm() < 1e-14);

    const auto i2 = Eigen::MatrixXcd::Identity(2, 2);
    const auto i3 = Eigen::MatrixXcd::Identity(3, 3);
    const auto i4 = Eigen::MatrixXcd::Identity(4, 4);

    SUBCASE("apply_local on the middle qudit") {
        const auto u = random_unitary(3, rng);
        state.apply_local(u, 1);
        full = kron(kron(i2, u), i4) * full;
        CHECK((state.amplitudes() - full).norm() < 1e-13);
    }
    SUBCASE("apply_pair on non-adjacent subsystems") {
        const auto u = random_unitary(8, rng);  // acts on (qubit, mode)
        state.apply_pair(u, 0, 2);
        // oracle: permute u into the (0, 2) slots of the 2 x 3 x 4 layout
        Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(24, 24);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int a2 = 0; a2 < 2; ++a2)
                        for (int c2 = 0; c2 < 4; ++c2) {
                            big(a * 12 + b * 4 + c, a2 * 12 + b * 4 + c2) =
                                u(a * 4 + c, a2 * 4 + c2);
                        }
        full = big * full;
        CHECK((state.amplitudes() - full).norm() < 1e-13);
    }
    SUBCASE("apply_range over the qudit-mode block") {
        const auto u = random_unitary(12, rng);
        state.apply_range(u, 1, 2);
        full = kron(i2, u) * full;
        CHECK((state.amplitudes() - full).norm() < 1e-13);
    }
    SUBCASE("locality: operating on one subsystem leaves marginals intact") {
        const auto u = random_unitary(3, rng);
        const Eigen::VectorXd m0 = state.marginal(0);
        const Eigen::VectorXd m2 = state.marginal(2);
        state.apply_local(u, 1);
        CHECK((state.marginal(0) - m0).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((state.marginal(2) - m2).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("operator shape errors") {
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qubit()},
                        {0, 0});
    CHECK_THROWS_AS(state.apply_local(Eigen::MatrixXcd::Identity(3, 3), 0),
                    DimensionMismatch);
    CHECK_THROWS_AS(state.apply_local(Eigen::MatrixXcd::Identity(2, 2), 5),
                    DimensionMismatch);
    CHECK_THROWS_AS(state.apply_pair(Eigen::MatrixXcd::Identity(4, 4), 0, 0),
                    DimensionMismatch);
}

TEST_CASE("cnot and Bell pair") {
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qubit()},
                        {0, 0});
    state.apply_local(h, 0);
    state.apply_cnot(0, 1);
    const auto& a = state.amplitudes();
    CHECK(std::abs(a(0) - Complex{1.0 / std::sqrt(2.0), 0.0}) < 1e-14);
    CHECK(std::abs(a(3) - Complex{1.0 / std::sqrt(2.0), 0.0}) < 1e-14);
    CHECK(std::abs(a(1)) < 1e-15);
    CHECK(std::abs(a(2)) < 1e-15);

    RegisterState bad({SubsystemSpec::qubit(), SubsystemSpec::qudit(3)},
                      {0, 0});
    CHECK_THROWS_AS(bad.apply_cnot(0, 1), NotAQubit);
}

TEST_CASE("qft applies the DFT matrix") {
    const int d = 8;
    RegisterState state({SubsystemSpec::qudit(d)}, {3});
    state.apply_qft(0);
    const Eigen::MatrixXcd f = dft_matrix(d);
    for (int k = 0; k < d; ++k) {
        CHECK(std::abs(state.amplitudes()(k) - f(k, 3)) < 1e-14);
    }
    // DFT is unitary
    CHECK((f * f.adjoint() - Eigen::MatrixXcd::Identity(d, d))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("cross-Kerr imprints the product-of-numbers phase") {
    const int d = 4;
    RegisterState state({SubsystemSpec::qudit(d), SubsystemSpec::qudit(d)},
                        {EqualSuperposition{}, EqualSuperposition{}});
    state.apply_cross_kerr(0, 1, d);
    const auto& a = state.amplitudes();
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            const Complex expected =
                std::exp(Complex{0.0, 2.0 * kPi * j * k / d}) * (1.0 / d);
            CHECK(std::abs(a(j * d + k) - expected) < 1e-14);
        }
    }
    RegisterState bad({SubsystemSpec::qubit(), SubsystemSpec::qudit(4)},
                      {0, 0});
    CHECK_THROWS_AS(bad.apply_cross_kerr(0, 1, 4), DimensionMismatch);
}

TEST_CASE("qubit-controlled displacement acts only on the |1> branch") {
    const int nmode = 32;
    const Complex beta{0.4, -0.2};
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::mode(nmode)},
                        {0, 0});
    state.apply_local(h, 0);
    state.apply_qubit_controlled_displacement(0, 1, beta,
                                              DisplacementMethod::Exponential);
    const auto& a = state.amplitudes();
    const FockVector coh = coherent_state(beta, nmode);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(a(0) - Complex{r, 0.0}) < 1e-10);  // |0>|vac> untouched
    for (int m = 0; m < nmode; ++m) {
        CHECK(std::abs(a(nmode + m) - r * coh(m)) < 1e-9);
    }
}

TEST_CASE("number-controlled displacement matches per-branch displacement") {
    const int d = 4;
    const int nmode = 48;
    const Complex beta{0.25, 0.3};
    RegisterState state({SubsystemSpec::qudit(d), SubsystemSpec::qubit(),
                         SubsystemSpec::mode(nmode)},
                        {EqualSuperposition{}, 1, 0});
    state.apply_number_controlled_displacement(
        0, 1, 2, beta, +1, DisplacementMethod::Exponential);
    const auto& a = state.amplitudes();
    for (int j = 0; j < d; ++j) {
        const FockVector branch =
            *cached_displacement(double(j) * beta, nmode,
                                 DisplacementMethod::Exponential) *
            vacuum_state(nmode);
        for (int m = 0; m < nmode; ++m) {
            // qubit stride: branch j, qubit 1, mode m
            const Complex got = a((j * 2 + 1) * nmode + m);
            CHECK(std::abs(got - branch(m) / 2.0) < 1e-10);
        }
    }
    // with the qubit in |0> nothing happens
    RegisterState off({SubsystemSpec::qudit(d), SubsystemSpec::qubit(),
                       SubsystemSpec::mode(nmode)},
                      {EqualSuperposition{}, 0, 0});
    const Eigen::VectorXcd before = off.amplitudes();
    off.apply_number_controlled_displacement(0, 1, 2, beta, +1,
                                             DisplacementMethod::Exponential);
    CHECK((off.amplitudes() - before).norm() < 1e-14);
    // amplified displacement guard
    CHECK_THROWS_AS(state.apply_number_controlled_displacement(
                        0, 1, 2, {2.0, 0.0}, +1,
                        DisplacementMethod::Exponential),
                    TruncationRisk);
}

TEST_CASE("marginals, measurement and collapse") {
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qubit()},
                        {EqualSuperposition{}, 1});
    const Eigen::VectorXd m0 = state.marginal(0);
    CHECK(m0(0) == doctest::Approx(0.5));
    CHECK(m0(1) == doctest::Approx(0.5));
    const Eigen::VectorXd m1 = state.marginal(1);
    CHECK(m1(1) == doctest::Approx(1.0));

    const Eigen::VectorXd joint = state.marginal_range(0, 1);
    CHECK(joint(1) == doctest::Approx(0.5));
    CHECK(joint(3) == doctest::Approx(0.5));

    const auto exact = state.measure_exact(1);
    CHECK(exact.outcome == 1);
    CHECK(exact.distribution(1) == doctest::Approx(1.0));

    const auto collapsed = state.collapse(0, 1);
    CHECK(collapsed.marginal(0)(1) == doctest::Approx(1.0));
    CHECK(collapsed.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)state.collapse(0, 2), BadAssignment);
}

TEST_CASE("sampled measurement is deterministic per seed") {
    RegisterState state({SubsystemSpec::qudit(8)}, {EqualSuperposition{}});
    const auto r1 = state.measure_sample(0, 42);
    const auto r2 = state.measure_sample(0, 42);
    CHECK(r1.outcome == r2.outcome);
    // a different seed is allowed to differ; the distribution never does
    const auto r3 = state.measure_sample(0, 43);
    CHECK((r1.distribution - r3.distribution).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r1.collapsed->marginal(0)(r1.outcome) == doctest::Approx(1.0));
}

TEST_CASE("reduced density matrix of an entangled pair") {
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    RegisterState state({SubsystemSpec::qubit(), SubsystemSpec::qubit()},
                        {0, 0});
    state.apply_local(h, 0);
    state.apply_cnot(0, 1);
    const Eigen::MatrixXcd rho = state.reduced_density(1);
    CHECK(std::abs(rho(0, 0) - Complex{0.5, 0.0}) < 1e-14);
    CHECK(std::abs(rho(1, 1) - Complex{0.5, 0.0}) < 1e-14);
    CHECK(std::abs(rho(0, 1)) < 1e-14);
    CHECK(std::abs(rho.trace() - Complex{1.0, 0.0}) < 1e-14);
    // purity 1/2 for a maximally entangled marginal
    CHECK(std::abs((rho * rho).trace() - Complex{0.5, 0.0}) < 1e-14);
}
