#include "keylog/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace keylog {

ModeOperator ladder_lower(int dim) {
    if (dim < 2) throw DimensionTooSmall("ladder operator needs N >= 2");
    ModeOperator a = ModeOperator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

std::pair<ModeOperator, ModeOperator> quadratures(int dim) {
    ModeOperator a = ladder_lower(dim);
    ModeOperator ad = a.adjoint();
    const Complex i{0.0, 1.0};
    ModeOperator q = (a + ad) / std::sqrt(2.0);
    ModeOperator p = (a - ad) / (i * std::sqrt(2.0));
    return {q, p};
}

ModeOperator number_operator(int dim) {
    if (dim < 1) throw DimensionTooSmall("number operator needs N >= 1");
    ModeOperator n = ModeOperator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

namespace {

ModeOperator displacement_exponential(Complex alpha, int dim) {
    ModeOperator a = ladder_lower(dim);
    ModeOperator gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return gen.exp();
}

// <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^{-x/2} L_n^{(m-n)}(x)  (m >= n)
// with x = |alpha|^2; entries for m < n follow from D(alpha)^dag = D(-alpha).
// The Laguerre recurrence runs per diagonal k = m - n; the factorial and
// power prefactor is assembled in log space to avoid overflow.
ModeOperator displacement_analytic(Complex alpha, int dim) {
    const double x = std::norm(alpha);
    ModeOperator d(dim, dim);
    if (x == 0.0) return ModeOperator::Identity(dim, dim);
    const double log_abs_alpha = std::log(std::abs(alpha));
    const Complex unit = alpha / std::abs(alpha);
    for (int k = 0; k < dim; ++k) {
        const Complex unit_pow = std::pow(unit, k);
        const Complex mirror_pow = std::pow(-std::conj(unit), k);
        double lprev = 0.0;  // L_{n-1}^{(k)}(x)
        double lcur = 1.0;   // L_0^{(k)}(x)
        for (int n = 0; n + k < dim; ++n) {
            if (n > 0) {
                double lnext =
                    (n == 1)
                        ? 1.0 + k - x
                        : ((2.0 * (n - 1) + k + 1.0 - x) * lcur -
                           (n - 1.0 + k) * lprev) /
                              n;
                lprev = lcur;
                lcur = lnext;
            }
            const int m = n + k;
            const double logpref =
                0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) +
                k * log_abs_alpha - x / 2.0;
            const double pref = std::exp(logpref) * lcur;
            d(m, n) = pref * unit_pow;
            // lower triangle: <n|D|m> = sqrt(n!/m!) (-conj(alpha))^k e^{-x/2} L_n^{(k)}(x)
            d(n, m) = pref * mirror_pow;
        }
    }
    return d;
}

}  // namespace

ModeOperator displacement_matrix(Complex alpha, int dim,
                                 DisplacementMethod method) {
    if (dim < 8) throw DimensionTooSmall("displacement matrix needs N >= 8");
    if (std::norm(alpha) > dim / 4.0) {
        throw TruncationRisk("|alpha|^2 = " + std::to_string(std::norm(alpha)) +
                             " exceeds N/4 at N = " + std::to_string(dim));
    }
    switch (method) {
        case DisplacementMethod::Exponential:
            return displacement_exponential(alpha, dim);
        case DisplacementMethod::Analytic:
            return displacement_analytic(alpha, dim);
    }
    throw SimError("invalid displacement method");
}

std::shared_ptr<const ModeOperator> cached_displacement(
    Complex alpha, int dim, DisplacementMethod method) {
    using Key = std::tuple<double, double, int, int>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const ModeOperator>> table;
    Key key{alpha.real(), alpha.imag(), dim, static_cast<int>(method)};
    {
        std::scoped_lock lock(mu);
        auto it = table.find(key);
        if (it != table.end()) return it->second;
    }
    auto op = std::make_shared<const ModeOperator>(
        displacement_matrix(alpha, dim, method));
    std::scoped_lock lock(mu);
    auto [it, inserted] = table.emplace(key, op);
    return it->second;
}

FockVector vacuum_state(int dim) { return number_state(0, dim); }

FockVector number_state(int n, int dim) {
    if (n < 0 || n >= dim) throw DimensionMismatch("number state outside cutoff");
    FockVector v = FockVector::Zero(dim);
    v(n) = 1.0;
    return v;
}

FockVector coherent_state(Complex alpha, int dim) {
    if (alpha == Complex{0.0, 0.0}) return vacuum_state(dim);
    FockVector v(dim);
    const double x = std::norm(alpha);
    const Complex unit = alpha / std::abs(alpha);
    for (int n = 0; n < dim; ++n) {
        // e^{-x/2} alpha^n / sqrt(n!), assembled in log space
        double logmag =
            -x / 2.0 + 0.5 * (n * std::log(x) - std::lgamma(n + 1.0));
        v(n) = std::exp(logmag) * std::pow(unit, n);
    }
    normalize(v);
    return v;
}

void normalize(FockVector& v) {
    double n = v.norm();
    if (n <= 0.0 || !std::isfinite(n)) {
        throw SimError("cannot normalize zero or non-finite vector");
    }
    v /= n;
}

double leakage(const FockVector& v) {
    int dim = static_cast<int>(v.size());
    int top = (dim + 9) / 10;
    return v.tail(top).squaredNorm();
}

double fidelity(const FockVector& v1, const FockVector& v2) {
    if (v1.size() != v2.size()) {
        throw DimensionMismatch("fidelity: dimension mismatch");
    }
    return std::norm(v1.dot(v2));
}

Complex expectation(const ModeOperator& op, const FockVector& v) {
    if (op.rows() != v.size() || op.cols() != v.size()) {
        throw DimensionMismatch("expectation: dimension mismatch");
    }
    return v.dot(op * v);
}

int default_s_max(double delta) {
    int s = 0;
    while (std::exp(-std::numbers::pi * delta * delta *
                    std::pow(2.0 * s + 2.0, 2) / 2.0) >= 1e-12) {
        ++s;
        if (s > 1000) throw SimError("s_max search did not converge");
    }
    return s;
}

void GkpParams::validate() const {
    if (mu != 0 && mu != 1) throw SimError("GKP logical value must be 0 or 1");
    if (!(delta > 0.0)) throw SimError("GKP envelope delta must be positive");
    if (cutoff < 8) throw DimensionTooSmall("GKP cutoff must be >= 8");
    if (s_max < 0) throw SimError("GKP s_max must be non-negative");
}

FockVector squeezed_position_state(double q0, double delta, int dim) {
    if (dim < 2) throw DimensionTooSmall("wavepacket needs N >= 2");
    // (1+d^2) sqrt(n+1) c_{n+1} = sqrt(2) q0 c_n - (1-d^2) sqrt(n) c_{n-1}
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    const double d2 = delta * delta;
    c(0) = 1.0;
    for (int n = 0; n + 1 < dim; ++n) {
        double prev = (n > 0) ? c(n - 1) : 0.0;
        c(n + 1) = (std::sqrt(2.0) * q0 * c(n) -
                    (1.0 - d2) * std::sqrt(static_cast<double>(n)) * prev) /
                   ((1.0 + d2) * std::sqrt(n + 1.0));
    }
    FockVector v = c.cast<Complex>();
    normalize(v);
    return v;
}

FockVector gkp_codeword(const GkpParams& params) {
    params.validate();
    int s_max = params.s_max > 0 ? params.s_max : default_s_max(params.delta);
    const double root_pi = std::sqrt(std::numbers::pi);
    FockVector v = FockVector::Zero(params.cutoff);
    for (int s = -s_max; s <= s_max; ++s) {
        double qs = (2.0 * s + params.mu) * root_pi;
        double w = std::exp(-params.delta * params.delta * qs * qs / 2.0);
        v += w * squeezed_position_state(qs, params.delta, params.cutoff);
    }
    normalize(v);
    if (leakage(v) > 1e-6) {
        throw TruncationRisk("GKP codeword leakage " +
                             std::to_string(leakage(v)) +
                             " exceeds 1e-6; raise the cutoff");
    }
    return v;
}

}  // namespace keylog
