// tcl.hpp — Exact TCL master-equation coefficients S(t), gamma(t) and qubit evolution
//
// The master equation is
//   d/dt rho = -(i/2) S(t) [P1, rho] + gamma(t) (sm rho sp - 1/2 {P1, rho}),
// with P1 = |1><1|, S(t) = -2 Im(dG/G) and gamma(t) = -2 Re(dG/G). The exact
// dynamical map rho11 -> |G|^2 rho11, rho10 -> G rho10 is the globally
// defined evolution; the generator is masked where |G~| vanishes.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spinbath/grid.hpp"
#include "spinbath/kernels.hpp"
#include "spinbath/propagator.hpp"

namespace spinbath {

struct TclCoefficients {
    TimeGrid grid;
    std::vector<double> shift;        // lab-frame S(t) = -2 Im(dG~/G~) - 2h
    std::vector<double> rate;         // gamma(t) = -2 Re(dG~/G~)
    std::vector<unsigned char> valid; // 0 where |G~| < 1e-8 (generator diverges)
    double h = 0.0;

    // Rotating-frame shift -2 Im(dG~/G~), without the Overhauser term.
    double rotating_shift(std::size_t k) const { return shift[k] + 2.0 * h; }
};

inline TclCoefficients coefficients(const PropagatorSeries& series) {
    TclCoefficients c;
    c.grid = series.grid;
    c.h = series.h;
    const std::size_t n = series.g_tilde.size();
    c.shift.assign(n, std::numeric_limits<double>::quiet_NaN());
    c.rate.assign(n, std::numeric_limits<double>::quiet_NaN());
    c.valid.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(series.g_tilde[k]) < 1e-8) continue;
        const Complex ratio = series.dg_tilde[k] / series.g_tilde[k];
        c.rate[k] = -2.0 * ratio.real();
        c.shift[k] = -2.0 * ratio.imag() - 2.0 * series.h;
        c.valid[k] = 1;
    }
    return c;
}

// Closed-form decay rate for the exponential kernel,
//   gamma(t) = 2 Gamma sinh(a t) / (chi cosh(a t) + sinh(a t)),  a = gamma0 chi / 2,
// evaluated through E = e^{-2 a t} so large arguments cannot overflow.
// Returns nullopt at poles of the expression. At gamma0 = 2 Gamma the limit
// 2 Gamma^2 t / (1 + Gamma t) is used.
inline std::optional<double> analytic_gamma_exponential(double Gamma, double gamma0,
                                                        double t) {
    if (!(Gamma > 0.0) || !(gamma0 > 0.0))
        throw std::invalid_argument("analytic_gamma_exponential: Gamma and gamma0 must be > 0");
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("analytic_gamma_exponential: t must be finite and >= 0");
    const Complex chi = exponential_chi(Gamma, gamma0);
    if (std::abs(chi) < 1e-8)
        return 2.0 * Gamma * Gamma * t / (1.0 + Gamma * t);
    const Complex a = 0.5 * gamma0 * chi;
    const Complex decay = std::exp(-2.0 * a * t); // |.| <= 1 since Re(a) >= 0
    const Complex numer = 2.0 * Gamma * (1.0 - decay);
    const Complex denom = chi * (1.0 + decay) + (1.0 - decay);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const Complex value = numer / denom;
    if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real())))
        return std::nullopt;
    return value.real();
}

// Qubit density matrix in the {|1>, |0>} basis, row-major.
struct QubitState {
    std::array<Complex, 4> m{Complex(0.0), Complex(0.0), Complex(0.0), Complex(1.0)};

    Complex rho11() const { return m[0]; }
    Complex rho10() const { return m[1]; }
    Complex rho01() const { return m[2]; }
    Complex rho00() const { return m[3]; }

    static QubitState excited() { return from_elements(1.0, Complex(0.0)); }

    static QubitState from_elements(double rho11, Complex rho10) {
        QubitState s;
        s.m = {Complex(rho11), rho10, std::conj(rho10), Complex(1.0 - rho11)};
        s.validate();
        return s;
    }

    double trace() const { return m[0].real() + m[3].real(); }

    double hermiticity_error() const {
        double err = std::abs(m[1] - std::conj(m[2]));
        err = std::max(err, std::abs(Complex(m[0].imag(), 0.0)));
        err = std::max(err, std::abs(Complex(m[3].imag(), 0.0)));
        return err;
    }

    double min_eigenvalue() const {
        const double a = m[0].real();
        const double d = m[3].real();
        const double disc = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(m[1]));
        return 0.5 * (a + d - disc);
    }

    void validate() const {
        for (const Complex& v : m)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("QubitState: non-finite entry");
        if (hermiticity_error() > 1e-12)
            throw std::invalid_argument("QubitState: not Hermitian within 1e-12");
        if (std::abs(trace() - 1.0) > 1e-12)
            throw std::invalid_argument("QubitState: trace differs from 1 beyond 1e-12");
        if (min_eigenvalue() < -1e-9)
            throw std::invalid_argument("QubitState: negative eigenvalue beyond -1e-9");
    }
};

// Exact dynamical map: rho11(t) = |G|^2 rho11(0), rho10(t) = G rho10(0),
// with G the lab-frame propagator.
inline std::vector<QubitState> evolve_exact(const QubitState& rho0,
                                            const PropagatorSeries& series) {
    rho0.validate();
    const std::vector<Complex> g = to_lab_frame(series);
    std::vector<QubitState> states(g.size());
    const double p0 = rho0.rho11().real();
    const Complex c0 = rho0.rho10();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double p = std::norm(g[k]) * p0;
        const Complex c = g[k] * c0;
        states[k].m = {Complex(p), c, std::conj(c), Complex(1.0 - p)};
    }
    return states;
}

struct TclEvolution {
    std::vector<QubitState> states; // one per node up to the first masked node
    bool complete = true;           // false when the coefficients were masked
};

namespace detail {

// Value at t_{k+1/2} from a cubic through four neighbouring samples, never
// reading past v[n-1] (entries beyond n may be masked).
inline double half_sample(const std::vector<double>& v, std::size_t k, std::size_t n) {
    if (n < 4) return 0.5 * (v[k] + v[k + 1]);
    if (k == 0) return (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0;
    if (k + 2 >= n)
        return (v[n - 4] - 5.0 * v[n - 3] + 15.0 * v[n - 2] + 5.0 * v[n - 1]) / 16.0;
    return (-v[k - 1] + 9.0 * v[k] + 9.0 * v[k + 1] - v[k + 2]) / 16.0;
}

// Right-hand side of the TCL equation for given S, gamma.
inline std::array<Complex, 4> tcl_rhs(const std::array<Complex, 4>& r, double S,
                                      double gamma) {
    const Complex coherence_rate = Complex(-0.5 * gamma, -0.5 * S);
    return {
        -gamma * r[0],
        coherence_rate * r[1],
        std::conj(coherence_rate) * r[2],
        gamma * r[0],
    };
}

} // namespace detail

// Direct RK4 integration of the TCL equation on the coefficient grid.
// Stops at the first masked node; `complete` is false if truncated.
inline TclEvolution evolve_tcl_direct(const QubitState& rho0, const TclCoefficients& coeffs,
                                      const TimeGrid& grid) {
    rho0.validate();
    if (!(coeffs.grid == grid))
        throw std::invalid_argument("evolve_tcl_direct: grid mismatch");

    std::size_t n_valid = 0;
    while (n_valid < coeffs.valid.size() && coeffs.valid[n_valid]) ++n_valid;

    TclEvolution result;
    result.complete = (n_valid == coeffs.valid.size());
    if (n_valid == 0) {
        result.states = {rho0};
        result.complete = false;
        return result;
    }

    result.states.resize(n_valid);
    result.states[0] = rho0;
    const double dt = grid.dt();
    std::array<Complex, 4> r = rho0.m;
    for (std::size_t k = 0; k + 1 < n_valid; ++k) {
        const double s0 = coeffs.shift[k], g0 = coeffs.rate[k];
        const double s1 = detail::half_sample(coeffs.shift, k, n_valid);
        const double g1 = detail::half_sample(coeffs.rate, k, n_valid);
        const double s2 = coeffs.shift[k + 1], g2 = coeffs.rate[k + 1];

        const auto k1 = detail::tcl_rhs(r, s0, g0);
        std::array<Complex, 4> tmp;
        for (int i = 0; i < 4; ++i) tmp[i] = r[i] + 0.5 * dt * k1[i];
        const auto k2 = detail::tcl_rhs(tmp, s1, g1);
        for (int i = 0; i < 4; ++i) tmp[i] = r[i] + 0.5 * dt * k2[i];
        const auto k3 = detail::tcl_rhs(tmp, s1, g1);
        for (int i = 0; i < 4; ++i) tmp[i] = r[i] + dt * k3[i];
        const auto k4 = detail::tcl_rhs(tmp, s2, g2);
        for (int i = 0; i < 4; ++i)
            r[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        result.states[k + 1].m = r;
    }
    return result;
}

// F = sqrt(<psi0| rho |psi0>) for a pure reference state with amplitudes
// (amp_excited, amp_ground) on {|1>, |0>}.
inline double state_fidelity(Complex amp_excited, Complex amp_ground,
                             const QubitState& rho) {
    const double norm2 = std::norm(amp_excited) + std::norm(amp_ground);
    if (std::abs(norm2 - 1.0) > 1e-12)
        throw std::invalid_argument("state_fidelity: psi0 must be normalized to 1e-12");
    const Complex expect = std::conj(amp_excited) * rho.rho11() * amp_excited +
                           std::conj(amp_excited) * rho.rho10() * amp_ground +
                           std::conj(amp_ground) * rho.rho01() * amp_excited +
                           std::conj(amp_ground) * rho.rho00() * amp_ground;
    double value = expect.real();
    if (value < 0.0 && value > -1e-12) value = 0.0;
    return std::sqrt(value);
}

} // namespace spinbath
