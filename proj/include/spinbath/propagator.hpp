// propagator.hpp — Memory-kernel propagator G~(t): Volterra solver and closed forms
//
// Solves d/dt G~(t) = -int_0^t ds g(t,s) G~(s), G~(0) = 1, on a uniform grid,
// and provides the exponential- and box-kernel closed-form solutions.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/control.hpp"
#include "spinbath/grid.hpp"
#include "spinbath/kernels.hpp"

namespace spinbath {

struct PropagatorSeries {
    TimeGrid grid;
    std::vector<Complex> g_tilde;  // G~(t_k), G~(0) = 1
    std::vector<Complex> dg_tilde; // d/dt G~(t_k), stored from the solver RHS
    double h = 0.0;                // Overhauser shift (0 when unmodeled)
};

// F(t_k) = |G~(t_k)|.
inline std::vector<double> fidelity(const PropagatorSeries& series) {
    std::vector<double> f(series.g_tilde.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::abs(series.g_tilde[k]);
    return f;
}

// Lab-frame propagator G(t_k) = G~(t_k) exp(i h t_k).
inline std::vector<Complex> to_lab_frame(const PropagatorSeries& series) {
    if (!std::isfinite(series.h))
        throw std::invalid_argument("to_lab_frame: h must be finite");
    std::vector<Complex> g(series.g_tilde.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = series.g_tilde[k] * std::polar(1.0, series.h * series.grid.node(k));
    return g;
}

// Second-order predictor-corrector march with trapezoidal history quadrature.
// The stationary kernel is tabulated once on the grid; an active pulse
// sequence enters through per-node phase factors exp(i R(t_j)), so the
// history sum keeps its convolution structure.
inline PropagatorSeries solve_volterra(const TwoTimeKernel& kernel, const TimeGrid& grid) {
    grid.validate();
    validate_kernel(kernel.base);
    const std::size_t n = grid.n_steps;
    const double dt = grid.dt();

    // Kernel table f~(m*dt), split into real/imag arrays for the hot loop.
    std::vector<double> fr(n + 1), fi(n + 1);
    for (std::size_t m = 0; m <= n; ++m) {
        const Complex f = eval_kernel(kernel.base, static_cast<double>(m) * dt);
        fr[m] = f.real();
        fi[m] = f.imag();
    }

    const bool controlled = kernel.pulses.active();
    std::vector<double> pr, pi; // exp(+i R(t_j))
    if (controlled) {
        pr.resize(n + 1);
        pi.resize(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            const double phase = phase_integral(kernel.pulses, grid.node(j));
            pr[j] = std::cos(phase);
            pi[j] = std::sin(phase);
        }
    }

    PropagatorSeries series;
    series.grid = grid;
    series.h = overhauser_shift(kernel.base);
    series.g_tilde.assign(n + 1, Complex(0.0));
    series.dg_tilde.assign(n + 1, Complex(0.0));
    series.g_tilde[0] = Complex(1.0);
    series.dg_tilde[0] = Complex(0.0); // empty history integral at t = 0

    // z_j = exp(i R(t_j)) G~(t_j); equals G~(t_j) when uncontrolled.
    std::vector<double> zr(n + 1, 0.0), zi(n + 1, 0.0);
    zr[0] = 1.0;

    const double f0r = fr[0], f0i = fi[0];
    for (std::size_t k = 0; k < n; ++k) {
        const Complex yk = series.g_tilde[k];
        const Complex dk = series.dg_tilde[k];

        // Trapezoidal history over nodes 0..k (weights 1/2, 1, ..., 1).
        double sr = 0.5 * (fr[k + 1] * zr[0] - fi[k + 1] * zi[0]);
        double si = 0.5 * (fr[k + 1] * zi[0] + fi[k + 1] * zr[0]);
        for (std::size_t j = 1; j <= k; ++j) {
            const std::size_t m = k + 1 - j;
            sr += fr[m] * zr[j] - fi[m] * zi[j];
            si += fr[m] * zi[j] + fi[m] * zr[j];
        }

        Complex phase_conj(1.0, 0.0);
        if (controlled) phase_conj = Complex(pr[k + 1], -pi[k + 1]);

        auto rhs_at_next = [&](const Complex& y_next) {
            double znr, zni;
            if (controlled) {
                znr = pr[k + 1] * y_next.real() - pi[k + 1] * y_next.imag();
                zni = pr[k + 1] * y_next.imag() + pi[k + 1] * y_next.real();
            } else {
                znr = y_next.real();
                zni = y_next.imag();
            }
            const double ir = sr + 0.5 * (f0r * znr - f0i * zni);
            const double ii = si + 0.5 * (f0r * zni + f0i * znr);
            return -dt * phase_conj * Complex(ir, ii);
        };

        const Complex predicted = yk + dt * dk;
        const Complex d_pred = rhs_at_next(predicted);
        const Complex y_next = yk + 0.5 * dt * (dk + d_pred);
        const Complex d_next = rhs_at_next(y_next);

        if (!std::isfinite(y_next.real()) || !std::isfinite(y_next.imag()) ||
            !std::isfinite(d_next.real()) || !std::isfinite(d_next.imag()))
            throw std::runtime_error("solve_volterra: non-finite value at node " +
                                     std::to_string(k + 1) + " (t = " +
                                     std::to_string(grid.node(k + 1)) + ")");
        if (std::abs(y_next) > 1.0 + 1e-3)
            throw std::runtime_error("solve_volterra: |G~| exceeded 1 + 1e-3 at node " +
                                     std::to_string(k + 1) + " (t = " +
                                     std::to_string(grid.node(k + 1)) +
                                     "); grid too coarse or kernel unstable");

        series.g_tilde[k + 1] = y_next;
        series.dg_tilde[k + 1] = d_next;
        if (controlled) {
            zr[k + 1] = pr[k + 1] * y_next.real() - pi[k + 1] * y_next.imag();
            zi[k + 1] = pr[k + 1] * y_next.imag() + pi[k + 1] * y_next.real();
        } else {
            zr[k + 1] = y_next.real();
            zi[k + 1] = y_next.imag();
        }
    }
    return series;
}

inline PropagatorSeries solve_volterra(const KernelSpec& kernel, const TimeGrid& grid) {
    return solve_volterra(TwoTimeKernel(kernel), grid);
}

// Closed form for the exponential kernel:
// G~(t) = e^{-gamma0 t/2} [cosh(gamma0 chi t/2) + sinh(gamma0 chi t/2)/chi],
// evaluated as a pair of decaying exponentials so large gamma0*t cannot
// overflow. At the chi -> 0 point the limit G~ = e^{-Gamma t}(1 + Gamma t)
// is used.
inline PropagatorSeries analytic_exponential(double Gamma, double gamma0,
                                             const TimeGrid& grid) {
    grid.validate();
    if (!(Gamma > 0.0) || !(gamma0 > 0.0))
        throw std::invalid_argument("analytic_exponential: Gamma and gamma0 must be > 0");
    const Complex chi = exponential_chi(Gamma, gamma0);

    PropagatorSeries series;
    series.grid = grid;
    series.h = 0.0;
    series.g_tilde.resize(grid.n_nodes());
    series.dg_tilde.resize(grid.n_nodes());

    if (std::abs(chi) < 1e-8) {
        for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
            const double t = grid.node(k);
            const double decay = std::exp(-Gamma * t);
            series.g_tilde[k] = Complex(decay * (1.0 + Gamma * t), 0.0);
            series.dg_tilde[k] = Complex(-Gamma * Gamma * t * decay, 0.0);
        }
        return series;
    }

    const Complex lam_plus = -0.5 * gamma0 * (1.0 - chi);
    const Complex lam_minus = -0.5 * gamma0 * (1.0 + chi);
    const Complex c_plus = 0.5 * (1.0 + 1.0 / chi);
    const Complex c_minus = 0.5 * (1.0 - 1.0 / chi);
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        const double t = grid.node(k);
        const Complex ep = std::exp(lam_plus * t);
        const Complex em = std::exp(lam_minus * t);
        series.g_tilde[k] = c_plus * ep + c_minus * em;
        series.dg_tilde[k] = c_plus * lam_plus * ep + c_minus * lam_minus * em;
    }
    series.g_tilde[0] = Complex(1.0); // exact initial condition
    series.dg_tilde[0] = Complex(0.0);
    return series;
}

// Closed form for the box kernel:
// G~(t) = ((Delta-Omega)/2Delta) e^{i(Omega+Delta)t/2}
//       + ((Delta+Omega)/2Delta) e^{i(Omega-Delta)t/2},
// Delta = sqrt(Omega^2 + Acal^2/N); G~ = 1 when Delta = 0.
inline PropagatorSeries analytic_box(double Omega, double Acal, std::size_t N,
                                     const TimeGrid& grid) {
    grid.validate();
    if (N < 1) throw std::invalid_argument("analytic_box: N must be >= 1");
    const double delta = box_delta(Omega, Acal, N);

    PropagatorSeries series;
    series.grid = grid;
    series.h = 0.5 * Acal;
    series.g_tilde.resize(grid.n_nodes());
    series.dg_tilde.resize(grid.n_nodes());

    if (delta == 0.0) {
        for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
            series.g_tilde[k] = Complex(1.0);
            series.dg_tilde[k] = Complex(0.0);
        }
        return series;
    }

    const double w_plus = 0.5 * (Omega + delta);
    const double w_minus = 0.5 * (Omega - delta);
    const double c_plus = (delta - Omega) / (2.0 * delta);
    const double c_minus = (delta + Omega) / (2.0 * delta);
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        const double t = grid.node(k);
        const Complex ep = std::polar(1.0, w_plus * t);
        const Complex em = std::polar(1.0, w_minus * t);
        series.g_tilde[k] = c_plus * ep + c_minus * em;
        series.dg_tilde[k] =
            Complex(0.0, 1.0) * (c_plus * w_plus * ep + c_minus * w_minus * em);
    }
    series.g_tilde[0] = Complex(1.0); // exact initial condition
    series.dg_tilde[0] = Complex(0.0);
    return series;
}

} // namespace spinbath
