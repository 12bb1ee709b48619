// oracle.hpp — Brute-force finite-N reference dynamics
//
// Integrates the exact single-exciton amplitude equations
//   d/dt c0 = i h c0 - i sum_k (A_k/2) e^{+i theta_k t} c_k
//   d/dt c_k =        - i (A_k/2) e^{-i theta_k t} c0
// with theta_k = omega0 - omega_k + A_k/2 and h = sum_k A_k/2, starting from
// the fully polarized bath (c0 = 1, c_k = 0). An active pulse field adds
// +i (r/2) c0 and -i (r/2) c_k, which makes the reduced kernel acquire the
// phase e^{-i [R(t)-R(s)]}; the propagator in that kernel frame is
// c0(t) e^{-i h t} e^{-i R(t)/2}.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/control.hpp"
#include "spinbath/grid.hpp"
#include "spinbath/propagator.hpp"
#include "spinbath/rng.hpp"

namespace spinbath {

struct BathRealization {
    std::vector<double> couplings;   // A_k
    std::vector<double> frequencies; // omega_k

    std::size_t size() const { return couplings.size(); }

    void validate() const {
        if (couplings.empty() || couplings.size() != frequencies.size())
            throw std::invalid_argument(
                "BathRealization: coupling and frequency lists must be equal length >= 1");
        for (double a : couplings)
            if (!std::isfinite(a))
                throw std::invalid_argument("BathRealization: non-finite coupling");
        for (double w : frequencies)
            if (!std::isfinite(w))
                throw std::invalid_argument("BathRealization: non-finite frequency");
    }
};

// Degenerate bath of the box model: A_k = Acal/N, omega_k = omega.
inline BathRealization box_bath(double Acal, std::size_t N, double omega) {
    if (N < 1) throw std::invalid_argument("box_bath: N must be >= 1");
    BathRealization bath;
    bath.couplings.assign(N, Acal / static_cast<double>(N));
    bath.frequencies.assign(N, omega);
    return bath;
}

// A_k ~ Gaussian(mu_a, nu_a^2), omega_k ~ Gaussian(w_mean, w_spread^2),
// i.i.d. and deterministic from the seed (couplings drawn first).
inline BathRealization sample_bath(std::size_t N, double mu_a, double nu_a, double w_mean,
                                   double w_spread, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("sample_bath: N must be >= 1");
    if (!(nu_a >= 0.0) || !(w_spread >= 0.0))
        throw std::invalid_argument("sample_bath: spreads must be >= 0");
    GaussianSampler gauss(seed);
    BathRealization bath;
    bath.couplings.resize(N);
    bath.frequencies.resize(N);
    for (std::size_t k = 0; k < N; ++k) bath.couplings[k] = mu_a + nu_a * gauss.next();
    for (std::size_t k = 0; k < N; ++k) bath.frequencies[k] = w_mean + w_spread * gauss.next();
    return bath;
}

inline double overhauser_shift(const BathRealization& bath) {
    bath.validate();
    double sum = 0.0;
    for (double a : bath.couplings) sum += a;
    return 0.5 * sum;
}

struct AmplitudeTrajectory {
    TimeGrid grid;
    std::vector<Complex> c0;          // central-spin amplitude
    std::vector<Complex> dc0;         // d/dt c0 from the RHS at each node
    std::vector<double> norm;         // |c0|^2 + sum_k |c_k|^2
    double h = 0.0;
    PulseSequence pulses = PulseSequence::off();
    std::vector<std::vector<Complex>> modes; // c_k series per mode if stored

    // Reported propagator G~(t) = c0(t) e^{-i h t} and its derivative.
    PropagatorSeries to_series() const {
        PropagatorSeries s;
        s.grid = grid;
        s.h = h;
        s.g_tilde.resize(c0.size());
        s.dg_tilde.resize(c0.size());
        for (std::size_t k = 0; k < c0.size(); ++k) {
            const Complex rot = std::polar(1.0, -h * grid.node(k));
            s.g_tilde[k] = c0[k] * rot;
            s.dg_tilde[k] = (dc0[k] - Complex(0.0, h) * c0[k]) * rot;
        }
        return s;
    }

    // Propagator in the kernel frame of the controlled Volterra equation:
    // the local pulse phase e^{-i R(t)/2} is removed in addition to the
    // Overhauser rotation. Identical to to_series() when pulses are off.
    PropagatorSeries kernel_frame_series() const {
        if (!pulses.active()) return to_series();
        PropagatorSeries s;
        s.grid = grid;
        s.h = h;
        s.g_tilde.resize(c0.size());
        s.dg_tilde.resize(c0.size());
        for (std::size_t k = 0; k < c0.size(); ++k) {
            const double t = grid.node(k);
            const double r = pulse_amplitude(pulses, t);
            const Complex rot = std::polar(1.0, -h * t - 0.5 * phase_integral(pulses, t));
            s.g_tilde[k] = c0[k] * rot;
            s.dg_tilde[k] = (dc0[k] - Complex(0.0, h + 0.5 * r) * c0[k]) * rot;
        }
        return s;
    }
};

namespace detail {

struct AmplitudeRhs {
    const std::vector<double>& couplings;
    std::vector<double> theta; // omega0 - omega_k + A_k/2
    double h;

    AmplitudeRhs(const BathRealization& bath, double omega0)
        : couplings(bath.couplings), h(0.0) {
        theta.resize(bath.size());
        for (std::size_t k = 0; k < bath.size(); ++k) {
            theta[k] = omega0 - bath.frequencies[k] + 0.5 * bath.couplings[k];
            h += 0.5 * bath.couplings[k];
        }
    }

    // r is passed in rather than sampled at t: within one RK4 step the pulse
    // field is treated as constant, so stages at a window edge do not mix the
    // duty and dark values (r jumps exactly at grid nodes on aligned grids).
    void operator()(double t, double r, const std::vector<Complex>& y,
                    std::vector<Complex>& dy) const {
        const Complex i_unit(0.0, 1.0);
        Complex sum(0.0);
        const Complex c0 = y[0];
        for (std::size_t k = 0; k < couplings.size(); ++k) {
            const Complex phase = std::polar(1.0, theta[k] * t);
            sum += 0.5 * couplings[k] * phase * y[k + 1];
            dy[k + 1] = -i_unit * (0.5 * r * y[k + 1] + 0.5 * couplings[k] * std::conj(phase) * c0);
        }
        dy[0] = i_unit * ((h + 0.5 * r) * c0 - sum);
    }
};

} // namespace detail

// RK4 integration of the amplitude equations. Throws if the grid is too
// coarse for the fastest phase (dt * max|phase rate| must stay below 0.1)
// or if the single-exciton norm drifts beyond 1e-6.
inline AmplitudeTrajectory evolve_amplitudes(const BathRealization& bath, double omega0,
                                             const TimeGrid& grid,
                                             const PulseSequence& pulses = PulseSequence::off(),
                                             bool store_modes = false) {
    bath.validate();
    grid.validate();
    pulses.validate();
    if (!std::isfinite(omega0))
        throw std::invalid_argument("evolve_amplitudes: omega0 must be finite");

    detail::AmplitudeRhs rhs(bath, omega0);
    double max_rate = std::abs(rhs.h);
    for (double th : rhs.theta) max_rate = std::max(max_rate, std::abs(th));
    if (pulses.active()) max_rate = std::max(max_rate, 0.5 * pulses.psi / pulses.kappa);
    const double dt = grid.dt();
    if (dt * max_rate >= 0.1)
        throw std::invalid_argument(
            "evolve_amplitudes: grid too coarse, dt * max|phase rate| = " +
            std::to_string(dt * max_rate) + " >= 0.1");

    const std::size_t dim = bath.size() + 1;
    std::vector<Complex> y(dim, Complex(0.0)), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    y[0] = Complex(1.0);

    AmplitudeTrajectory traj;
    traj.grid = grid;
    traj.h = rhs.h;
    traj.pulses = pulses;
    traj.c0.resize(grid.n_nodes());
    traj.dc0.resize(grid.n_nodes());
    traj.norm.resize(grid.n_nodes());
    if (store_modes) traj.modes.assign(bath.size(), std::vector<Complex>(grid.n_nodes()));

    auto record = [&](std::size_t node) {
        traj.c0[node] = y[0];
        double total = 0.0;
        for (const Complex& v : y) total += std::norm(v);
        traj.norm[node] = total;
        if (store_modes)
            for (std::size_t k = 0; k < bath.size(); ++k) traj.modes[k][node] = y[k + 1];
        if (std::abs(total - 1.0) > 1e-6)
            throw std::runtime_error("evolve_amplitudes: norm drift " +
                                     std::to_string(std::abs(total - 1.0)) +
                                     " at node " + std::to_string(node) +
                                     "; reduce the time step");
    };
    record(0);

    const bool pulsed = pulses.active();
    for (std::size_t step = 0; step < grid.n_steps; ++step) {
        const double t = grid.node(step);
        // Field value on the interior of the step; the node value is used for
        // the stored derivative so dc0 reflects the window starting at t.
        const double r_node = pulsed ? pulse_amplitude(pulses, t) : 0.0;
        const double r_step = pulsed ? pulse_amplitude(pulses, t + 0.5 * dt) : 0.0;
        rhs(t, r_node, y, k1);
        traj.dc0[step] = k1[0];
        if (r_node != r_step) rhs(t, r_step, y, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(t + 0.5 * dt, r_step, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(t + 0.5 * dt, r_step, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(t + dt, r_step, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        record(step + 1);
    }
    const double r_last = pulsed ? pulse_amplitude(pulses, grid.t_max) : 0.0;
    rhs(grid.t_max, r_last, y, k1);
    traj.dc0[grid.n_steps] = k1[0];
    return traj;
}

struct CompareReport {
    double max_abs = 0.0;
    double rms = 0.0;
};

// Max and RMS deviation between the oracle propagator (kernel frame) and a
// reduced-solver series on the same grid.
inline CompareReport compare_reduced(const AmplitudeTrajectory& traj,
                                     const PropagatorSeries& series) {
    if (!(traj.grid == series.grid))
        throw std::invalid_argument("compare_reduced: grids differ");
    const PropagatorSeries oracle = traj.kernel_frame_series();
    CompareReport report;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < oracle.g_tilde.size(); ++k) {
        const double diff = std::abs(oracle.g_tilde[k] - series.g_tilde[k]);
        report.max_abs = std::max(report.max_abs, diff);
        sum_sq += diff * diff;
    }
    report.rms = std::sqrt(sum_sq / static_cast<double>(oracle.g_tilde.size()));
    return report;
}

} // namespace spinbath
