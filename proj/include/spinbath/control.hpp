// control.hpp — Leakage-elimination pulse field r(t) and controlled two-time kernels

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "spinbath/kernels.hpp"
#include "spinbath/rng.hpp"

namespace spinbath {

enum class PulseMode { off, constant, random_rectangular };

// Periodic rectangular pulse train. Within period n the field is on for
// [n*tau, n*tau + kappa) with amplitude u_n * psi/kappa, where u_n = 1 in
// constant mode and u_n ~ U[0,1) in random mode (one draw per period,
// deterministic from the seed); it is zero in the dark time.
struct PulseSequence {
    PulseMode mode = PulseMode::off;
    double tau = 1.0;
    double kappa = 1.0;
    double psi = 0.0;
    std::uint64_t seed = 0;

    static PulseSequence off() { return PulseSequence{}; }
    static PulseSequence constant(double tau, double kappa, double psi) {
        PulseSequence seq{PulseMode::constant, tau, kappa, psi, 0};
        seq.validate();
        return seq;
    }
    static PulseSequence random(double tau, double kappa, double psi, std::uint64_t seed) {
        PulseSequence seq{PulseMode::random_rectangular, tau, kappa, psi, seed};
        seq.validate();
        return seq;
    }

    void validate() const {
        if (mode == PulseMode::off) return;
        if (!std::isfinite(tau) || !std::isfinite(kappa) || !std::isfinite(psi))
            throw std::invalid_argument("PulseSequence: parameters must be finite");
        if (!(kappa > 0.0) || kappa > tau)
            throw std::invalid_argument("PulseSequence: requires 0 < kappa <= tau");
        if (psi < 0.0)
            throw std::invalid_argument("PulseSequence: psi must be >= 0");
    }

    bool active() const { return mode != PulseMode::off && psi > 0.0; }

    // u_n, the dimensionless amplitude factor of period n.
    double period_factor(std::uint64_t n) const {
        switch (mode) {
            case PulseMode::off: return 0.0;
            case PulseMode::constant: return 1.0;
            case PulseMode::random_rectangular: return indexed_uniform01(seed, n);
        }
        return 0.0;
    }
};

namespace detail {

// Splits t >= 0 into a period index and the offset within that period,
// guarding against roundoff at period boundaries.
inline void locate_period(const PulseSequence& seq, double t, std::uint64_t& n, double& offset) {
    double idx = std::floor(t / seq.tau);
    if (idx < 0.0) idx = 0.0;
    n = static_cast<std::uint64_t>(idx);
    offset = t - static_cast<double>(n) * seq.tau;
    if (offset < 0.0) {
        if (n == 0) {
            offset = 0.0;
        } else {
            --n;
            offset = t - static_cast<double>(n) * seq.tau;
        }
    } else if (offset >= seq.tau && t > 0.0) {
        ++n;
        offset = t - static_cast<double>(n) * seq.tau;
        if (offset < 0.0) offset = 0.0;
    }
}

} // namespace detail

// Pulse field r(t): piecewise constant, u_n * psi/kappa in the duty window
// of period n and zero in the dark time.
inline double pulse_amplitude(const PulseSequence& seq, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("pulse_amplitude: t must be finite and >= 0");
    if (seq.mode == PulseMode::off) return 0.0;
    seq.validate();
    std::uint64_t n = 0;
    double offset = 0.0;
    detail::locate_period(seq, t, n, offset);
    if (offset >= seq.kappa) return 0.0;
    return seq.period_factor(n) * seq.psi / seq.kappa;
}

// Accumulated phase R(t) = int_0^t r(s) ds, evaluated in closed form
// (exact for the piecewise-constant field). Nondecreasing in t;
// R(n*tau) = sum_{m<n} u_m * psi.
inline double phase_integral(const PulseSequence& seq, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("phase_integral: t must be finite and >= 0");
    if (seq.mode == PulseMode::off) return 0.0;
    seq.validate();
    std::uint64_t n = 0;
    double offset = 0.0;
    detail::locate_period(seq, t, n, offset);
    double completed = 0.0;
    if (seq.mode == PulseMode::constant) {
        completed = static_cast<double>(n) * seq.psi;
    } else {
        for (std::uint64_t m = 0; m < n; ++m) completed += seq.period_factor(m);
        completed *= seq.psi;
    }
    const double duty = std::min(offset, seq.kappa);
    return completed + seq.period_factor(n) * seq.psi / seq.kappa * duty;
}

// A stationary kernel modulated by the pulse phase:
// g(t,s) = f~(t-s) * exp(-i [R(t) - R(s)]), 0 <= s <= t.
struct TwoTimeKernel {
    KernelSpec base;
    PulseSequence pulses;

    TwoTimeKernel(KernelSpec base_, PulseSequence pulses_ = PulseSequence::off())
        : base(std::move(base_)), pulses(pulses_) {}
};

inline Complex eval_controlled(const TwoTimeKernel& kernel, double t, double s) {
    if (!(s >= 0.0) || !(t >= s))
        throw std::invalid_argument("eval_controlled: requires 0 <= s <= t");
    const Complex base_value = eval_kernel(kernel.base, t - s);
    if (!kernel.pulses.active()) return base_value;
    const double phase = phase_integral(kernel.pulses, t) - phase_integral(kernel.pulses, s);
    return base_value * std::polar(1.0, -phase);
}

} // namespace spinbath
