// kernels.hpp — Bath memory kernels f~(t-s) and derived spectral quantities

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

namespace spinbath {

using Complex = std::complex<double>;

// Lorentzian environment, f~(dt) = (Gamma*gamma0/2) exp(-gamma0*dt).
// gamma0 is the inverse memory time: small gamma0 = long memory.
struct ExponentialKernel {
    double Gamma = 1.0;
    double gamma0 = 1.0;
};

// Degenerate bath (all couplings Acal/N, all bath frequencies equal),
// f~(dt) = (Acal^2/4N) exp(i*Omega*dt) with Omega the effective detuning.
struct BoxKernel {
    double Acal = 1.0;
    std::size_t N = 1;
    double Omega = 0.0;
};

// Gaussian-distributed couplings, effective kernel
// f~(dt) = (Acal/(2 sqrt(N))) exp(-nu^2 dt^2/2 + i (Acal/2) dt).
struct GaussianBathKernel {
    double Acal = 1.0;
    std::size_t N = 1;
    double nu = 0.0;
};

// Samples of f~ at k*dt; evaluation interpolates linearly and never
// extrapolates beyond the table.
struct TabulatedKernel {
    double dt = 1.0;
    std::vector<Complex> values;
};

using KernelSpec =
    std::variant<ExponentialKernel, BoxKernel, GaussianBathKernel, TabulatedKernel>;

inline void validate_kernel(const KernelSpec& spec) {
    std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ExponentialKernel>) {
                if (!std::isfinite(k.Gamma) || k.Gamma <= 0.0)
                    throw std::invalid_argument("ExponentialKernel: Gamma must be finite and > 0");
                if (!std::isfinite(k.gamma0) || k.gamma0 <= 0.0)
                    throw std::invalid_argument("ExponentialKernel: gamma0 must be finite and > 0");
            } else if constexpr (std::is_same_v<T, BoxKernel>) {
                if (!std::isfinite(k.Acal) || k.Acal == 0.0)
                    throw std::invalid_argument("BoxKernel: Acal must be finite and nonzero");
                if (k.N < 1) throw std::invalid_argument("BoxKernel: N must be >= 1");
                if (!std::isfinite(k.Omega))
                    throw std::invalid_argument("BoxKernel: Omega must be finite");
            } else if constexpr (std::is_same_v<T, GaussianBathKernel>) {
                if (!std::isfinite(k.Acal) || k.Acal == 0.0)
                    throw std::invalid_argument("GaussianBathKernel: Acal must be finite and nonzero");
                if (k.N < 1) throw std::invalid_argument("GaussianBathKernel: N must be >= 1");
                if (!std::isfinite(k.nu) || k.nu < 0.0)
                    throw std::invalid_argument("GaussianBathKernel: nu must be finite and >= 0");
            } else {
                if (!std::isfinite(k.dt) || k.dt <= 0.0)
                    throw std::invalid_argument("TabulatedKernel: dt must be finite and > 0");
                if (k.values.empty())
                    throw std::invalid_argument("TabulatedKernel: values must be nonempty");
                for (const Complex& v : k.values)
                    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                        throw std::invalid_argument("TabulatedKernel: values must be finite");
            }
        },
        spec);
}

// Evaluate the stationary kernel at time difference lag >= 0.
inline Complex eval_kernel(const KernelSpec& spec, double lag) {
    validate_kernel(spec);
    if (!std::isfinite(lag) || lag < 0.0)
        throw std::invalid_argument("eval_kernel: lag must be finite and >= 0");
    return std::visit(
        [lag](const auto& k) -> Complex {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ExponentialKernel>) {
                return Complex(0.5 * k.Gamma * k.gamma0 * std::exp(-k.gamma0 * lag), 0.0);
            } else if constexpr (std::is_same_v<T, BoxKernel>) {
                const double amp = k.Acal * k.Acal / (4.0 * static_cast<double>(k.N));
                return amp * std::polar(1.0, k.Omega * lag);
            } else if constexpr (std::is_same_v<T, GaussianBathKernel>) {
                const double amp = k.Acal / (2.0 * std::sqrt(static_cast<double>(k.N)));
                const double envelope = std::exp(-0.5 * k.nu * k.nu * lag * lag);
                return amp * envelope * std::polar(1.0, 0.5 * k.Acal * lag);
            } else {
                const double pos = lag / k.dt;
                const double max_pos = static_cast<double>(k.values.size() - 1);
                if (pos > max_pos)
                    throw std::out_of_range("TabulatedKernel: lag beyond tabulated range");
                if (k.values.size() == 1) return k.values.front();
                std::size_t idx = static_cast<std::size_t>(pos);
                if (idx >= k.values.size() - 1) idx = k.values.size() - 2;
                const double frac = pos - static_cast<double>(idx);
                return k.values[idx] + frac * (k.values[idx + 1] - k.values[idx]);
            }
        },
        spec);
}

// Overhauser shift h = sum_k A_k/2 implied by the kernel's bath model
// (Acal/2 for the box and Gaussian baths; unmodeled otherwise).
inline double overhauser_shift(const KernelSpec& spec) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, BoxKernel> ||
                          std::is_same_v<T, GaussianBathKernel>)
                return 0.5 * k.Acal;
            else
                return 0.0;
        },
        spec);
}

// Effective detuning of the box model: Omega = omega0 - omega - (Acal/2)(1 - 1/N).
inline double box_detuning(double omega0, double omega, double Acal, std::size_t N) {
    if (N < 1) throw std::invalid_argument("box_detuning: N must be >= 1");
    const double n = static_cast<double>(N);
    const double result = omega0 - omega - 0.5 * Acal * (1.0 - 1.0 / n);
    if (!std::isfinite(result))
        throw std::invalid_argument("box_detuning: non-finite result");
    return result;
}

// chi = sqrt(1 - 2 Gamma/gamma0), principal complex root; purely imaginary
// when gamma0 < 2 Gamma.
inline Complex exponential_chi(double Gamma, double gamma0) {
    if (!(Gamma > 0.0) || !(gamma0 > 0.0))
        throw std::invalid_argument("exponential_chi: Gamma and gamma0 must be > 0");
    return std::sqrt(Complex(1.0 - 2.0 * Gamma / gamma0, 0.0));
}

// Delta = sqrt(Omega^2 + Acal^2/N), the box-model oscillation frequency.
inline double box_delta(double Omega, double Acal, std::size_t N) {
    if (N < 1) throw std::invalid_argument("box_delta: N must be >= 1");
    return std::sqrt(Omega * Omega + Acal * Acal / static_cast<double>(N));
}

} // namespace spinbath
