// grid.hpp — Uniform time grid shared by all solvers and series types

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace spinbath {

struct TimeGrid {
    double t_max = 1.0;
    std::size_t n_steps = 2;

    TimeGrid() = default;
    TimeGrid(double t_max_, std::size_t n_steps_) : t_max(t_max_), n_steps(n_steps_) {
        validate();
    }

    void validate() const {
        if (!std::isfinite(t_max) || t_max <= 0.0)
            throw std::invalid_argument("TimeGrid: t_max must be finite and > 0");
        if (n_steps < 2)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
    }

    double dt() const { return t_max / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double node(std::size_t k) const { return static_cast<double>(k) * dt(); }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t_max == b.t_max && a.n_steps == b.n_steps;
    }
};

} // namespace spinbath
