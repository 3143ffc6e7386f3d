#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "hwm/errors.hpp"

namespace hwm {

// Periodic lattice in n = 1 or 2 space dimensions, N points per axis (power of
// two, all axes equal), period L per axis. Discrete frequencies per axis are
// xi = 2*pi*m/L with m in the symmetric range [-N/2, N/2-1] (the Nyquist mode
// sits on the negative side).
struct Grid {
    int n = 1;
    int N = 8;
    double L = 2.0 * M_PI;

    Grid() = default;
    Grid(int n_, int N_, double L_) : n(n_), N(N_), L(L_) { validate(); }

    void validate() const {
        if (n != 1 && n != 2)
            throw ConfigError("grid: n must be 1 or 2, got " + std::to_string(n));
        if (N < 8 || (N & (N - 1)) != 0)
            throw ConfigError("grid: size must be a power of two >= 8, got " + std::to_string(N));
        if (!(L > 0.0))
            throw ConfigError("grid: boxLength must be positive");
    }

    std::size_t points() const {
        std::size_t p = static_cast<std::size_t>(N);
        return n == 1 ? p : p * p;
    }

    // Signed integer mode along one axis for a flat index component.
    int mode_of(int idx) const { return idx < N / 2 ? idx : idx - N; }

    // Integer mode vector of a flat lattice/spectral index (row-major, axis 0 outer).
    std::array<int, 2> modes(std::size_t flat) const {
        if (n == 1) return {mode_of(static_cast<int>(flat)), 0};
        const int i0 = static_cast<int>(flat) / N;
        const int i1 = static_cast<int>(flat) % N;
        return {mode_of(i0), mode_of(i1)};
    }

    double xi_unit() const { return 2.0 * M_PI / L; }

    // |xi| of a flat spectral index.
    double xi_abs(std::size_t flat) const {
        const auto m = modes(flat);
        const double u = xi_unit();
        return n == 1 ? std::abs(m[0]) * u : std::hypot(m[0] * u, m[1] * u);
    }

    // Component of xi along an axis, zero at the Nyquist mode so that first
    // derivatives of real fields stay real on the grid.
    double xi_component(std::size_t flat, int axis) const {
        const auto m = modes(flat);
        if (m[axis] == -N / 2) return 0.0;
        return m[axis] * xi_unit();
    }

    double cell_volume() const {
        const double h = L / N;
        return n == 1 ? h : h * h;
    }

    double box_volume() const { return n == 1 ? L : L * L; }

    double xi_max() const {
        const double nyq = xi_unit() * (N / 2);
        return n == 1 ? nyq : nyq * std::sqrt(2.0);
    }

    bool operator==(const Grid& o) const { return n == o.n && N == o.N && L == o.L; }
};

} // namespace hwm
