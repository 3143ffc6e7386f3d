#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "hwm/errors.hpp"
#include "hwm/grid.hpp"

namespace hwm {

using Vec3 = std::array<double, 3>;

// Real scalar samples on the lattice.
struct RealField {
    Grid grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(const Grid& g) : grid(g), v(g.points(), 0.0) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

// R^3-valued samples, stored component-major (three scalar planes) to match
// the snapshot payload layout.
struct VecField {
    Grid grid;
    std::array<std::vector<double>, 3> c;

    VecField() = default;
    explicit VecField(const Grid& g) : grid(g) {
        for (auto& plane : c) plane.assign(g.points(), 0.0);
    }

    std::size_t size() const { return c[0].size(); }

    Vec3 at(std::size_t i) const { return {c[0][i], c[1][i], c[2][i]}; }
    void set(std::size_t i, const Vec3& p) {
        c[0][i] = p[0];
        c[1][i] = p[1];
        c[2][i] = p[2];
    }
};

// Complex Fourier coefficients of one scalar plane, full (unreduced) mode set;
// real inputs carry conjugate symmetry c(-m) = conj(c(m)).
struct SpectralField {
    Grid grid;
    std::vector<std::complex<double>> c;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), c(g.points(), {0.0, 0.0}) {}

    std::size_t size() const { return c.size(); }
};

struct VecSpectralField {
    Grid grid;
    std::array<SpectralField, 3> comp;

    VecSpectralField() = default;
    explicit VecSpectralField(const Grid& g) : grid(g), comp{SpectralField(g), SpectralField(g), SpectralField(g)} {}
};

inline bool all_finite(const RealField& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const VecField& f) {
    for (const auto& plane : f.c)
        for (double x : plane)
            if (!std::isfinite(x)) return false;
    return true;
}

// Uniformly time-sampled sequence of (u, u_t) fields produced by a solver.
struct Trajectory {
    Grid grid;
    int eta = 1; // +1 sphere, -1 hyperboloid; mirrors the target that made it
    std::vector<double> times;
    std::vector<VecField> u;
    std::vector<VecField> ut;

    std::size_t frames() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

} // namespace hwm
