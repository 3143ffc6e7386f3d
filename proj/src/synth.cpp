#include "hwm/synth.hpp"

#include <cmath>
#include <complex>

#include "hwm/errors.hpp"

namespace hwm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fixed unit tangent at the base point: project e2 onto the tangent space,
// falling back to e3 when the base is (anti)parallel to e2. Unit length in
// the eta pairing (tangents at upper-sheet points are spacelike, so the
// squared length is positive for both targets).
Vec3 base_tangent(const TargetSpec& target) {
    for (const Vec3& cand : {Vec3{0.0, 1.0, 0.0}, Vec3{0.0, 0.0, 1.0}}) {
        const Vec3 t = tangent_project(cand, target.base, target.eta);
        const double len2 = dot_eta(t, t, target.eta);
        if (len2 > 1e-12) {
            const double inv = 1.0 / std::sqrt(len2);
            return {t[0] * inv, t[1] * inv, t[2] * inv};
        }
    }
    throw ConfigError("synth: no usable tangent direction at the base point");
}

// Sweep the angle field through the base along the tangent: circular for the
// sphere, hyperbolic for the upper sheet. On-target pointwise by the
// cos^2+sin^2 (cosh^2-sinh^2) identity.
VecField sweep(const RealField& theta, const TargetSpec& target) {
    const Vec3 q = target.base;
    const Vec3 e = base_tangent(target);
    VecField out(theta.grid);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double a = theta[i];
        const double ca = target.eta == 1 ? std::cos(a) : std::cosh(a);
        const double sa = target.eta == 1 ? std::sin(a) : std::sinh(a);
        out.set(i, {ca * q[0] + sa * e[0], ca * q[1] + sa * e[1], ca * q[2] + sa * e[2]});
    }
    return out;
}

std::size_t axis_index(const Grid& g, std::size_t flat, int axis) {
    // Row-major, axis 0 outermost.
    if (g.n == 1) return flat;
    return axis == 0 ? flat / static_cast<std::size_t>(g.N)
                     : flat % static_cast<std::size_t>(g.N);
}

} // namespace

VecField constant_field(const Grid& g, const Vec3& v) {
    VecField out(g);
    for (std::size_t i = 0; i < g.points(); ++i) out.set(i, v);
    return out;
}

VecField great_circle(const Grid& g, const TargetSpec& target, double amplitude,
                      int mode) {
    target.validate();
    if (mode < 1) throw ConfigError("great_circle: mode must be >= 1");
    RealField theta(g);
    const double h = g.L / g.N;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double x0 = static_cast<double>(axis_index(g, i, 0)) * h;
        double t = amplitude * std::sin(kTwoPi * mode * x0 / g.L);
        if (g.n == 2) {
            const double x1 = static_cast<double>(axis_index(g, i, 1)) * h;
            t *= std::cos(kTwoPi * mode * x1 / g.L);
        }
        theta[i] = t;
    }
    return sweep(theta, target);
}

VecField random_phases(const Grid& g, const TargetSpec& target, double amplitude,
                       int shell, const LPSpec& spec, std::mt19937_64& rng) {
    target.validate();
    if (!spec.in_range(shell))
        throw ConfigError("random_phases: shell " + std::to_string(shell) +
                          " outside the grid's shell range");

    // Shell-weight amplitude profile with a random phase per mode, drawn in
    // ascending flat-index order so a seed pins the field exactly. The real
    // part keeps the angle field real (Hermitian symmetrization).
    SpectralField coef(g);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    bool any = false;
    for (std::size_t i = 1; i < g.points(); ++i) {
        const double w = spec.weight(shell, g.xi_abs(i));
        if (w <= 0.0) continue;
        const double p = phase(rng);
        coef.c[i] = w * std::complex<double>(std::cos(p), std::sin(p));
        any = true;
    }
    if (!any)
        throw ConfigError("random_phases: shell " + std::to_string(shell) +
                          " carries no modes at this resolution");

    RealField theta = inverse_transform(coef);
    // inverse_transform of a non-Hermitian spectrum keeps the real part only,
    // so theta is real; normalize its root-mean-square to the amplitude.
    double rms = 0.0;
    for (double v : theta.v) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(g.points()));
    if (rms <= 0.0) throw ConfigError("random_phases: degenerate draw");
    const double scale = amplitude / rms;
    for (double& v : theta.v) v *= scale;
    return sweep(theta, target);
}

RealField band_field(const Grid& g, int k, const LPSpec& spec, std::mt19937_64& rng) {
    RealField noise(g);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < g.points(); ++i) noise[i] = gauss(rng);
    return lp_project(noise, k, spec);
}

VecField make_data(const RunConfig& cfg, std::mt19937_64& rng) {
    if (cfg.data.kind == "constant")
        return constant_field(cfg.grid, cfg.target.base);
    if (cfg.data.kind == "great_circle")
        return great_circle(cfg.grid, cfg.target, cfg.data.amplitude, cfg.data.mode);
    if (cfg.data.kind == "random_phases")
        return random_phases(cfg.grid, cfg.target, cfg.data.amplitude, cfg.data.shell,
                             LPSpec::infer(cfg.grid), rng);
    throw ConfigError("data.kind must be one of constant, great_circle, random_phases");
}

} // namespace hwm
