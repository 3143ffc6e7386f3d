#include "hwm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "hwm/errors.hpp"
#include "hwm/fft.hpp"
#include "hwm/util.hpp"

namespace hwm {

namespace {

std::vector<int> dft_dims(const Grid& g) {
    return std::vector<int>(static_cast<std::size_t>(g.n), g.N);
}

// Shared forward/inverse plumbing for scalar planes.
SpectralField forward_plane(const Grid& g, const std::vector<double>& v) {
    SpectralField out(g);
    std::vector<std::complex<double>> in(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) in[i] = {v[i], 0.0};
    dft(dft_dims(g), in.data(), out.c.data(), true);
    return out;
}

std::vector<double> inverse_plane(const SpectralField& f) {
    std::vector<std::complex<double>> out(f.size());
    dft(dft_dims(f.grid), f.c.data(), out.data(), false);
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = out[i].real();
    return v;
}

void apply_radial_multiplier(SpectralField& f, const std::function<double(double)>& mult) {
    const Grid& g = f.grid;
    for (std::size_t i = 0; i < f.size(); ++i) f.c[i] *= mult(g.xi_abs(i));
}

// Relative size of the zero mode against the field, used by the mean-free
// preconditions of negative-order multipliers and norms.
void require_mean_free(const SpectralField& f, const char* who) {
    double sum2 = 0.0;
    for (const auto& z : f.c) sum2 += std::norm(z);
    const double scale = std::max(1.0, std::sqrt(f.grid.box_volume() * sum2));
    if (std::abs(f.c[0]) > 1e-12 * scale)
        throw DomainError(std::string(who) +
                          ": negative order requires a mean-free field, mean magnitude " +
                          std::to_string(std::abs(f.c[0])));
}

} // namespace

// --------------------------------------------------------------------------
// Cutoffs and shell layout.
// --------------------------------------------------------------------------

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

double phi_cut(double r) { return smooth_step(2.0 - r); }

double chi_cut(double r) { return phi_cut(r) - phi_cut(2.0 * r); }

LPSpec LPSpec::infer(const Grid& g) {
    g.validate();
    LPSpec s;
    s.kMin = static_cast<int>(std::lround(std::log2(g.xi_unit())));
    s.kMax = static_cast<int>(std::ceil(std::log2(g.xi_max())));
    if (s.kMax <= s.kMin) s.kMax = s.kMin + 1;
    return s;
}

double LPSpec::weight(int k, double r) const {
    if (!(r > 0.0) || !in_range(k)) return 0.0;
    if (k == kMin) return phi_cut(std::ldexp(r, -kMin));
    if (k == kMax) return 1.0 - phi_cut(std::ldexp(r, -(kMax - 1)));
    // chi(r/2^k) written so adjacent shells share bitwise-equal phi values
    // and the partition telescopes cleanly.
    return phi_cut(std::ldexp(r, -k)) - phi_cut(std::ldexp(r, -(k - 1)));
}

double LPSpec::weight_below(int k, double r) const {
    if (!(r > 0.0) || k <= kMin) return 0.0;
    if (k > kMax) return 1.0;
    // Closed form of the telescoped partial sum.
    return phi_cut(std::ldexp(r, -(k - 1)));
}

// --------------------------------------------------------------------------
// Transforms and basic reductions.
// --------------------------------------------------------------------------

SpectralField transform(const RealField& f) {
    f.grid.validate();
    return forward_plane(f.grid, f.v);
}

RealField inverse_transform(const SpectralField& f) {
    RealField out(f.grid);
    out.v = inverse_plane(f);
    return out;
}

VecSpectralField transform(const VecField& f) {
    f.grid.validate();
    VecSpectralField out(f.grid);
    for (int c = 0; c < 3; ++c) out.comp[c] = forward_plane(f.grid, f.c[c]);
    return out;
}

VecField inverse_transform(const VecSpectralField& f) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) out.c[c] = inverse_plane(f.comp[c]);
    return out;
}

double mean(const RealField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / static_cast<double>(f.size());
}

Vec3 field_mean(const VecField& f) {
    Vec3 m{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (double x : f.c[c]) s += x;
        m[c] = s / static_cast<double>(f.size());
    }
    return m;
}

double l2_norm(const RealField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(f.grid.cell_volume() * s);
}

double l2_norm(const VecField& f) {
    double s = 0.0;
    for (const auto& plane : f.c)
        for (double x : plane) s += x * x;
    return std::sqrt(f.grid.cell_volume() * s);
}

double linf_norm(const RealField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double linf_norm(const VecField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec3 p = f.at(i);
        m = std::max(m, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
    }
    return m;
}

// --------------------------------------------------------------------------
// Multipliers.
// --------------------------------------------------------------------------

namespace {

SpectralField frac_lap_spectral(const RealField& f, double s) {
    SpectralField sp = transform(f);
    if (s < 0.0) require_mean_free(sp, "fractional_laplacian");
    if (s != 0.0) sp.c[0] = 0.0;
    for (std::size_t i = 1; i < sp.size(); ++i)
        sp.c[i] *= std::pow(sp.grid.xi_abs(i), 2.0 * s);
    return sp;
}

} // namespace

RealField fractional_laplacian(const RealField& f, double s) {
    return inverse_transform(frac_lap_spectral(f, s));
}

VecField fractional_laplacian(const VecField& f, double s) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        out.c[c] = fractional_laplacian(plane, s).v;
    }
    return out;
}

RealField laplacian(const RealField& f) {
    SpectralField sp = transform(f);
    apply_radial_multiplier(sp, [](double r) { return -r * r; });
    return inverse_transform(sp);
}

VecField laplacian(const VecField& f) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        out.c[c] = laplacian(plane).v;
    }
    return out;
}

RealField derivative(const RealField& f, int axis) {
    if (axis < 0 || axis >= f.grid.n)
        throw ConfigError("derivative: axis " + std::to_string(axis) + " out of range");
    SpectralField sp = transform(f);
    for (std::size_t i = 0; i < sp.size(); ++i)
        sp.c[i] *= std::complex<double>(0.0, f.grid.xi_component(i, axis));
    return inverse_transform(sp);
}

VecField derivative(const VecField& f, int axis) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        out.c[c] = derivative(plane, axis).v;
    }
    return out;
}

RealField lp_project(const RealField& f, int k, const LPSpec& spec) {
    SpectralField sp = transform(f);
    sp.c[0] = 0.0;
    for (std::size_t i = 1; i < sp.size(); ++i)
        sp.c[i] *= spec.weight(k, sp.grid.xi_abs(i));
    return inverse_transform(sp);
}

VecField lp_project(const VecField& f, int k, const LPSpec& spec) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        out.c[c] = lp_project(plane, k, spec).v;
    }
    return out;
}

RealField lp_below(const RealField& f, int k, const LPSpec& spec, bool with_mean) {
    SpectralField sp = transform(f);
    if (!with_mean) sp.c[0] = 0.0;
    for (std::size_t i = 1; i < sp.size(); ++i)
        sp.c[i] *= spec.weight_below(k, sp.grid.xi_abs(i));
    return inverse_transform(sp);
}

VecField lp_below(const VecField& f, int k, const LPSpec& spec, bool with_mean) {
    VecField out(f.grid);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        out.c[c] = lp_below(plane, k, spec, with_mean).v;
    }
    return out;
}

std::vector<double> shell_l2_norms(const RealField& f, const LPSpec& spec) {
    SpectralField sp = transform(f);
    std::vector<double> acc(static_cast<std::size_t>(spec.shells()), 0.0);
    for (std::size_t i = 1; i < sp.size(); ++i) {
        const double r = sp.grid.xi_abs(i);
        const double p = std::norm(sp.c[i]);
        for (int k = spec.kMin; k <= spec.kMax; ++k) {
            const double w = spec.weight(k, r);
            if (w > 0.0) acc[static_cast<std::size_t>(k - spec.kMin)] += w * w * p;
        }
    }
    const double vol = f.grid.box_volume();
    for (double& a : acc) a = std::sqrt(vol * a);
    return acc;
}

std::vector<double> shell_l2_norms(const VecField& f, const LPSpec& spec) {
    std::vector<double> acc(static_cast<std::size_t>(spec.shells()), 0.0);
    for (int c = 0; c < 3; ++c) {
        RealField plane(f.grid);
        plane.v = f.c[c];
        const auto part = shell_l2_norms(plane, spec);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += part[k] * part[k];
    }
    for (double& a : acc) a = std::sqrt(a);
    return acc;
}

// --------------------------------------------------------------------------
// Spatial norms.
// --------------------------------------------------------------------------

namespace {

double sobolev_dot_sq(const SpectralField& sp, double s) {
    if (s < 0.0) require_mean_free(sp, "spatial_norm");
    double acc = (s == 0.0) ? std::norm(sp.c[0]) : 0.0;
    for (std::size_t i = 1; i < sp.size(); ++i)
        acc += std::pow(sp.grid.xi_abs(i), 2.0 * s) * std::norm(sp.c[i]);
    return sp.grid.box_volume() * acc;
}

} // namespace

double spatial_norm(const RealField& f, const NormSpec& spec) {
    switch (spec.kind) {
    case NormSpec::Kind::SobolevDot:
        return std::sqrt(sobolev_dot_sq(transform(f), spec.s));
    case NormSpec::Kind::Besov21: {
        const LPSpec lp = LPSpec::infer(f.grid);
        const auto norms = shell_l2_norms(f, lp);
        double acc = 0.0;
        for (int k = lp.kMin; k <= lp.kMax; ++k)
            acc += norms[static_cast<std::size_t>(k - lp.kMin)] * std::pow(2.0, spec.s * k);
        return acc;
    }
    default:
        throw ConfigError("spatial_norm: spec is not a spatial kind");
    }
}

double spatial_norm(const VecField& f, const NormSpec& spec) {
    switch (spec.kind) {
    case NormSpec::Kind::SobolevDot: {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            RealField plane(f.grid);
            plane.v = f.c[c];
            acc += sobolev_dot_sq(transform(plane), spec.s);
        }
        return std::sqrt(acc);
    }
    case NormSpec::Kind::Besov21: {
        const LPSpec lp = LPSpec::infer(f.grid);
        const auto norms = shell_l2_norms(f, lp);
        double acc = 0.0;
        for (int k = lp.kMin; k <= lp.kMax; ++k)
            acc += norms[static_cast<std::size_t>(k - lp.kMin)] * std::pow(2.0, spec.s * k);
        return acc;
    }
    default:
        throw ConfigError("spatial_norm: spec is not a spatial kind");
    }
}

// --------------------------------------------------------------------------
// Bilinear multiplier and commutator scaling.
// --------------------------------------------------------------------------

namespace {

struct ActiveMode {
    std::array<int, 2> m;
    std::complex<double> coef;
};

std::vector<ActiveMode> masked_modes(const SpectralField& sp, int k, const LPSpec& spec) {
    std::vector<ActiveMode> out;
    for (std::size_t i = 1; i < sp.size(); ++i) {
        const double w = spec.weight(k, sp.grid.xi_abs(i));
        if (w == 0.0) continue;
        const std::complex<double> c = sp.c[i] * w;
        if (c == std::complex<double>(0.0, 0.0)) continue;
        out.push_back({sp.grid.modes(i), c});
    }
    return out;
}

} // namespace

RealField bilinear_apply(const BilinearSymbol& sym, const RealField& u,
                         const RealField& v, const LPSpec& spec) {
    if (!(u.grid == v.grid)) throw ConfigError("bilinear_apply: grids differ");
    const Grid& g = u.grid;
    if (g.points() > 65536)
        throw ConfigError("bilinear_apply: grid too large for the quadratic pass (cap 65536 points)");
    if (!sym.m) throw ConfigError("bilinear_apply: empty symbol");

    const auto au = masked_modes(transform(u), sym.k1, spec);
    const auto av = masked_modes(transform(v), sym.k2, spec);
    if (au.size() * av.size() > (std::size_t{1} << 28))
        throw ConfigError("bilinear_apply: active mode pair count exceeds the quadratic-pass cap");

    const double unit = g.xi_unit();
    const int half = g.N / 2;
    SpectralField out(g);
    for (const auto& a : au) {
        const std::array<double, 2> xi{a.m[0] * unit, a.m[1] * unit};
        for (const auto& b : av) {
            const int s0 = a.m[0] + b.m[0];
            const int s1 = a.m[1] + b.m[1];
            if (s0 < -half || s0 >= half || s1 < -half || s1 >= half) continue;
            const std::array<double, 2> et{b.m[0] * unit, b.m[1] * unit};
            const std::size_t i0 = static_cast<std::size_t>(s0 >= 0 ? s0 : s0 + g.N);
            const std::size_t flat =
                g.n == 1 ? i0 : i0 * static_cast<std::size_t>(g.N) +
                                    static_cast<std::size_t>(s1 >= 0 ? s1 : s1 + g.N);
            out.c[flat] += sym.m(xi, et) * a.coef * b.coef;
        }
    }
    return inverse_transform(out);
}

BilinearSymbol commutator_symbol(int variant, int k1, int k2, const LPSpec& spec) {
    if (variant != 1 && variant != 2)
        throw ConfigError("commutator_symbol: variant must be 1 or 2");
    BilinearSymbol sym;
    sym.k1 = k1;
    sym.k2 = k2;
    sym.gamma_bound = std::ldexp(1.0, k1 + (variant == 2 ? k2 : 0));
    sym.m = [variant, spec](const std::array<double, 2>& xi,
                            const std::array<double, 2>& et) -> std::complex<double> {
        const double rz = std::hypot(xi[0] + et[0], xi[1] + et[1]);
        const double re = std::hypot(et[0], et[1]);
        const double w0 = spec.weight(0, rz);
        if (w0 == 0.0) return 0.0;
        const double d = rz - re;
        return variant == 1 ? w0 * d : w0 * re * d;
    };
    return sym;
}

ScalingReport commutator_scaling(const std::function<RealField(int)>& gen,
                                 int k1_lo, int k1_hi, int k2, int variant,
                                 const LPSpec& spec) {
    if (k1_hi - k1_lo < 2)
        throw ConfigError("commutator_scaling: need at least 3 dyads in the k1 range");
    if (k1_hi >= k2)
        throw ConfigError("commutator_scaling: k1 range must sit below k2");

    const RealField v = gen(k2);
    const double nv = l2_norm(lp_project(v, k2, spec));
    if (nv < 1e-14) throw DomainError("commutator_scaling: degenerate high field");

    ScalingReport rep;
    std::vector<double> xs;
    for (int k1 = k1_lo; k1 <= k1_hi; ++k1) {
        const RealField u = gen(k1);
        const double nu = l2_norm(lp_project(u, k1, spec));
        if (nu < 1e-14) throw DomainError("commutator_scaling: degenerate low field at shell " +
                                          std::to_string(k1));
        const RealField c = bilinear_apply(commutator_symbol(variant, k1, k2, spec), u, v, spec);
        const double nc = l2_norm(c);
        rep.k1.push_back(k1);
        rep.norm.push_back(nc);
        rep.log2_ratio.push_back(std::log2(nc / (nu * nv)));
        xs.push_back(static_cast<double>(k1));
    }
    rep.slope = fit_slope(xs, rep.log2_ratio);
    return rep;
}

} // namespace hwm
