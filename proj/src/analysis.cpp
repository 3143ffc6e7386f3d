#include "hwm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hwm/errors.hpp"
#include "hwm/geometry.hpp"
#include "hwm/util.hpp"

namespace hwm {

namespace {

// ---------------------------------------------------------------------------
// Pointwise 3x3 helpers (row-major).
// ---------------------------------------------------------------------------

using Mat3 = std::array<double, 9>;

Mat3 mul3(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] +
                           a[3 * i + 2] * b[6 + j];
    return r;
}

Vec3 mul3v(const Mat3& a, const Vec3& v) {
    return {a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
            a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
            a[6] * v[0] + a[7] * v[1] + a[8] * v[2]};
}

double det3(const Mat3& a) {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) -
           a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Mat3 inv3(const Mat3& a, double det) {
    const double s = 1.0 / det;
    return {s * (a[4] * a[8] - a[5] * a[7]), s * (a[2] * a[7] - a[1] * a[8]),
            s * (a[1] * a[5] - a[2] * a[4]), s * (a[5] * a[6] - a[3] * a[8]),
            s * (a[0] * a[8] - a[2] * a[6]), s * (a[2] * a[3] - a[0] * a[5]),
            s * (a[3] * a[7] - a[4] * a[6]), s * (a[1] * a[6] - a[0] * a[7]),
            s * (a[0] * a[4] - a[1] * a[3])};
}

constexpr double kDetGuard = 0.1;

// ---------------------------------------------------------------------------
// MatField helpers.
// ---------------------------------------------------------------------------

MatField mat_mul_field(const MatField& a, const MatField& b) {
    MatField out = MatField::zero(a.grid);
    for (std::size_t x = 0; x < a.size(); ++x)
        out.set(x, mul3(a.at(x), b.at(x)));
    return out;
}

VecField mat_vec_field(const MatField& a, const VecField& v) {
    VecField out(v.grid);
    for (std::size_t x = 0; x < v.size(); ++x)
        out.set(x, mul3v(a.at(x), v.at(x)));
    return out;
}

MatField mat_sub(const MatField& a, const MatField& b) {
    MatField out = a;
    for (int e = 0; e < 9; ++e)
        for (std::size_t x = 0; x < out.m[e].size(); ++x) out.m[e][x] -= b.m[e][x];
    return out;
}

double mat_linf(const MatField& a) {
    double m = 0.0;
    for (int e = 0; e < 9; ++e)
        for (double v : a.m[e]) m = std::max(m, std::abs(v));
    return m;
}

// Frobenius L2 over entries with the lattice cell weight.
double mat_l2(const MatField& a) {
    double acc = 0.0;
    for (int e = 0; e < 9; ++e)
        for (double v : a.m[e]) acc += v * v;
    return std::sqrt(a.grid.cell_volume() * acc);
}

MatField mat_axis_derivative(const MatField& a, int axis) {
    MatField out;
    out.grid = a.grid;
    for (int e = 0; e < 9; ++e) {
        RealField plane(a.grid);
        plane.v = a.m[e];
        out.m[e] = derivative(plane, axis).v;
    }
    return out;
}

MatField mat_laplacian(const MatField& a) {
    MatField out;
    out.grid = a.grid;
    for (int e = 0; e < 9; ++e) {
        RealField plane(a.grid);
        plane.v = a.m[e];
        out.m[e] = laplacian(plane).v;
    }
    return out;
}

MatField utu_minus_identity(const MatField& u) {
    MatField out = MatField::zero(u.grid);
    for (std::size_t x = 0; x < u.size(); ++x) {
        const Mat3 m = u.at(x);
        Mat3 g{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                g[3 * i + j] = m[i] * m[j] + m[3 + i] * m[3 + j] + m[6 + i] * m[6 + j];
        g[0] -= 1.0;
        g[4] -= 1.0;
        g[8] -= 1.0;
        out.set(x, g);
    }
    return out;
}

// Centered time differences of a uniformly spaced sequence, one-sided ends.
template <typename Seq, typename Diff>
std::vector<typename Seq::value_type> time_derivative(const Seq& s, double dt,
                                                      const Diff& axpy_diff) {
    std::vector<typename Seq::value_type> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 0)
            out.push_back(axpy_diff(s[1], s[0], dt));
        else if (i + 1 == s.size())
            out.push_back(axpy_diff(s[i], s[i - 1], dt));
        else
            out.push_back(axpy_diff(s[i + 1], s[i - 1], 2.0 * dt));
    }
    return out;
}

MatField mat_diff_scaled(const MatField& a, const MatField& b, double h) {
    MatField out = a;
    for (int e = 0; e < 9; ++e)
        for (std::size_t x = 0; x < out.m[e].size(); ++x)
            out.m[e][x] = (a.m[e][x] - b.m[e][x]) / h;
    return out;
}

VecField vec_diff_scaled(const VecField& a, const VecField& b, double h) {
    VecField out(a.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t x = 0; x < out.size(); ++x)
            out.c[c][x] = (a.c[c][x] - b.c[c][x]) / h;
    return out;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (v[i] + v[i + 1]) * (t[i + 1] - t[i]);
    return acc;
}

// (d w) w^T - w (d w)^T, entrywise over the grid; antisymmetric bit for bit
// because IEEE multiplication commutes and x - y == -(y - x) exactly.
MatField antisym_potential(const VecField& d, const VecField& w) {
    MatField out;
    out.grid = w.grid;
    for (int e = 0; e < 9; ++e) out.m[e].resize(w.size());
    for (std::size_t x = 0; x < w.size(); ++x) {
        const Vec3 a = d.at(x);
        const Vec3 b = w.at(x);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.m[3 * i + j][x] = a[i] * b[j] - b[i] * a[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shell-wise Sobolev norms: ||P_k f||_{SobolevDot(s)} for every shell in one
// forward transform. The zero mode sits in no shell, so negative s is safe.
// ---------------------------------------------------------------------------
std::vector<double> shell_sobolev(const VecField& f, double s, const LPSpec& spec) {
    const VecSpectralField sp = transform(f);
    const Grid& g = f.grid;
    std::vector<double> acc(static_cast<std::size_t>(spec.shells()), 0.0);
    for (std::size_t i = 1; i < g.points(); ++i) {
        const double r = g.xi_abs(i);
        if (r <= 0.0) continue;
        double mag2 = 0.0;
        for (int c = 0; c < 3; ++c) mag2 += std::norm(sp.comp[c].c[i]);
        if (mag2 == 0.0) continue;
        const double rs = std::pow(r, 2.0 * s);
        for (int k = spec.kMin; k <= spec.kMax; ++k) {
            const double w = spec.weight(k, r);
            if (w > 0.0) acc[static_cast<std::size_t>(k - spec.kMin)] += w * w * rs * mag2;
        }
    }
    for (double& v : acc) v = std::sqrt(g.box_volume() * v);
    return acc;
}

std::vector<double> shell_data_sizes(const VecField& f, const VecField& g,
                                     const LPSpec& spec) {
    const double half_n = f.grid.n / 2.0;
    const auto af = shell_sobolev(f, half_n, spec);
    const auto ag = shell_sobolev(g, half_n - 1.0, spec);
    std::vector<double> a(af.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = af[i] + ag[i];
    return a;
}

double besov_sum(const RealField& f, double s, const LPSpec& spec) {
    const auto norms = shell_l2_norms(f, spec);
    double acc = 0.0;
    for (int k = spec.kMin; k <= spec.kMax; ++k)
        acc += std::pow(2.0, s * k) * norms[static_cast<std::size_t>(k - spec.kMin)];
    return acc;
}

} // namespace

// ---------------------------------------------------------------------------
// Frequency envelopes.
// ---------------------------------------------------------------------------

double FrequencyEnvelope::at(int k) const {
    if (c.empty()) return 0.0;
    const int kTop = kMin + static_cast<int>(c.size()) - 1;
    // Outside the stored range the defining sum factors through the nearest
    // end: every |k - k'| splits as |k - end| + |end - k'|.
    if (k < kMin) return std::pow(2.0, -sigma * (kMin - k)) * c.front();
    if (k > kTop) return std::pow(2.0, -sigma * (k - kTop)) * c.back();
    return c[static_cast<std::size_t>(k - kMin)];
}

FrequencyEnvelope fit_envelope(const VecField& f, const VecField& g,
                               double sigma, const LPSpec& spec) {
    if (!(sigma > 0.0) || sigma > 0.25)
        throw ConfigError("fit_envelope: sigma must lie in (0, 1/4]");
    if (!(f.grid == g.grid)) throw ConfigError("fit_envelope: data grids differ");

    const auto a = shell_data_sizes(f, g, spec);
    FrequencyEnvelope env;
    env.sigma = sigma;
    env.kMin = spec.kMin;
    env.c.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            s += std::pow(2.0, -sigma * std::abs(static_cast<double>(i) -
                                                 static_cast<double>(j))) * a[j];
        env.c[i] = s;
    }
    double sq = 0.0;
    for (double v : a) sq += v * v;
    env.eps = std::sqrt(sq);
    const double r = std::pow(2.0, -sigma);
    env.l2_constant = (1.0 + r) / (1.0 - r);
    return env;
}

EnvelopeCheck check_envelope(const FrequencyEnvelope& env, const VecField& f,
                             const VecField& g, const LPSpec& spec, double C0) {
    const auto a = shell_data_sizes(f, g, spec);
    EnvelopeCheck chk;
    chk.C0 = C0;
    chk.ratio.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        chk.ratio[i] = a[i] / env.at(spec.kMin + static_cast<int>(i));
        chk.max_ratio = std::max(chk.max_ratio, chk.ratio[i]);
    }
    chk.pass = chk.max_ratio <= C0;
    return chk;
}

EnvelopeCheck check_envelope(const FrequencyEnvelope& env, const Trajectory& traj,
                             const LPSpec& spec, double C0) {
    EnvelopeCheck chk;
    chk.C0 = C0;
    for (std::size_t i = 0; i < traj.frames(); ++i) {
        const EnvelopeCheck one = check_envelope(env, traj.u[i], traj.ut[i], spec, C0);
        if (chk.ratio.empty()) chk.ratio.assign(one.ratio.size(), 0.0);
        for (std::size_t k = 0; k < one.ratio.size(); ++k)
            chk.ratio[k] = std::max(chk.ratio[k], one.ratio[k]);
        chk.max_ratio = std::max(chk.max_ratio, one.max_ratio);
    }
    chk.pass = chk.max_ratio <= C0;
    return chk;
}

// ---------------------------------------------------------------------------
// Microlocal constraint identity.
// ---------------------------------------------------------------------------

OrthomicroReport orthomicro_residual(const VecField& u, int offset, const LPSpec& spec) {
    if (offset < 2) throw ConfigError("orthomicro: offset must be at least 2");
    const Grid& g = u.grid;
    const int S = spec.shells();

    std::vector<VecField> shell;
    shell.reserve(static_cast<std::size_t>(S));
    for (int k = spec.kMin; k <= spec.kMax; ++k)
        shell.push_back(lp_project(u, k, spec));
    const Vec3 m = field_mean(u);

    OrthomicroReport rep;
    rep.offset = offset;

    // Diagonal band, all ordered pairs within the offset.
    std::vector<double> assembled(g.points(), 0.0);
    for (int i = 0; i < S; ++i) {
        const int jLo = std::max(0, i - offset);
        const int jHi = std::min(S - 1, i + offset);
        for (int j = jLo; j <= jHi; ++j)
            for (std::size_t x = 0; x < g.points(); ++x)
                assembled[x] += dot3(shell[static_cast<std::size_t>(i)].at(x),
                                     shell[static_cast<std::size_t>(j)].at(x));
    }

    // Cross terms against the running low-frequency tail (mean included).
    VecField low(g);
    for (int c = 0; c < 3; ++c) std::fill(low.c[c].begin(), low.c[c].end(), m[c]);
    for (int i = 0; i < S; ++i) {
        for (std::size_t x = 0; x < g.points(); ++x)
            assembled[x] += 2.0 * dot3(shell[static_cast<std::size_t>(i)].at(x), low.at(x));
        const int add = i - offset;
        if (add >= 0)
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    low.c[c][x] += shell[static_cast<std::size_t>(add)].c[c][x];
    }

    RealField resid(g);
    const double msq = dot3(m, m);
    for (std::size_t x = 0; x < g.points(); ++x)
        resid[x] = assembled[x] + msq - 1.0;
    rep.residual = l2_norm(resid);

    RealField constraint(g);
    for (std::size_t x = 0; x < g.points(); ++x)
        constraint[x] = dot3(u.at(x), u.at(x)) - 1.0;
    rep.localized = shell_l2_norms(constraint, spec);

    // Per shell: the hi/low split at that shell's own offset distance.
    rep.localized_parts.assign(static_cast<std::size_t>(S), 0.0);
    VecField low2(g);
    for (int c = 0; c < 3; ++c) std::fill(low2.c[c].begin(), low2.c[c].end(), m[c]);
    for (int i = 0; i < S; ++i) {
        RealField parts(g);
        for (std::size_t x = 0; x < g.points(); ++x) {
            const Vec3 lo = low2.at(x);
            const Vec3 hi{u.at(x)[0] - lo[0], u.at(x)[1] - lo[1], u.at(x)[2] - lo[2]};
            parts[x] = 2.0 * dot3(hi, lo) + dot3(hi, hi);
        }
        rep.localized_parts[static_cast<std::size_t>(i)] =
            l2_norm(lp_project(parts, spec.kMin + i, spec));
        const int add = i - offset;
        if (add >= 0)
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    low2.c[c][x] += shell[static_cast<std::size_t>(add)].c[c][x];
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Gauge construction.
// ---------------------------------------------------------------------------

MatField MatField::identity(const Grid& g) {
    MatField f;
    f.grid = g;
    for (int e = 0; e < 9; ++e)
        f.m[e].assign(g.points(), (e % 4 == 0) ? 1.0 : 0.0);
    return f;
}

MatField MatField::zero(const Grid& g) {
    MatField f;
    f.grid = g;
    for (int e = 0; e < 9; ++e) f.m[e].assign(g.points(), 0.0);
    return f;
}

std::array<double, 9> MatField::at(std::size_t i) const {
    std::array<double, 9> v;
    for (int e = 0; e < 9; ++e) v[e] = m[e][i];
    return v;
}

void MatField::set(std::size_t i, const std::array<double, 9>& v) {
    for (int e = 0; e < 9; ++e) m[e][i] = v[e];
}

GaugeField build_gauge(const VecField& u, const VecField& ut, int k_cut,
                       const LPSpec& spec, int k_lo, bool allow_empty) {
    if (!(u.grid == ut.grid)) throw ConfigError("build_gauge: field grids differ");
    const Grid& g = u.grid;

    GaugeField out;
    out.k_cut = k_cut;
    out.k_lo = std::max(k_lo, spec.kMin);
    const int k_hi = std::min(k_cut, spec.kMax);
    if (out.k_lo > k_hi) {
        if (!allow_empty)
            throw ConfigError("build_gauge: no shells in [" + std::to_string(out.k_lo) +
                              ", " + std::to_string(k_cut) + "]");
        out.empty_range = true;
    }

    // Potentials from the cut-off field (mean included), time slot first.
    const VecField w = lp_below(u, k_cut + 1, spec, true);
    const VecField wt = lp_below(ut, k_cut + 1, spec, true);
    out.A.clear();
    out.A.reserve(static_cast<std::size_t>(g.n) + 1);
    out.A.push_back(antisym_potential(wt, w));
    for (int axis = 0; axis < g.n; ++axis)
        out.A.push_back(antisym_potential(derivative(w, axis), w));

    out.U = MatField::identity(g);
    if (!out.empty_range) {
        const Vec3 m = field_mean(u);
        VecField ulow(g);
        for (int c = 0; c < 3; ++c)
            std::fill(ulow.c[c].begin(), ulow.c[c].end(), m[c]);
        for (int k = out.k_lo; k <= k_hi; ++k) {
            const VecField uk = lp_project(u, k, spec);
            for (std::size_t x = 0; x < g.points(); ++x) {
                const Vec3 a = uk.at(x);
                const Vec3 b = ulow.at(x);
                Mat3 stage{};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        stage[3 * i + j] = a[i] * b[j] - b[i] * a[j];
                const Mat3 below = out.U.at(x);
                const Mat3 add = mul3(stage, below);
                Mat3 next;
                for (int e = 0; e < 9; ++e) next[e] = below[e] + add[e];
                out.U.set(x, next);
            }
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    ulow.c[c][x] += uk.c[c][x];
        }
    }
    return out;
}

GaugeDiagnostics gauge_diagnostics(const std::vector<Trajectory>& family,
                                   const std::vector<double>& scale, int k_cut,
                                   const LPSpec& spec, int k_lo) {
    if (family.size() != scale.size())
        throw ConfigError("gauge_diagnostics: family and scale lists differ in length");
    if (family.size() < 2)
        throw ConfigError("gauge_diagnostics: need at least two scales to fit slopes");

    GaugeDiagnostics d;
    d.scale = scale;

    for (const Trajectory& traj : family) {
        if (traj.frames() < 3)
            throw ConfigError("gauge_diagnostics: each run needs at least 3 frames");
        const double dt = traj.dt();
        const std::size_t F = traj.frames();
        const Grid& g = traj.grid;

        std::vector<GaugeField> gauge;
        gauge.reserve(F);
        for (std::size_t i = 0; i < F; ++i)
            gauge.push_back(build_gauge(traj.u[i], traj.ut[i], k_cut, spec, k_lo));

        std::vector<MatField> gram;
        gram.reserve(F);
        double utu = 0.0, u_inf = 0.0, uinv_inf = 0.0;
        for (std::size_t i = 0; i < F; ++i) {
            gram.push_back(utu_minus_identity(gauge[i].U));
            utu = std::max(utu, mat_linf(gram.back()));
            u_inf = std::max(u_inf, mat_linf(gauge[i].U));
            for (std::size_t x = 0; x < g.points(); ++x) {
                const Mat3 m = gauge[i].U.at(x);
                const double det = det3(m);
                if (std::abs(det) < kDetGuard) {
                    d.invertible = false;
                    continue;
                }
                const Mat3 inv = inv3(m, det);
                for (double e : inv) uinv_inf = std::max(uinv_inf, std::abs(e));
            }
        }
        d.utu_dev.push_back(utu);
        d.u_inf.push_back(u_inf);
        d.uinv_inf.push_back(uinv_inf);

        const auto gram_dt = time_derivative(gram, dt, mat_diff_scaled);
        double gdt = 0.0;
        for (const auto& mf : gram_dt) gdt = std::max(gdt, mat_linf(mf));
        d.utu_dev_dt.push_back(gdt);

        // Per-direction derivative stacks: slot 0 is time.
        std::vector<std::vector<MatField>> dU;
        {
            std::vector<MatField> useq;
            useq.reserve(F);
            for (const auto& gf : gauge) useq.push_back(gf.U);
            dU.push_back(time_derivative(useq, dt, mat_diff_scaled));
        }
        for (int axis = 0; axis < g.n; ++axis) {
            std::vector<MatField> seq;
            seq.reserve(F);
            for (const auto& gf : gauge) seq.push_back(mat_axis_derivative(gf.U, axis));
            dU.push_back(std::move(seq));
        }

        double dmau_total = 0.0, du_inf = 0.0, du_l2t = 0.0;
        for (std::size_t alpha = 0; alpha < dU.size(); ++alpha) {
            std::vector<double> sup_r(F), sup_d(F);
            for (std::size_t i = 0; i < F; ++i) {
                const MatField resid =
                    mat_sub(dU[alpha][i], mat_mul_field(gauge[i].A[alpha], gauge[i].U));
                sup_r[i] = mat_linf(resid);
                sup_d[i] = mat_linf(dU[alpha][i]);
                du_inf = std::max(du_inf, sup_d[i]);
            }
            dmau_total += trapezoid(traj.times, sup_r);
            std::vector<double> sq(F);
            for (std::size_t i = 0; i < F; ++i) sq[i] = sup_d[i] * sup_d[i];
            du_l2t = std::max(du_l2t, std::sqrt(trapezoid(traj.times, sq)));
        }
        d.du_minus_au.push_back(dmau_total);
        d.du_inf.push_back(du_inf);
        d.du_l2t_linfx.push_back(du_l2t);

        std::vector<double> itimes, il2;
        for (std::size_t i = 1; i + 1 < F; ++i) {
            MatField box = mat_laplacian(gauge[i].U);
            for (int e = 0; e < 9; ++e)
                for (std::size_t x = 0; x < g.points(); ++x)
                    box.m[e][x] = (gauge[i + 1].U.m[e][x] - 2.0 * gauge[i].U.m[e][x] +
                                   gauge[i - 1].U.m[e][x]) / (dt * dt) - box.m[e][x];
            itimes.push_back(traj.times[i]);
            il2.push_back(mat_l2(box));
        }
        std::vector<double> sq(il2.size());
        for (std::size_t i = 0; i < il2.size(); ++i) sq[i] = il2[i] * il2[i];
        d.boxu_l2.push_back(std::sqrt(trapezoid(itimes, sq)));
    }

    std::vector<double> lx(scale.size());
    for (std::size_t i = 0; i < scale.size(); ++i) lx[i] = std::log2(scale[i]);
    const auto fit = [&](const std::vector<double>& col) {
        std::vector<double> ly(col.size());
        for (std::size_t i = 0; i < col.size(); ++i)
            ly[i] = std::log2(std::max(col[i], 1e-300));
        return fit_slope(lx, ly);
    };
    d.slope_utu = fit(d.utu_dev);
    d.slope_du_minus_au = fit(d.du_minus_au);

    // Monotonicity along shrinking scales, with roundoff slack.
    std::vector<std::size_t> order(scale.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scale[a] > scale[b]; });
    const auto column_monotone = [&](const std::vector<double>& col) {
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            if (col[order[i + 1]] > col[order[i]] * (1.0 + 1e-9) + 1e-300) return false;
        return true;
    };
    for (const auto* col : {&d.utu_dev, &d.utu_dev_dt, &d.u_inf, &d.uinv_inf,
                            &d.du_minus_au, &d.du_inf, &d.du_l2t_linfx, &d.boxu_l2})
        if (!column_monotone(*col)) d.monotone = false;

    return d;
}

GaugeResidualReport gauge_residual(const Trajectory& traj, int k_cut,
                                   const LPSpec& spec, int k_lo) {
    if (traj.frames() < 3)
        throw ConfigError("gauge_residual: need at least 3 frames");
    if (!spec.in_range(0))
        throw ConfigError("gauge_residual: shell 0 lies outside the grid's shell range");
    const double dt = traj.dt();
    const std::size_t F = traj.frames();
    const Grid& g = traj.grid;

    std::vector<GaugeField> gauge;
    std::vector<MatField> uinv;
    std::vector<VecField> u0, w;
    gauge.reserve(F);
    uinv.reserve(F);
    u0.reserve(F);
    w.reserve(F);
    for (std::size_t i = 0; i < F; ++i) {
        gauge.push_back(build_gauge(traj.u[i], traj.ut[i], k_cut, spec, k_lo));
        MatField inv = MatField::zero(g);
        for (std::size_t x = 0; x < g.points(); ++x) {
            const Mat3 m = gauge[i].U.at(x);
            const double det = det3(m);
            if (std::abs(det) < kDetGuard)
                throw NumericError("gauge_residual: determinant " + std::to_string(det) +
                                   " below guard at frame " + std::to_string(i));
            inv.set(x, inv3(m, det));
        }
        uinv.push_back(std::move(inv));
        u0.push_back(lp_project(traj.u[i], 0, spec));
        w.push_back(mat_vec_field(uinv[i], u0[i]));
    }

    std::vector<MatField> useq;
    useq.reserve(F);
    for (const auto& gf : gauge) useq.push_back(gf.U);
    const auto dtU = time_derivative(useq, dt, mat_diff_scaled);
    const auto dtw = time_derivative(w, dt, vec_diff_scaled);
    const auto dtu0 = time_derivative(u0, dt, vec_diff_scaled);

    std::vector<double> itimes, r_resid, r_base;
    std::array<std::vector<double>, 3> r_groups;
    for (std::size_t i = 1; i + 1 < F; ++i) {
        // Box of the gauged field from centered differences and the spectral
        // Laplacian.
        VecField boxw(g);
        for (int c = 0; c < 3; ++c)
            for (std::size_t x = 0; x < g.points(); ++x)
                boxw.c[c][x] = (w[i + 1].c[c][x] - 2.0 * w[i].c[c][x] +
                                w[i - 1].c[c][x]) / (dt * dt);
        {
            const VecField lap = laplacian(w[i]);
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    boxw.c[c][x] -= lap.c[c][x];
        }

        // g1 = -2 U^{-1} (d_alpha U - A_alpha U) d^alpha w, indices raised
        // with the (+,-) signature.
        VecField bracket1(g);
        {
            const MatField rt = mat_sub(dtU[i], mat_mul_field(gauge[i].A[0], gauge[i].U));
            const VecField term = mat_vec_field(rt, dtw[i]);
            bracket1 = term;
            for (int axis = 0; axis < g.n; ++axis) {
                const MatField ra = mat_sub(mat_axis_derivative(gauge[i].U, axis),
                                            mat_mul_field(gauge[i].A[axis + 1], gauge[i].U));
                const VecField ta = mat_vec_field(ra, derivative(w[i], axis));
                for (int c = 0; c < 3; ++c)
                    for (std::size_t x = 0; x < g.points(); ++x)
                        bracket1.c[c][x] -= ta.c[c][x];
            }
        }
        VecField g1 = mat_vec_field(uinv[i], bracket1);
        for (int c = 0; c < 3; ++c)
            for (double& v : g1.c[c]) v *= -2.0;

        // g2 = +2 U^{-1} A^alpha (d_alpha U) U^{-1} u0.
        VecField w0 = mat_vec_field(uinv[i], u0[i]);
        VecField bracket2 = mat_vec_field(mat_mul_field(gauge[i].A[0], dtU[i]), w0);
        for (int axis = 0; axis < g.n; ++axis) {
            const VecField ta = mat_vec_field(
                mat_mul_field(gauge[i].A[axis + 1],
                              mat_axis_derivative(gauge[i].U, axis)), w0);
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    bracket2.c[c][x] -= ta.c[c][x];
        }
        VecField g2 = mat_vec_field(uinv[i], bracket2);
        for (int c = 0; c < 3; ++c)
            for (double& v : g2.c[c]) v *= 2.0;

        // g3 = -U^{-1} (Box U) U^{-1} u0.
        MatField boxU = mat_laplacian(gauge[i].U);
        for (int e = 0; e < 9; ++e)
            for (std::size_t x = 0; x < g.points(); ++x)
                boxU.m[e][x] = (gauge[i + 1].U.m[e][x] - 2.0 * gauge[i].U.m[e][x] +
                                gauge[i - 1].U.m[e][x]) / (dt * dt) - boxU.m[e][x];
        VecField g3 = mat_vec_field(uinv[i], mat_vec_field(boxU, w0));
        for (int c = 0; c < 3; ++c)
            for (double& v : g3.c[c]) v = -v;

        VecField resid(g);
        for (int c = 0; c < 3; ++c)
            for (std::size_t x = 0; x < g.points(); ++x)
                resid.c[c][x] = boxw.c[c][x] - g1.c[c][x] - g2.c[c][x] - g3.c[c][x];

        // Ungauged baseline on the same shell-0 field.
        VecField base(g);
        {
            const VecField lap = laplacian(u0[i]);
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    base.c[c][x] = (u0[i + 1].c[c][x] - 2.0 * u0[i].c[c][x] +
                                    u0[i - 1].c[c][x]) / (dt * dt) - lap.c[c][x];
            VecField adv = mat_vec_field(gauge[i].A[0], dtu0[i]);
            for (int axis = 0; axis < g.n; ++axis) {
                const VecField ta = mat_vec_field(gauge[i].A[axis + 1],
                                                  derivative(u0[i], axis));
                for (int c = 0; c < 3; ++c)
                    for (std::size_t x = 0; x < g.points(); ++x)
                        adv.c[c][x] -= ta.c[c][x];
            }
            for (int c = 0; c < 3; ++c)
                for (std::size_t x = 0; x < g.points(); ++x)
                    base.c[c][x] -= 2.0 * adv.c[c][x];
        }

        itimes.push_back(traj.times[i]);
        r_resid.push_back(l2_norm(resid));
        r_base.push_back(l2_norm(base));
        r_groups[0].push_back(l2_norm(g1));
        r_groups[1].push_back(l2_norm(g2));
        r_groups[2].push_back(l2_norm(g3));
    }

    GaugeResidualReport rep;
    rep.residual = trapezoid(itimes, r_resid);
    rep.baseline = trapezoid(itimes, r_base);
    rep.ratio = rep.baseline > 0.0 ? rep.residual / rep.baseline : 0.0;
    for (int k = 0; k < 3; ++k)
        rep.group_norms[static_cast<std::size_t>(k)] = trapezoid(itimes, r_groups[static_cast<std::size_t>(k)]);
    return rep;
}

// ---------------------------------------------------------------------------
// Error-norm bookkeeping.
// ---------------------------------------------------------------------------

ErrorNormReport error_norm(const SpaceTimeBlock& F, double C0, double c0, double eps) {
    F.validate();
    ErrorNormReport rep;
    rep.value = spacetime_norm(F, NormSpec::lpt_lqx(1.0, 2.0));
    rep.threshold = C0 * C0 * C0 * c0 * eps;
    rep.pass = rep.value <= rep.threshold;
    return rep;
}

// ---------------------------------------------------------------------------
// Distance-field regularity.
// ---------------------------------------------------------------------------

DistanceBesovReport distance_field_besov(const VecField& u, const TargetSpec& target,
                                         double s, const LPSpec& spec) {
    target.validate();
    if (s > u.grid.n / 2.0 + 1e-12)
        throw ConfigError("distance_field_besov: s must not exceed n/2");

    // distance_field evaluates arccosh(max(x, 1)), which agrees pointwise
    // with the smooth vanishing extension theta(x)*arccosh(max(x, 1)): the
    // mollifier only ever multiplies zero below the join.
    const RealField dist = distance_field(u, target);

    DistanceBesovReport rep;
    rep.value = besov_sum(dist, s, spec);
    double comp = 0.0;
    for (int c = 0; c < 3; ++c) {
        RealField plane(u.grid);
        for (std::size_t x = 0; x < u.grid.points(); ++x)
            plane[x] = u.c[c][x] - target.base[c];
        comp += besov_sum(plane, s, spec);
    }
    rep.component_norm = comp;
    rep.ratio = comp > 0.0 ? rep.value / comp : 0.0;
    return rep;
}

} // namespace hwm
