#include "hwm/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwm/errors.hpp"
#include "hwm/fft.hpp"

namespace hwm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int time_mode(int i, int M) { return i < (M + 1) / 2 ? i : i - M; }

// Full space-time spectrum of one block component, time axis outermost,
// forward normalization 1/(M * N^n).
struct StSpectrum {
    Grid grid;
    int M = 0;
    double tau_unit = 0.0;
    std::array<std::vector<std::complex<double>>, 3> c;
};

std::vector<int> st_dims(const Grid& g, int M) {
    std::vector<int> dims{M};
    for (int a = 0; a < g.n; ++a) dims.push_back(g.N);
    return dims;
}

StSpectrum st_transform(const SpaceTimeBlock& b) {
    b.validate();
    StSpectrum sp;
    sp.grid = b.grid;
    sp.M = static_cast<int>(b.frame_count());
    sp.tau_unit = 2.0 * M_PI / b.duration();
    const std::size_t P = b.grid.points();
    const std::vector<int> dims = st_dims(b.grid, sp.M);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(sp.M) * P);
    for (int comp = 0; comp < 3; ++comp) {
        for (int t = 0; t < sp.M; ++t)
            for (std::size_t x = 0; x < P; ++x)
                buf[static_cast<std::size_t>(t) * P + x] = {b.frames[static_cast<std::size_t>(t)].c[comp][x], 0.0};
        sp.c[comp].resize(buf.size());
        dft(dims, buf.data(), sp.c[comp].data(), true);
    }
    return sp;
}

SpaceTimeBlock st_inverse(const StSpectrum& sp, const SpaceTimeBlock& like) {
    SpaceTimeBlock out;
    out.grid = like.grid;
    out.times = like.times;
    out.taper = like.taper;
    const std::size_t P = like.grid.points();
    out.frames.assign(like.frame_count(), VecField(like.grid));
    const std::vector<int> dims = st_dims(like.grid, sp.M);
    std::vector<std::complex<double>> buf(sp.c[0].size());
    for (int comp = 0; comp < 3; ++comp) {
        dft(dims, sp.c[comp].data(), buf.data(), false);
        for (int t = 0; t < sp.M; ++t)
            for (std::size_t x = 0; x < P; ++x)
                out.frames[static_cast<std::size_t>(t)].c[comp][x] =
                    buf[static_cast<std::size_t>(t) * P + x].real();
    }
    return out;
}

double cone_distance(const StSpectrum& sp, int t, std::size_t x) {
    const double tau = sp.tau_unit * time_mode(t, sp.M);
    return std::abs(std::abs(tau) - sp.grid.xi_abs(x));
}

// L^q over the grid of a nonnegative magnitude sample set.
double lq_space(const Grid& g, const std::vector<double>& m, double q) {
    if (q == kInf) {
        double best = 0.0;
        for (double v : m) best = std::max(best, v);
        return best;
    }
    double acc = 0.0;
    for (double v : m) acc += std::pow(v, q);
    return std::pow(g.cell_volume() * acc, 1.0 / q);
}

// L^p over the frame samples, trapezoid weights for finite p.
double lp_time(const std::vector<double>& a, double dt, double p) {
    if (p == kInf) {
        double best = 0.0;
        for (double v : a) best = std::max(best, v);
        return best;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
        acc += w * std::pow(a[i], p);
    }
    return std::pow(dt * acc, 1.0 / p);
}

// Pointwise Euclidean magnitude across every component of every listed block.
std::vector<double> frame_magnitude(const std::vector<const SpaceTimeBlock*>& blocks,
                                    std::size_t t) {
    const std::size_t P = blocks[0]->grid.points();
    std::vector<double> m(P, 0.0);
    for (const auto* b : blocks)
        for (int comp = 0; comp < 3; ++comp) {
            const auto& plane = b->frames[t].c[comp];
            for (std::size_t x = 0; x < P; ++x) m[x] += plane[x] * plane[x];
        }
    for (double& v : m) v = std::sqrt(v);
    return m;
}

double lpt_lqx_multi(const std::vector<const SpaceTimeBlock*>& blocks, double s,
                     double p, double q) {
    const SpaceTimeBlock& b0 = *blocks[0];
    std::vector<const SpaceTimeBlock*> use = blocks;
    std::vector<SpaceTimeBlock> storage;
    if (s != 0.0) {
        storage.reserve(blocks.size());
        for (const auto* b : blocks) {
            SpaceTimeBlock d = *b;
            for (auto& fr : d.frames) fr = fractional_laplacian(fr, s / 2.0);
            storage.push_back(std::move(d));
        }
        use.clear();
        for (const auto& d : storage) use.push_back(&d);
    }
    std::vector<double> a(b0.frame_count());
    for (std::size_t t = 0; t < b0.frame_count(); ++t)
        a[t] = lq_space(b0.grid, frame_magnitude(use, t), q);
    return lp_time(a, b0.dt(), p);
}

// Xstheta over one or more blocks combined in quadrature: per cone shell j,
//   b_j^2 = T L^n sum_{tau,xi} w_j(d)^2 |xi|^{2s} |U^|^2,
// which by Parseval is the (flat-in-time, periodic) L2_{t,x} of |D_x|^s Q_j u.
// The xi = 0 column follows the spatial zero-mode rule: kept at s = 0,
// dropped for s > 0, and required (numerically) absent for s < 0.
double xstheta_multi(const std::vector<const SpaceTimeBlock*>& blocks, double s,
                     double theta, NormSpec::Ell ell) {
    const SpaceTimeBlock& b0 = *blocks[0];
    const QSpec qs = QSpec::infer(b0);
    const std::size_t P = b0.grid.points();
    const double measure = b0.duration() * b0.grid.box_volume();

    std::vector<double> shell_sq(static_cast<std::size_t>(qs.shells()), 0.0);
    for (const auto* blk : blocks) {
        const StSpectrum sp = st_transform(*blk);
        double total_sq = 0.0;
        double zero_col = 0.0;
        for (int comp = 0; comp < 3; ++comp)
            for (int t = 0; t < sp.M; ++t)
                for (std::size_t x = 0; x < P; ++x) {
                    const double a2 = std::norm(sp.c[comp][static_cast<std::size_t>(t) * P + x]);
                    total_sq += a2;
                    if (x == 0) zero_col += a2;
                }
        if (s < 0.0 && zero_col > 1e-24 * std::max(1.0, total_sq))
            throw DomainError("spacetime_norm: negative spatial order requires mean-free frames");
        for (int comp = 0; comp < 3; ++comp)
            for (int t = 0; t < sp.M; ++t)
                for (std::size_t x = 0; x < P; ++x) {
                    double wxi;
                    if (x == 0)
                        wxi = (s == 0.0) ? 1.0 : 0.0;
                    else
                        wxi = std::pow(b0.grid.xi_abs(x), 2.0 * s);
                    if (wxi == 0.0) continue;
                    const double a2 = std::norm(sp.c[comp][static_cast<std::size_t>(t) * P + x]);
                    if (a2 == 0.0) continue;
                    const double d = cone_distance(sp, t, x);
                    for (int j = qs.jMin; j <= qs.jMax; ++j) {
                        const double w = qs.weight(j, d);
                        if (w > 0.0)
                            shell_sq[static_cast<std::size_t>(j - qs.jMin)] += w * w * wxi * a2;
                    }
                }
    }

    double out = 0.0;
    for (int j = qs.jMin; j <= qs.jMax; ++j) {
        const double bj = std::sqrt(measure * shell_sq[static_cast<std::size_t>(j - qs.jMin)]);
        const double term = std::pow(2.0, theta * j) * bj;
        out = (ell == NormSpec::Ell::L1) ? out + term : std::max(out, term);
    }
    return out;
}

SpaceTimeBlock lp_project_block(const SpaceTimeBlock& b, int k, const LPSpec& spec) {
    SpaceTimeBlock out = b;
    for (auto& fr : out.frames) fr = lp_project(fr, k, spec);
    return out;
}

// d/dt by centered differences on the frames (one-sided at the ends), then
// the spatial derivatives, all with the same frame layout.
std::vector<SpaceTimeBlock> gradient_blocks(const SpaceTimeBlock& b) {
    std::vector<SpaceTimeBlock> out;
    const std::size_t M = b.frame_count();
    const double dt = b.dt();

    SpaceTimeBlock dtb = b;
    for (std::size_t t = 0; t < M; ++t) {
        VecField d(b.grid);
        for (int comp = 0; comp < 3; ++comp) {
            const std::size_t lo = t == 0 ? 0 : t - 1;
            const std::size_t hi = t + 1 == M ? M - 1 : t + 1;
            const double denom = dt * static_cast<double>(hi - lo);
            for (std::size_t x = 0; x < b.grid.points(); ++x)
                d.c[comp][x] = (b.frames[hi].c[comp][x] - b.frames[lo].c[comp][x]) / denom;
        }
        dtb.frames[t] = std::move(d);
    }
    out.push_back(std::move(dtb));

    for (int axis = 0; axis < b.grid.n; ++axis) {
        SpaceTimeBlock da = b;
        for (auto& fr : da.frames) fr = derivative(fr, axis);
        out.push_back(std::move(da));
    }
    return out;
}

std::vector<std::pair<double, double>> default_pairs(int n) {
    if (n == 1) return {{kInf, 2.0}};
    return {{kInf, 2.0}, {4.0, kInf}};
}

void require_admissible(double p, double q, int n) {
    if (!(p >= 2.0) || !(q >= 2.0))
        throw ConfigError("spacetime_norm: Strichartz pair needs p, q >= 2");
    const double lhs = 1.0 / p + (n - 1) / (2.0 * q);
    const double rhs = (n - 1) / 4.0;
    if (lhs > rhs + 1e-12)
        throw ConfigError("spacetime_norm: inadmissible Strichartz pair requested");
}

double snorm_value(const SpaceTimeBlock& b, const NormSpec& spec) {
    const int n = b.grid.n;
    auto pairs = spec.pairs.empty() ? default_pairs(n) : spec.pairs;
    for (const auto& [p, q] : pairs) require_admissible(p, q, n);

    const LPSpec lp = LPSpec::infer(b.grid);
    double total = 0.0;
    for (int k = lp.kMin; k <= lp.kMax; ++k) {
        const SpaceTimeBlock bk = lp_project_block(b, k, lp);
        const auto grads = gradient_blocks(bk);
        std::vector<const SpaceTimeBlock*> ptrs;
        for (const auto& gblk : grads) ptrs.push_back(&gblk);

        double best = 0.0;
        for (const auto& [p, q] : pairs) {
            const double wk = std::pow(2.0, (1.0 / p + n / q - 1.0) * k);
            best = std::max(best, wk * lpt_lqx_multi(ptrs, 0.0, p, q));
        }
        const double xpiece =
            xstheta_multi(ptrs, n / 2.0 - 1.0, 0.5, NormSpec::Ell::Sup);
        total += best + xpiece;
    }
    return total;
}

double nnorm_value(const SpaceTimeBlock& b) {
    const int n = b.grid.n;
    const LPSpec lp = LPSpec::infer(b.grid);
    const NormSpec sob = NormSpec::sobolev(n / 2.0 - 1.0);
    double total = 0.0;
    for (int k = lp.kMin; k <= lp.kMax; ++k) {
        const SpaceTimeBlock bk = lp_project_block(b, k, lp);
        std::vector<double> a(bk.frame_count());
        for (std::size_t t = 0; t < bk.frame_count(); ++t)
            a[t] = spatial_norm(bk.frames[t], sob);
        const double l1h = lp_time(a, bk.dt(), 1.0);
        const double xs = xstheta_multi({&bk}, n / 2.0 - 1.0, -0.5, NormSpec::Ell::L1);
        total += std::min(l1h, xs);
    }
    return total;
}

} // namespace

// --------------------------------------------------------------------------
// Block plumbing.
// --------------------------------------------------------------------------

double SpaceTimeBlock::dt() const {
    return times.size() > 1 ? times[1] - times[0] : 0.0;
}

double SpaceTimeBlock::duration() const {
    return dt() * static_cast<double>(frame_count());
}

void SpaceTimeBlock::validate() const {
    if (frames.size() != times.size())
        throw ConfigError("block: frame/time count mismatch");
    if (frames.size() < 2) throw ConfigError("block: need at least 2 frames");
    const double step = times[1] - times[0];
    if (!(step > 0.0)) throw ConfigError("block: times must increase");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - step) > 1e-9 * std::max(1.0, std::abs(step)))
            throw ConfigError("block: nonuniform time samples");
    for (const auto& f : frames)
        if (!(f.grid == grid)) throw ConfigError("block: frame grid mismatch");
}

SpaceTimeBlock make_block(const Trajectory& traj, Channel ch, const std::string& taper,
                          std::size_t first, std::size_t count) {
    if (first >= traj.frames()) throw ConfigError("make_block: first frame out of range");
    const std::size_t avail = traj.frames() - first;
    const std::size_t M = std::min(count, avail);
    if (M < 2) throw ConfigError("make_block: need at least 2 frames");
    if (taper != "none" && taper != "hann")
        throw ConfigError("make_block: unknown taper '" + taper + "'");

    SpaceTimeBlock b;
    b.grid = traj.grid;
    b.taper = taper;
    b.times.assign(traj.times.begin() + static_cast<std::ptrdiff_t>(first),
                   traj.times.begin() + static_cast<std::ptrdiff_t>(first + M));
    const auto& src = (ch == Channel::U) ? traj.u : traj.ut;
    b.frames.assign(src.begin() + static_cast<std::ptrdiff_t>(first),
                    src.begin() + static_cast<std::ptrdiff_t>(first + M));
    if (taper == "hann") {
        for (std::size_t i = 0; i < M; ++i) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                                   static_cast<double>(M - 1)));
            for (int comp = 0; comp < 3; ++comp)
                for (double& v : b.frames[i].c[comp]) v *= w;
        }
    }
    b.validate();
    return b;
}

QSpec QSpec::infer(const SpaceTimeBlock& b) {
    b.validate();
    const int M = static_cast<int>(b.frame_count());
    const double tau_unit = 2.0 * M_PI / b.duration();
    const double tau_max = tau_unit * (M / 2);
    QSpec q;
    q.jMin = static_cast<int>(std::floor(std::log2(tau_unit)));
    q.jMax = static_cast<int>(std::ceil(std::log2(std::max(tau_max, b.grid.xi_max()))));
    if (q.jMax <= q.jMin) q.jMax = q.jMin + 1;
    return q;
}

double QSpec::weight(int j, double d) const {
    if (!in_range(j)) return 0.0;
    if (j == jMin) return phi_cut(std::ldexp(d, -jMin));
    if (j == jMax) return 1.0 - phi_cut(std::ldexp(d, -(jMax - 1)));
    return phi_cut(std::ldexp(d, -j)) - phi_cut(std::ldexp(d, -(j - 1)));
}

SpaceTimeBlock q_project(const SpaceTimeBlock& b, int j, const QSpec& spec) {
    b.validate();
    if (b.frame_count() < 8)
        throw ConfigError("q_project: window too short, need at least 8 samples");
    StSpectrum sp = st_transform(b);
    const std::size_t P = b.grid.points();
    for (int comp = 0; comp < 3; ++comp)
        for (int t = 0; t < sp.M; ++t)
            for (std::size_t x = 0; x < P; ++x)
                sp.c[comp][static_cast<std::size_t>(t) * P + x] *=
                    spec.weight(j, cone_distance(sp, t, x));
    return st_inverse(sp, b);
}

double spacetime_norm(const SpaceTimeBlock& b, const NormSpec& spec) {
    b.validate();
    switch (spec.kind) {
    case NormSpec::Kind::LptLqx: {
        std::vector<const SpaceTimeBlock*> one{&b};
        return lpt_lqx_multi(one, spec.s, spec.p, spec.q);
    }
    case NormSpec::Kind::Xstheta: {
        if (spec.check_pairing &&
            std::abs((spec.s - b.grid.n / 2.0) - (spec.theta - 0.5)) > 1e-12)
            throw ConfigError("spacetime_norm: exponent pairing s - n/2 == theta - 1/2 violated");
        return xstheta_multi({&b}, spec.s, spec.theta, spec.ell);
    }
    case NormSpec::Kind::Snorm:
        return snorm_value(b, spec);
    case NormSpec::Kind::Nnorm:
        return nnorm_value(b);
    default:
        throw ConfigError("spacetime_norm: spec is not a space-time kind");
    }
}

Trajectory time_localize(const Trajectory& traj, double T) {
    if (!(T > 0.0)) throw ConfigError("time_localize: horizon must be positive");
    Trajectory out = traj;
    for (std::size_t i = 0; i < traj.frames(); ++i) {
        const double w = phi_cut(std::abs(traj.times[i]) / T);
        for (int comp = 0; comp < 3; ++comp) {
            for (double& v : out.u[i].c[comp]) v *= w;
            for (double& v : out.ut[i].c[comp]) v *= w;
        }
    }
    return out;
}

} // namespace hwm
