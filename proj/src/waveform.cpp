#include "hwm/waveform.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hwm/dynamics.hpp"
#include "hwm/errors.hpp"
#include "hwm/spectral.hpp"

namespace hwm {

namespace {

VecField add(const VecField& a, const VecField& b) {
    VecField out(a.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.size(); ++i)
            out.c[c][i] = a.c[c][i] + b.c[c][i];
    return out;
}

VecField sub(const VecField& a, const VecField& b) {
    VecField out(a.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.size(); ++i)
            out.c[c][i] = a.c[c][i] - b.c[c][i];
    return out;
}

VecField cross_field(const VecField& a, const VecField& b, int eta) {
    VecField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i)
        out.set(i, cross_eta(a.at(i), b.at(i), eta));
    return out;
}

// The three groups without the on-target gate; used by solvers whose states
// drift off the manifold at discretization order.
WaveRhsGroups rhs_groups_raw(const VecField& u, const VecField& ut, int eta) {
    const Grid& g = u.grid;
    const VecField V = fractional_laplacian(u, 0.5);

    WaveRhsGroups out;

    // (i): eta (grad u .eta grad u - u_t .eta u_t) u, gradients spatial.
    std::vector<double> quad(g.points(), 0.0);
    for (int axis = 0; axis < g.n; ++axis) {
        const VecField da = derivative(u, axis);
        for (std::size_t i = 0; i < da.size(); ++i)
            quad[i] += dot_eta(da.at(i), da.at(i), eta);
    }
    out.group_i = VecField(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double s = eta * (quad[i] - dot_eta(ut.at(i), ut.at(i), eta));
        const Vec3 p = u.at(i);
        out.group_i.set(i, {s * p[0], s * p[1], s * p[2]});
    }

    // (ii): eta Pi[(u .eta V) V].
    VecField uv(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double s = dot_eta(u.at(i), V.at(i), eta);
        const Vec3 p = V.at(i);
        uv.set(i, {s * p[0], s * p[1], s * p[2]});
    }
    out.group_ii = tangent_project(uv, u, eta);
    for (int c = 0; c < 3; ++c)
        for (double& v : out.group_ii.c[c]) v *= eta;

    // (iii): Pi[u x (-Lap)^{1/2}(u x V) - u x (u x (-Lap)u)].
    const VecField inner = cross_field(u, V, eta);
    const VecField lift = fractional_laplacian(inner, 0.5);
    const VecField neglap = fractional_laplacian(u, 1.0);
    const VecField t1 = cross_field(u, lift, eta);
    const VecField t2 = cross_field(u, cross_field(u, neglap, eta), eta);
    out.group_iii = tangent_project(sub(t1, t2), u, eta);

    return out;
}

void require_on_target(const VecField& u, const TargetSpec& target, const char* who) {
    const double viol = constraint_violation(u, target);
    if (viol > 1e-6)
        throw DomainError(std::string(who) + ": field off the target manifold, violation " +
                          std::to_string(viol));
}

// One exact-propagator step with a frozen midpoint forcing spectrum.
void duhamel_step(VecSpectralField& uh, VecSpectralField& vh,
                  const VecSpectralField& fh, double dt) {
    const Grid& g = uh.grid;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.points(); ++i) {
            const double w = g.xi_abs(i);
            const std::complex<double> a = uh.comp[c].c[i];
            const std::complex<double> b = vh.comp[c].c[i];
            const std::complex<double> f = fh.comp[c].c[i];
            if (w > 1e-14) {
                const double cw = std::cos(w * dt);
                const double sw = std::sin(w * dt);
                uh.comp[c].c[i] = cw * a + (sw / w) * b + (dt * std::sin(w * dt / 2.0) / w) * f;
                vh.comp[c].c[i] = -w * sw * a + cw * b + dt * std::cos(w * dt / 2.0) * f;
            } else {
                uh.comp[c].c[i] = a + dt * b + 0.5 * dt * dt * f;
                vh.comp[c].c[i] = b + dt * f;
            }
        }
}

long frame_steps(double T, double dt) {
    return static_cast<long>(std::ceil(T / dt - 1e-9));
}

// Shared driver: forcing supplied per half step as a spectral field.
Trajectory duhamel_run(const VecField& f, const VecField& g, double T, double dt,
                       int eta,
                       const std::function<VecSpectralField(long, double)>& half_forcing) {
    if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("duhamel: T and dt must be positive");
    if (!(f.grid == g.grid)) throw ConfigError("duhamel: data grids differ");
    const long steps = frame_steps(T, dt);

    Trajectory traj;
    traj.grid = f.grid;
    traj.eta = eta;
    VecSpectralField uh = transform(f);
    VecSpectralField vh = transform(g);
    for (long i = 0; i <= steps; ++i) {
        traj.times.push_back(static_cast<double>(i) * dt);
        traj.u.push_back(inverse_transform(uh));
        traj.ut.push_back(inverse_transform(vh));
        if (i == steps) break;
        const VecSpectralField fh = half_forcing(i, (static_cast<double>(i) + 0.5) * dt);
        duhamel_step(uh, vh, fh, dt);
    }
    return traj;
}

double proxy_norm(const VecField& d) {
    return spatial_norm(d, NormSpec::sobolev(d.grid.n / 2.0)) + l2_norm(d);
}

double proxy_dist(const Trajectory& a, const Trajectory& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.frames(); ++i)
        m = std::max(m, proxy_norm(sub(a.u[i], b.u[i])));
    return m;
}

std::string history_string(const std::vector<double>& h) {
    std::ostringstream os;
    for (std::size_t i = 0; i < h.size(); ++i) os << (i ? ", " : "") << h[i];
    return os.str();
}

} // namespace

VecField WaveRhsGroups::total() const {
    return add(add(group_i, group_ii), group_iii);
}

WaveRhsGroups wave_rhs_groups(const VecField& u, const VecField& ut,
                              const TargetSpec& target) {
    target.validate();
    require_on_target(u, target, "wave_rhs");
    return rhs_groups_raw(u, ut, target.eta);
}

VecField wave_rhs(const VecField& u, const VecField& ut, const TargetSpec& target) {
    return wave_rhs_groups(u, ut, target).total();
}

WaveResidualReport box_residual(const Trajectory& traj) {
    if (traj.frames() < 3)
        throw ConfigError("box_residual: need at least 3 frames for centered differences");
    const double dt = traj.dt();
    WaveResidualReport rep;
    for (std::size_t i = 1; i + 1 < traj.frames(); ++i) {
        const Grid& g = traj.grid;
        VecField box(g);
        for (int c = 0; c < 3; ++c)
            for (std::size_t x = 0; x < g.points(); ++x)
                box.c[c][x] = (traj.u[i + 1].c[c][x] - 2.0 * traj.u[i].c[c][x] +
                               traj.u[i - 1].c[c][x]) / (dt * dt);
        box = sub(box, laplacian(traj.u[i]));
        const WaveRhsGroups groups = rhs_groups_raw(traj.u[i], traj.ut[i], traj.eta);
        rep.times.push_back(traj.times[i]);
        rep.total.push_back(l2_norm(sub(box, groups.total())));
        rep.group_i.push_back(l2_norm(groups.group_i));
        rep.group_ii.push_back(l2_norm(groups.group_ii));
        rep.group_iii.push_back(l2_norm(groups.group_iii));
    }
    return rep;
}

double WaveResidualReport::max_total() const {
    double m = 0.0;
    for (double v : total) m = std::max(m, v);
    return m;
}

VecField x_field(const VecField& u, const VecField& ut, const TargetSpec& target) {
    target.validate();
    const VecField v = fractional_laplacian(u, 0.5);
    return sub(ut, cross_field(u, v, target.eta));
}

double default_tilde_exponent(int n) { return (n - 3) / 4.0; }

double tilde_energy(const VecField& X, const TargetSpec& target, double exponent) {
    const VecSpectralField sp = transform(X);
    const Grid& g = X.grid;
    if (exponent < 0.0) {
        double mean_sq = 0.0, total_sq = 0.0;
        for (int c = 0; c < 3; ++c) {
            mean_sq += std::norm(sp.comp[c].c[0]);
            for (const auto& z : sp.comp[c].c) total_sq += std::norm(z);
        }
        if (mean_sq > 1e-24 * std::max(1.0, g.box_volume() * total_sq))
            throw DomainError("tilde_energy: negative exponent requires a mean-free field");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double w = g.xi_abs(i);
        double mult;
        if (i == 0)
            mult = (exponent == 0.0) ? 1.0 : 0.0;
        else
            mult = std::pow(w, 4.0 * exponent);
        if (mult == 0.0) continue;
        const double signed_sq = target.eta * std::norm(sp.comp[0].c[i]) +
                                 std::norm(sp.comp[1].c[i]) + std::norm(sp.comp[2].c[i]);
        acc += mult * signed_sq;
    }
    return 0.5 * g.box_volume() * acc;
}

Trajectory duhamel_solve(const VecField& f, const VecField& g,
                         const ForcingFn& forcing, double T, double dt,
                         const TargetSpec& target) {
    target.validate();
    return duhamel_run(f, g, T, dt, target.eta,
                       [&](long, double t_half) -> VecSpectralField {
                           if (!forcing) return VecSpectralField(f.grid);
                           return transform(forcing(t_half));
                       });
}

double linear_wave_energy(const VecField& u, const VecField& ut) {
    const VecSpectralField uh = transform(u);
    const VecSpectralField vh = transform(ut);
    double acc = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < u.grid.points(); ++i) {
            const double w = u.grid.xi_abs(i);
            acc += std::norm(vh.comp[c].c[i]) + w * w * std::norm(uh.comp[c].c[i]);
        }
    return 0.5 * u.grid.box_volume() * acc;
}

Trajectory wave_evolve(const VecField& f, const VecField& g,
                       const TargetSpec& target, double T, double dt) {
    target.validate();
    if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("wave_evolve: T and dt must be positive");
    const long steps = frame_steps(T, dt);

    Trajectory traj;
    traj.grid = f.grid;
    traj.eta = target.eta;
    VecField u = f;
    VecField ut = g;
    for (long i = 0; i <= steps; ++i) {
        if (!all_finite(u) || !all_finite(ut))
            throw NumericError("wave_evolve: non-finite field at frame " + std::to_string(i));
        traj.times.push_back(static_cast<double>(i) * dt);
        traj.u.push_back(u);
        traj.ut.push_back(ut);
        if (i == steps) break;

        // Taylor predictor to the half step, then one exact-propagator step
        // with the forcing frozen at the predicted midpoint state.
        const VecField acc = add(laplacian(u), rhs_groups_raw(u, ut, target.eta).total());
        VecField umid(u.grid), vmid(u.grid);
        for (int c = 0; c < 3; ++c)
            for (std::size_t x = 0; x < u.size(); ++x) {
                umid.c[c][x] = u.c[c][x] + 0.5 * dt * ut.c[c][x] +
                               0.125 * dt * dt * acc.c[c][x];
                vmid.c[c][x] = ut.c[c][x] + 0.5 * dt * acc.c[c][x];
            }
        const VecSpectralField fh = transform(rhs_groups_raw(umid, vmid, target.eta).total());
        VecSpectralField uh = transform(u);
        VecSpectralField vh = transform(ut);
        duhamel_step(uh, vh, fh, dt);
        u = inverse_transform(uh);
        ut = inverse_transform(vh);
    }
    return traj;
}

PicardResult picard_solve(const VecField& f, const VecField& g,
                          const TargetSpec& target, const PicardSettings& s) {
    target.validate();
    if (!(s.T > 0.0) || !(s.dt > 0.0) || s.T < s.dt)
        throw ConfigError("picard: need 0 < dt <= T");
    const int eta = target.eta;
    const long steps = frame_steps(s.T, s.dt);
    const std::size_t frames = static_cast<std::size_t>(steps) + 1;

    const auto run_with_frames = [&](const std::vector<VecField>& F) {
        return duhamel_run(f, g, s.T, s.dt, eta,
                           [&](long i, double) -> VecSpectralField {
                               VecField half(f.grid);
                               const auto& a = F[static_cast<std::size_t>(i)];
                               const auto& b = F[static_cast<std::size_t>(i) + 1];
                               for (int c = 0; c < 3; ++c)
                                   for (std::size_t x = 0; x < half.size(); ++x)
                                       half.c[c][x] = 0.5 * (a.c[c][x] + b.c[c][x]);
                               return transform(half);
                           });
    };

    PicardResult res;
    Trajectory outer = duhamel_run(f, g, s.T, s.dt, eta,
                                   [&](long, double) { return VecSpectralField(f.grid); });
    res.log.sphere_violation.push_back(
        sphere_preservation_check(outer, target));

    for (int j = 2; j <= s.max_outer + 1; ++j) {
        // Nonlocal groups frozen at the previous outer iterate.
        std::vector<VecField> frozen;
        frozen.reserve(frames);
        for (std::size_t i = 0; i < frames; ++i) {
            const WaveRhsGroups gr = rhs_groups_raw(outer.u[i], outer.ut[i], eta);
            frozen.push_back(add(gr.group_ii, gr.group_iii));
        }

        // Inner relaxation of the quadratic group, restarting from the free wave.
        Trajectory inner = duhamel_run(f, g, s.T, s.dt, eta,
                                       [&](long, double) { return VecSpectralField(f.grid); });
        int sweeps = 0;
        bool inner_ok = false;
        std::vector<double> inner_hist;
        for (int it = 1; it <= s.max_inner; ++it) {
            std::vector<VecField> F;
            F.reserve(frames);
            for (std::size_t i = 0; i < frames; ++i)
                F.push_back(add(rhs_groups_raw(inner.u[i], inner.ut[i], eta).group_i,
                                frozen[i]));
            Trajectory next = run_with_frames(F);
            const double d = proxy_dist(next, inner);
            inner = std::move(next);
            inner_hist.push_back(d);
            sweeps = it;
            if (d < s.tol_inner) {
                inner_ok = true;
                break;
            }
        }
        if (!inner_ok)
            throw NumericError("picard: inner relaxation failed to settle, history: " +
                               history_string(inner_hist));

        const double diff = proxy_dist(inner, outer);
        res.log.outer_diff.push_back(diff);
        res.log.inner_counts.push_back(sweeps);
        if (res.log.outer_diff.size() > 1) {
            const double prev = res.log.outer_diff[res.log.outer_diff.size() - 2];
            res.log.contraction.push_back(prev > 0.0 ? diff / prev : 0.0);
        }
        outer = std::move(inner);
        res.log.sphere_violation.push_back(sphere_preservation_check(outer, target));
        res.log.iterations = j - 1;
        if (diff < s.tol_outer) {
            res.log.converged = true;
            break;
        }
    }
    if (!res.log.converged)
        throw NumericError("picard: no contraction after " + std::to_string(s.max_outer) +
                           " outer stages, difference history: " +
                           history_string(res.log.outer_diff));
    res.traj = std::move(outer);
    return res;
}

double sphere_preservation_check(const Trajectory& traj, const TargetSpec& target) {
    double m = 0.0;
    for (const auto& fr : traj.u)
        m = std::max(m, constraint_violation(fr, target));
    return m;
}

} // namespace hwm
