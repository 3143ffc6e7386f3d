#include "hwm/dynamics.hpp"

#include <cmath>
#include <string>

#include "hwm/errors.hpp"
#include "hwm/spectral.hpp"

namespace hwm {

namespace {

// Evaluates u x_eta (-Lap)^{1/2} u without the on-manifold gate. Integrator
// stage points sit O(dt^2) off the target, which is expected and harmless;
// the gate belongs on user-facing entry points only.
VecField rhs_raw(const VecField& u, int eta) {
    const VecField v = fractional_laplacian(u, 0.5);
    VecField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i)
        out.set(i, cross_eta(u.at(i), v.at(i), eta));
    return out;
}

VecField axpy(const VecField& u, double a, const VecField& d) {
    VecField out(u.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < u.size(); ++i)
            out.c[c][i] = u.c[c][i] + a * d.c[c][i];
    return out;
}

double max_abs_diff(const VecField& a, const VecField& b) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max(m, std::abs(a.c[c][i] - b.c[c][i]));
    return m;
}

VecField rk4_step(const VecField& u, double dt, int eta) {
    const VecField k1 = rhs_raw(u, eta);
    const VecField k2 = rhs_raw(axpy(u, dt / 2.0, k1), eta);
    const VecField k3 = rhs_raw(axpy(u, dt / 2.0, k2), eta);
    const VecField k4 = rhs_raw(axpy(u, dt, k3), eta);
    VecField out(u.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < u.size(); ++i)
            out.c[c][i] = u.c[c][i] + dt / 6.0 *
                          (k1.c[c][i] + 2.0 * k2.c[c][i] + 2.0 * k3.c[c][i] + k4.c[c][i]);
    return out;
}

// Implicit midpoint by fixed-point iteration on the stage slope.
VecField midpoint_step(const VecField& u, double dt, int eta, long step_index) {
    VecField k = rhs_raw(u, eta);
    for (int it = 0; it < 50; ++it) {
        const VecField next = rhs_raw(axpy(u, dt / 2.0, k), eta);
        const double delta = max_abs_diff(next, k);
        k = next;
        if (delta < 1e-13) return axpy(u, dt, k);
    }
    throw NumericError("midpoint step: stage iteration failed to settle at step " +
                       std::to_string(step_index));
}

} // namespace

void SimConfig::validate() const {
    target.validate();
    if (dt == 0.0 || !std::isfinite(dt))
        throw ConfigError("sim: dt must be a nonzero finite number");
    // T/dt >= 1 admits the reversed-time runs used by diagnostics while still
    // requiring at least one step; the user-facing config additionally pins
    // dt > 0.
    if (!(T / dt >= 1.0 - 1e-12))
        throw ConfigError("sim: horizon must cover at least one step of the given sign");
    if (retract_every < 1) throw ConfigError("sim: retractEvery must be >= 1");
    if (diagnostics_every < 1) throw ConfigError("sim: diagnosticsEvery must be >= 1");
}

double SimConfig::dt_cap(const Grid& g) { return 2.5 / g.xi_max(); }

VecField halfwave_rhs(const VecField& u, const TargetSpec& target) {
    target.validate();
    const double viol = constraint_violation(u, target);
    if (viol > 1e-6)
        throw DomainError("halfwave_rhs: field is off the target manifold, violation " +
                          std::to_string(viol));
    return rhs_raw(u, target.eta);
}

double energy(const VecField& u, const TargetSpec& target) {
    const VecSpectralField sp = transform(u);
    const double vol = u.grid.box_volume();
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = u.grid.xi_abs(i);
        if (w == 0.0) continue;
        const double signed_sq = target.eta * std::norm(sp.comp[0].c[i]) +
                                 std::norm(sp.comp[1].c[i]) + std::norm(sp.comp[2].c[i]);
        acc += w * signed_sq;
    }
    return vol * acc;
}

double energy_unsigned(const VecField& u) {
    return energy(u, TargetSpec::sphere());
}

VecField step(const VecField& u, const SimConfig& cfg, long step_index) {
    cfg.validate();
    const VecField raw = (cfg.integrator == Integrator::Rk4Retract)
                             ? rk4_step(u, cfg.dt, cfg.target.eta)
                             : midpoint_step(u, cfg.dt, cfg.target.eta, step_index);
    try {
        return retract(raw, cfg.target);
    } catch (const DomainError& e) {
        throw NumericError(std::string(e.what()) + " [step " + std::to_string(step_index) + "]");
    }
}

EvolveResult evolve(const VecField& u0, const SimConfig& cfg) {
    cfg.validate();
    const double viol0 = constraint_violation(u0, cfg.target);
    if (viol0 > 1e-6)
        throw DomainError("evolve: initial data off the target manifold, violation " +
                          std::to_string(viol0));

    const long steps = static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9));
    EvolveResult res;
    res.traj.grid = u0.grid;
    res.traj.eta = cfg.target.eta;
    res.traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    res.traj.u.reserve(static_cast<std::size_t>(steps) + 1);
    res.traj.ut.reserve(static_cast<std::size_t>(steps) + 1);

    VecField u = retract(u0, cfg.target);
    for (long i = 0; i <= steps; ++i) {
        if (!all_finite(u))
            throw NumericError("evolve: non-finite field at frame " + std::to_string(i));
        res.traj.times.push_back(static_cast<double>(i) * cfg.dt);
        res.traj.u.push_back(u);
        res.traj.ut.push_back(rhs_raw(u, cfg.target.eta));
        if (i == steps) break;

        const VecField raw = (cfg.integrator == Integrator::Rk4Retract)
                                 ? rk4_step(u, cfg.dt, cfg.target.eta)
                                 : midpoint_step(u, cfg.dt, cfg.target.eta, i);
        if ((i + 1) % cfg.retract_every == 0) {
            try {
                u = retract(raw, cfg.target);
            } catch (const DomainError& e) {
                throw NumericError(std::string(e.what()) + " [frame " + std::to_string(i + 1) + "]");
            }
        } else {
            u = raw;
        }
    }

    double e0 = 0.0;
    for (std::size_t i = 0; i < res.traj.frames(); ++i) {
        if (i % static_cast<std::size_t>(cfg.diagnostics_every) != 0 &&
            i + 1 != res.traj.frames())
            continue;
        const double e = energy(res.traj.u[i], cfg.target);
        if (res.report.times.empty()) e0 = e;
        res.report.times.push_back(res.traj.times[i]);
        res.report.energy.push_back(e);
        res.report.constraint_drift =
            std::max(res.report.constraint_drift,
                     constraint_violation(res.traj.u[i], cfg.target));
        res.report.energy_drift =
            std::max(res.report.energy_drift,
                     std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    }
    return res;
}

} // namespace hwm
