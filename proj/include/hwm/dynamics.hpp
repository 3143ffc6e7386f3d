#pragma once

#include <string>
#include <vector>

#include "hwm/field.hpp"
#include "hwm/geometry.hpp"
#include "hwm/grid.hpp"

namespace hwm {

enum class Integrator { Rk4Retract, MidpointRetract };

// Time-integration parameters for the half-wave flow
//   du/dt = u x_eta (-Lap)^{1/2} u.
// The stability cap reflects that (-Lap)^{1/2} is first order: explicit RK4
// has imaginary-axis stability |lambda dt| <= 2*sqrt(2), so dt <= c/xi_max
// with c = 2.5 leaving a little margin.
struct SimConfig {
    TargetSpec target;
    double dt = 0.0;
    double T = 0.0;
    Integrator integrator = Integrator::Rk4Retract;
    int retract_every = 1;
    int diagnostics_every = 1;

    // Throws ConfigError unless dt is nonzero, T covers at least one step of
    // dt's sign, and the counters are positive. Reversed-time diagnostics use
    // dt < 0; user-facing config parsing additionally pins dt > 0.
    void validate() const;
    // The cap c/xi_max for a given grid; enforced where a grid is in hand.
    static double dt_cap(const Grid& g);
};

struct EnergyReport {
    std::vector<double> times;
    std::vector<double> energy;
    double constraint_drift = 0.0; // max_t max_x |u .eta u - eta|
    double energy_drift = 0.0;     // max_t |E(t) - E(0)| / max(|E(0)|, tiny)
};

// Right side u x_eta (-Lap)^{1/2} u. Input must lie on the target to 1e-6
// pointwise; the output is .eta-orthogonal to u pointwise by construction.
VecField halfwave_rhs(const VecField& u, const TargetSpec& target);

// Conserved energy: the signed Plancherel sum
//   E = L^n sum_xi |xi| (u^(xi) .eta conj u^(xi))
// summed over components. For the sphere this is the |(-Lap)^{1/4}u|^2
// integral exactly; the signed pairing is the quantity the eta-flow conserves.
double energy(const VecField& u, const TargetSpec& target);
// The unsigned (all-plus) variant, for side-by-side comparison on H2 runs.
double energy_unsigned(const VecField& u);

// One integrator step followed by retraction. step_index only labels errors.
VecField step(const VecField& u, const SimConfig& cfg, long step_index = 0);

struct EvolveResult {
    Trajectory traj;
    EnergyReport report;
};

// ceil(T/dt)+1 frames; u_t stored as halfwave_rhs of each frame so that
// consistency diagnostics hold to integrator order, not differencing order.
// NaN or retraction failure aborts with the frame index in the message.
EvolveResult evolve(const VecField& u0, const SimConfig& cfg);

} // namespace hwm
