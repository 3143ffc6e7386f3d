#pragma once

#include <functional>
#include <vector>

#include "hwm/field.hpp"
#include "hwm/geometry.hpp"
#include "hwm/grid.hpp"

namespace hwm {

// The half-wave flow recast as a nonlinear wave equation: Box u equals the
// sum of three groups (V = (-Lap)^{1/2} u, Pi = tangent_project at u):
//   (i)   eta (grad u .eta grad u - u_t .eta u_t) u      (grad spatial only)
//   (ii)  eta Pi[ (u .eta V) V ]
//   (iii) Pi[ u x_eta (-Lap)^{1/2}(u x_eta V) - u x_eta (u x_eta (-Lap)u) ]
// The eta factors on (i) and (ii) come from resolving Box u along u with
// u .eta u = eta; on the sphere they are invisible. Each group is retrievable
// separately so residual reports can attribute size.
struct WaveRhsGroups {
    VecField group_i;
    VecField group_ii;
    VecField group_iii;
    VecField total() const;
};

WaveRhsGroups wave_rhs_groups(const VecField& u, const VecField& ut,
                              const TargetSpec& target);
VecField wave_rhs(const VecField& u, const VecField& ut, const TargetSpec& target);

// Per interior frame: ||Box u - wave_rhs||_{L2} with Box assembled from the
// centered second time difference and the spectral Laplacian, plus the L2
// size of each group for attribution. Needs at least 3 frames.
struct WaveResidualReport {
    std::vector<double> times; // interior frame times
    std::vector<double> total;
    std::vector<double> group_i;
    std::vector<double> group_ii;
    std::vector<double> group_iii;
    double max_total() const;
};

WaveResidualReport box_residual(const Trajectory& traj);

// X = u_t - u x_eta (-Lap)^{1/2} u; identically zero on exact solutions.
VecField x_field(const VecField& u, const VecField& ut, const TargetSpec& target);

// Energy-type functional 0.5 * L^n sum_xi |xi|^{4e} (X^ .eta conj X^), the
// signed Plancherel form of 0.5*integral |(-Lap)^e X|^2. Default exponent is
// (n-3)/4; negative exponents require mean-free X.
double tilde_energy(const VecField& X, const TargetSpec& target, double exponent);
double default_tilde_exponent(int n);

// Wave propagator with exact per-mode homogeneous evolution and midpoint
// quadrature of the Duhamel integral; forcing is sampled at half steps
// t + dt/2. Zero forcing conserves the linear wave energy to roundoff;
// forced runs are O(dt^2) accurate.
using ForcingFn = std::function<VecField(double)>;
Trajectory duhamel_solve(const VecField& f, const VecField& g,
                         const ForcingFn& forcing, double T, double dt,
                         const TargetSpec& target);

// Linear wave energy 0.5 * integral (|u_t|^2 + |grad u|^2), the quantity the
// free propagator conserves exactly.
double linear_wave_energy(const VecField& u, const VecField& ut);

// Nonlinear wave solve of Box u = wave_rhs(u, u_t) by a predictor-corrector
// sweep over the Duhamel stepper: Taylor half-step predictor, forcing
// evaluated at the predicted midpoint state. Used by diagnostics that need a
// wave-equation (rather than half-wave) discretization of the same flow.
Trajectory wave_evolve(const VecField& f, const VecField& g,
                       const TargetSpec& target, double T, double dt);

struct PicardSettings {
    double T = 0.1;
    double dt = 0.01;
    double tol_outer = 1e-9;
    double tol_inner = 1e-10;
    int max_outer = 25;
    int max_inner = 40;
};

struct PicardLog {
    std::vector<double> outer_diff;      // proxy-norm distance between outer iterates
    std::vector<double> contraction;     // ratio of successive outer diffs
    std::vector<int> inner_counts;       // inner sweeps per outer stage
    std::vector<double> sphere_violation; // max_x |u .eta u - eta| per outer iterate
    int iterations = 0;
    bool converged = false;
};

struct PicardResult {
    Trajectory traj;
    PicardLog log;
};

// Two-level iteration toward Box u = wave_rhs(u): the first iterate is the
// free wave from the data; each outer stage freezes the nonlocal groups (ii)
// and (iii) at the previous outer iterate and relaxes the quadratic group (i)
// through inner sweeps that restart from the free wave. Distances between
// iterates are measured in the documented proxy norm max_t (SobolevDot(n/2)
// + L2). Non-contraction past max_outer raises NumericError carrying the
// difference history.
PicardResult picard_solve(const VecField& f, const VecField& g,
                          const TargetSpec& target, const PicardSettings& s);

// Max over frames of the pointwise constraint violation |u .eta u - eta|.
double sphere_preservation_check(const Trajectory& traj, const TargetSpec& target);

} // namespace hwm
