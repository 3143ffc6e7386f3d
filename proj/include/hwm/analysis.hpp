#pragma once

#include <array>
#include <vector>

#include "hwm/field.hpp"
#include "hwm/geometry.hpp"
#include "hwm/grid.hpp"
#include "hwm/spacetime.hpp"
#include "hwm/spectral.hpp"

namespace hwm {

// ---------------------------------------------------------------------------
// Frequency envelopes.
// ---------------------------------------------------------------------------

// Envelope c_k = sum_{k'} 2^{-sigma|k-k'|} a_{k'} over the grid's shell range,
// where a_k = ||P_k f||_{SobolevDot(n/2)} + ||P_k g||_{SobolevDot(n/2-1)}.
// By construction the slowly-varying bound 2^{-sigma|k-k'|} <= c_k/c_{k'}
// <= 2^{sigma|k-k'|} holds with constant 1, and ||c||_{l2} <= C ||a||_{l2}
// with C = (1 + 2^{-sigma}) / (1 - 2^{-sigma}), recorded below.
struct FrequencyEnvelope {
    double sigma = 0.25;
    double eps = 0.0; // ||a||_{l2}
    int kMin = 0;
    std::vector<double> c;
    double l2_constant = 0.0; // the C above
    double at(int k) const;
};

// sigma must lie in (0, 1/4]; anything else is a ConfigError.
FrequencyEnvelope fit_envelope(const VecField& f, const VecField& g,
                               double sigma, const LPSpec& spec);

struct EnvelopeCheck {
    std::vector<double> ratio; // per shell, a_k / c_k
    double max_ratio = 0.0;
    double C0 = 1.0;
    bool pass = false;
};

// Per-shell ratios of the data's shell content to the envelope; passes iff
// the max ratio is <= C0. The trajectory overload takes the max over frames,
// pairing each u(t) with its u_t(t).
EnvelopeCheck check_envelope(const FrequencyEnvelope& env, const VecField& f,
                             const VecField& g, const LPSpec& spec, double C0);
EnvelopeCheck check_envelope(const FrequencyEnvelope& env, const Trajectory& traj,
                             const LPSpec& spec, double C0);

// ---------------------------------------------------------------------------
// Microlocal constraint identity.
// ---------------------------------------------------------------------------

// Shell decomposition of u.u - 1 on the sphere: with hi_k = sum_{k1 >= k-off}
// u_{k1} and low_k = mean + sum_{k1 < k-off} u_{k1},
//   S := sum_{|k1-k2| <= off} u_{k1}.u_{k2} + 2 sum_{k1} u_{k1}.low_{k1}
// telescopes exactly (a pure rearrangement, no analysis involved) to
// u.u - m.m with m the mean, so residual = ||S + m.m - 1||_{L2} measures
// only assembly faithfulness plus roundoff on on-sphere fields.
struct OrthomicroReport {
    int offset = 10;
    double residual = 0.0;
    std::vector<double> localized;       // per shell: ||P_k(u.u - 1)||_{L2}
    std::vector<double> localized_parts; // per shell: ||2 P_k(hi.low) + P_k(hi.hi)||_{L2}
};

OrthomicroReport orthomicro_residual(const VecField& u, int offset, const LPSpec& spec);

// ---------------------------------------------------------------------------
// Gauge construction.
// ---------------------------------------------------------------------------

// Per-gridpoint 3x3 matrices, row-major entries.
struct MatField {
    Grid grid;
    std::array<std::vector<double>, 9> m;

    static MatField identity(const Grid& g);
    static MatField zero(const Grid& g);
    std::array<double, 9> at(std::size_t i) const;
    void set(std::size_t i, const std::array<double, 9>& v);
    std::size_t size() const { return m[0].size(); }
};

// U built by the shell recursion in increasing k over [k_lo, k_cut]
// (u_{<k} includes the mean, so the lowest stage rotates around the base
// point), plus the antisymmetric potentials
//   A_j = (d_j w) w^T - w (d_j w)^T,  A_t likewise from the projected u_t,
// where w = u projected to shells <= k_cut including the mean. alpha index 0
// is time, 1..n spatial.
struct GaugeField {
    int k_cut = 0;
    int k_lo = 0;
    bool empty_range = false; // set when no shell fell in [k_lo, k_cut]
    MatField U;
    std::vector<MatField> A;
};

// k_lo below the grid's resolvable range is clamped to it. An empty shell
// range throws ConfigError unless allow_empty, which instead returns U = I
// with the flag set.
GaugeField build_gauge(const VecField& u, const VecField& ut, int k_cut,
                       const LPSpec& spec, int k_lo, bool allow_empty = false);

// Prop-style gauge quality measurements over a family of runs whose data were
// scaled by the given factors. Columns, one value per scale:
//   utu_dev       max |U^T U - I| over space and frames
//   utu_dev_dt    max |d/dt (U^T U)|
//   u_inf, uinv_inf   max entrywise size of U and U^{-1}
//   du_minus_au   sum over alpha of ||d_alpha U - A_alpha U||_{L1_t Linf_x}
//   du_inf        max over alpha of ||d_alpha U||_{Linf}
//   du_l2t_linfx  max over alpha of ||d_alpha U||_{L2_t Linf_x}
//   boxu_l2       ||Box U||_{L2_t L2_x}  (stand-in for the L^{n-1}_x column,
//                 which is ill-posed at n in {1,2}; labeled as such)
// Slopes are fitted against log2 of the scale factors.
struct GaugeDiagnostics {
    std::vector<double> scale;
    std::vector<double> utu_dev, utu_dev_dt;
    std::vector<double> u_inf, uinv_inf;
    std::vector<double> du_minus_au, du_inf, du_l2t_linfx;
    std::vector<double> boxu_l2;
    double slope_utu = 0.0;
    double slope_du_minus_au = 0.0;
    bool invertible = true; // no frame tripped the determinant guard
    bool monotone = true;   // every column nonincreasing along shrinking scales
};

GaugeDiagnostics gauge_diagnostics(const std::vector<Trajectory>& family,
                                   const std::vector<double>& scale, int k_cut,
                                   const LPSpec& spec, int k_lo);

// Gauged wave residual: w = U^{-1} u_0 with u_0 = P_0 u, Box w by centered
// time differences, compared against the three right-side groups
//   g1 = -2 U^{-1} (d_alpha U - A_alpha U) d^alpha w
//   g2 = +2 U^{-1} A^alpha (d_alpha U) U^{-1} u_0
//   g3 = -  U^{-1} (Box U) U^{-1} u_0
// (indices raised with the (+,-,...,-) signature, so d^t = d_t and
// d^j = -d_j). The baseline is the ungauged ||Box u_0 - 2 A^alpha d_alpha u_0||;
// the improvement ratio is recorded, not asserted.
struct GaugeResidualReport {
    double residual = 0.0;      // ||Box w - (g1+g2+g3)||_{L1_t L2_x}
    double baseline = 0.0;      // ||Box u_0 - 2 A^alpha d_alpha u_0||_{L1_t L2_x}
    double ratio = 0.0;         // residual / baseline
    std::array<double, 3> group_norms{}; // L1_t L2_x of g1, g2, g3
};

GaugeResidualReport gauge_residual(const Trajectory& traj, int k_cut,
                                   const LPSpec& spec, int k_lo);

// ---------------------------------------------------------------------------
// Error-norm bookkeeping.
// ---------------------------------------------------------------------------

// ||F||_{L1_t L2_x} against the threshold C0^3 c0 eps. The constants are
// caller-supplied report inputs, never fitted.
struct ErrorNormReport {
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

ErrorNormReport error_norm(const SpaceTimeBlock& F, double C0, double c0, double eps);

// Besov21(s) size of the hyperbolic distance-to-base field, with the measured
// ratio against the summed component Besov norms of u - base (the constant in
// the function-action bound, recorded not asserted).
struct DistanceBesovReport {
    double value = 0.0;
    double component_norm = 0.0;
    double ratio = 0.0;
};

DistanceBesovReport distance_field_besov(const VecField& u, const TargetSpec& target,
                                         double s, const LPSpec& spec);

} // namespace hwm
