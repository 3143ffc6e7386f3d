#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "hwm/field.hpp"
#include "hwm/grid.hpp"

namespace hwm {

// ---------------------------------------------------------------------------
// Smooth dyadic cutoff.
//
//   sigma(s) = exp(-1/s) for s > 0, else 0
//   theta(s) = sigma(s) / (sigma(s) + sigma(1-s))
//   phi(r)   = theta(2-r)   -> 1 for r <= 1, 0 for r >= 2, smooth monotone
//   chi(r)   = phi(r) - phi(2r), supported in [1/2, 2]
//
// sum_k chi(r/2^k) telescopes to 1 exactly for every r > 0, which is what
// makes the shell partition below exact rather than approximate.
// ---------------------------------------------------------------------------
double smooth_step(double s); // theta above
double phi_cut(double r);
double chi_cut(double r);

// Dyadic shell layout for a grid. Interior shells carry chi(|xi|/2^k); the two
// end shells absorb everything outside [2^kMin, 2^{kMax-1}] so the partition
// stays exact on the resolvable frequency range:
//   w_kMin(r)  = phi(r/2^kMin)
//   w_k(r)     = chi(r/2^k)          for kMin < k < kMax
//   w_kMax(r)  = 1 - phi(r/2^{kMax-1})
// The zero mode belongs to no shell, so sum_k P_k u = u - mean(u).
struct LPSpec {
    int kMin = 0;
    int kMax = 0;

    static LPSpec infer(const Grid& g);

    int shells() const { return kMax - kMin + 1; }
    bool in_range(int k) const { return k >= kMin && k <= kMax; }

    // Weight of shell k at radius r (r = |xi|); 0 for r == 0.
    double weight(int k, double r) const;
    // Combined weight of all shells strictly below k (plus optionally the
    // zero mode, i.e. the mean): the multiplier of P_{<k}.
    double weight_below(int k, double r) const;
};

// ---------------------------------------------------------------------------
// Transforms. Forward carries 1/N^n, so coefficient 0 is the mean; Plancherel
// holds with the L^n cell weight: cellVol*sum_x |u|^2 = L^n * sum_xi |u^|^2.
// ---------------------------------------------------------------------------
SpectralField transform(const RealField& f);
RealField inverse_transform(const SpectralField& f);
VecSpectralField transform(const VecField& f);
VecField inverse_transform(const VecSpectralField& f);

double mean(const RealField& f);
Vec3 field_mean(const VecField& f);

// L2 norm by lattice quadrature, (cellVol * sum |u|^2)^{1/2}.
double l2_norm(const RealField& f);
double l2_norm(const VecField& f);
// Grid max of |u| (pointwise Euclidean magnitude for vector fields).
double linf_norm(const RealField& f);
double linf_norm(const VecField& f);

// ---------------------------------------------------------------------------
// Fourier multipliers.
// ---------------------------------------------------------------------------

// (-Lap)^s, multiplier |xi|^{2s}. Zero mode: kept at s = 0, annihilated for
// s > 0; s < 0 rejects input whose mean is not (numerically) zero, because
// silently regularizing the zero mode would corrupt norm comparisons.
RealField fractional_laplacian(const RealField& f, double s);
VecField fractional_laplacian(const VecField& f, double s);

// Plain Laplacian (multiplier -|xi|^2) and first derivative along an axis
// (multiplier i*xi_axis with the Nyquist mode zeroed, keeping real fields real).
RealField laplacian(const RealField& f);
VecField laplacian(const VecField& f);
RealField derivative(const RealField& f, int axis);
VecField derivative(const VecField& f, int axis);

// Littlewood-Paley projection onto shell k. Out-of-range k returns the zero
// field (nothing lives there by construction).
RealField lp_project(const RealField& f, int k, const LPSpec& spec);
VecField lp_project(const VecField& f, int k, const LPSpec& spec);

// P_{<k}: all shells strictly below k; includes the mean unless told not to.
RealField lp_below(const RealField& f, int k, const LPSpec& spec, bool with_mean = true);
VecField lp_below(const VecField& f, int k, const LPSpec& spec, bool with_mean = true);

// ||P_k f||_{L2} for every shell in one pass (one forward transform).
std::vector<double> shell_l2_norms(const RealField& f, const LPSpec& spec);
std::vector<double> shell_l2_norms(const VecField& f, const LPSpec& spec);

// ---------------------------------------------------------------------------
// Norms.
// ---------------------------------------------------------------------------
struct NormSpec {
    enum class Kind { SobolevDot, Besov21, LptLqx, Xstheta, Snorm, Nnorm };
    enum class Ell { L1, Sup };

    Kind kind = Kind::SobolevDot;
    double s = 0.0;     // regularity exponent
    double theta = 0.0; // cone exponent (Xstheta)
    double p = 2.0;     // time exponent (LptLqx); may be infinity
    double q = 2.0;     // space exponent (LptLqx); may be infinity
    Ell ell = Ell::L1;  // Xstheta summation over cone shells
    bool check_pairing = false; // Xstheta: require s - n/2 == theta - 1/2
    // Snorm: optional explicit (p,q) list; empty means the documented default
    // admissible set for the grid dimension.
    std::vector<std::pair<double, double>> pairs;

    static NormSpec sobolev(double s_) { return {Kind::SobolevDot, s_}; }
    static NormSpec besov(double s_) { return {Kind::Besov21, s_}; }
    static NormSpec lpt_lqx(double p_, double q_, double s_ = 0.0) {
        NormSpec n;
        n.kind = Kind::LptLqx;
        n.p = p_;
        n.q = q_;
        n.s = s_;
        return n;
    }
    static NormSpec xstheta(double s_, double theta_, Ell ell_ = Ell::L1) {
        NormSpec n;
        n.kind = Kind::Xstheta;
        n.s = s_;
        n.theta = theta_;
        n.ell = ell_;
        return n;
    }
    static NormSpec snorm() { NormSpec n; n.kind = Kind::Snorm; return n; }
    static NormSpec nnorm() { NormSpec n; n.kind = Kind::Nnorm; return n; }
};

// Spatial norms: SobolevDot(s) = (L^n sum_xi |xi|^{2s} |u^|^2)^{1/2} summed
// over components; Besov21(s) = sum_k 2^{ks} ||P_k u||_{L2}. Other kinds are
// space-time and rejected here.
double spatial_norm(const RealField& f, const NormSpec& spec);
double spatial_norm(const VecField& f, const NormSpec& spec);

// ---------------------------------------------------------------------------
// Bilinear multiplier F(u,v): true (non-circular) convolution
//   F^(zeta) = sum_{xi+eta=zeta} m(xi,eta) w_{k1}(xi) u^(xi) w_{k2}(eta) v^(eta)
// over mode pairs whose sum stays in the resolvable range; out-of-range sums
// are dropped. Quadratic cost in the number of active modes, so grid sizes are
// capped; with m == 1 and inputs whose shell product stays below Nyquist this
// reproduces the pointwise product P_{k1}u * P_{k2}v to reassociation level.
// ---------------------------------------------------------------------------
struct BilinearSymbol {
    // Arguments are the frequency vectors xi and eta (second component unused
    // in one dimension).
    std::function<std::complex<double>(const std::array<double, 2>&,
                                       const std::array<double, 2>&)> m;
    int k1 = 0;
    int k2 = 0;
    double gamma_bound = 0.0; // nominal size, recorded in reports only
};

RealField bilinear_apply(const BilinearSymbol& sym, const RealField& u,
                         const RealField& v, const LPSpec& spec);

// The two commutator symbols measured by the scaling study below. Both confine
// the output to shell 0 via the shell-0 weight on xi+eta:
//   variant 1: m = w_0(|xi+eta|) (|xi+eta| - |eta|)
//   variant 2: m = w_0(|xi+eta|) |eta| (|xi+eta| - |eta|)
// Variant 1 equals P_0[(-Lap)^{1/2}(u_{k1} v_{k2}) - u_{k1} (-Lap)^{1/2} v_{k2}],
// variant 2 equals P_0[(-Lap)^{1/2}(u_{k1} (-Lap)^{1/2} v_{k2}) - u_{k1} (-Lap) v_{k2}].
BilinearSymbol commutator_symbol(int variant, int k1, int k2, const LPSpec& spec);

struct ScalingReport {
    std::vector<int> k1;
    std::vector<double> norm;       // commutator L2 norm per k1
    std::vector<double> log2_ratio; // log2(norm / (||u_k1|| ||v_k2||))
    double slope = 0.0;             // fitted log2_ratio vs k1
};

// Measures how the commutator norm scales across the k1 dyads at fixed k2.
// gen(k) must produce a field supported on shell k; zero fields are rejected.
ScalingReport commutator_scaling(const std::function<RealField(int)>& gen,
                                 int k1_lo, int k1_hi, int k2, int variant,
                                 const LPSpec& spec);

} // namespace hwm
