#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hwm/field.hpp"
#include "hwm/grid.hpp"
#include "hwm/spectral.hpp"

namespace hwm {

// A finite window of uniformly spaced frames, the unit all space-time
// operations work on. The taper string records what window function has
// already been multiplied into the samples ("none" or "hann").
struct SpaceTimeBlock {
    Grid grid;
    std::vector<double> times;
    std::vector<VecField> frames;
    std::string taper = "none";

    std::size_t frame_count() const { return frames.size(); }
    double dt() const;
    // Periodic extent M*dt used for the temporal frequency unit.
    double duration() const;
    void validate() const;
};

enum class Channel { U, Ut };

// Copies frames [first, first+count) of one trajectory channel into a block,
// multiplying in the requested taper (hann: 0.5*(1 - cos(2*pi*i/(M-1)))).
SpaceTimeBlock make_block(const Trajectory& traj, Channel ch,
                          const std::string& taper, std::size_t first = 0,
                          std::size_t count = static_cast<std::size_t>(-1));

// Dyadic shells over the cone distance d = ||tau| - |xi||. Both end shells
// absorb their tails (the bottom one includes d = 0, where phi(0) = 1), so
// the weights sum to 1 for every (tau, xi) and the shell sum reproduces the
// block exactly.
struct QSpec {
    int jMin = 0;
    int jMax = 0;

    static QSpec infer(const SpaceTimeBlock& b);

    int shells() const { return jMax - jMin + 1; }
    bool in_range(int j) const { return j >= jMin && j <= jMax; }
    double weight(int j, double d) const;
};

// Cone-shell projection Q_j: space-time Fourier transform of the block,
// weights applied on d = ||tau| - |xi||, transform back.
SpaceTimeBlock q_project(const SpaceTimeBlock& b, int j, const QSpec& spec);

// Space-time norms of a block. Accepts LptLqx, Xstheta, Snorm, Nnorm;
// spatial kinds are rejected (they belong to spatial_norm).
//
//   LptLqx:  || |D_x|^s u ||_{L^p_t L^q_x}, trapezoid in time for finite p.
//   Xstheta: sum_j (or sup_j) 2^{j*theta} || |D_x|^s Q_j u ||_{L2_{t,x}};
//            s < 0 requires spatially mean-free frames; check_pairing
//            enforces s - n/2 == theta - 1/2.
//   Snorm:   sum_k [ sup over the admissible (p,q) list of
//            2^{(1/p + n/q - 1)k} || grad_{t,x} P_k u ||_{L^p_t L^q_x}
//            + || grad_{t,x} P_k u ||_{X^{n/2-1, 1/2, sup}} ],
//            with d/dt by centered frame differences. The admissibility
//            constraint is 1/p + (n-1)/(2q) <= (n-1)/4, 2 <= p,q <= inf;
//            the built-in list is {(inf,2)} in one dimension and
//            {(inf,2),(4,inf)} in two; explicit pairs are validated.
//   Nnorm:   sum_k min( ||P_k u||_{L1_t SobolevDot(n/2-1)},
//                       X^{n/2-1,-1/2,l1}(P_k u) ),
//            a computable stand-in for the inf over sum-space splittings.
double spacetime_norm(const SpaceTimeBlock& b, const NormSpec& spec);

// Multiplies both trajectory channels by the smooth window phi(|t|/T)
// (plateau |t| <= T, support |t| <= 2T, centered at t = 0). The pair is no
// longer a derivative pair afterwards; callers needing d/dt of the windowed
// field must differentiate the product themselves.
Trajectory time_localize(const Trajectory& traj, double T);

} // namespace hwm
