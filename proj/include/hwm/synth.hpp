#pragma once

#include <random>

#include "hwm/config.hpp"
#include "hwm/field.hpp"
#include "hwm/geometry.hpp"
#include "hwm/grid.hpp"
#include "hwm/spectral.hpp"

namespace hwm {

// Deterministic synthetic fields. Everything random draws from the one
// generator passed in, in a fixed traversal order, so identical seeds give
// identical fields on any build.

VecField constant_field(const Grid& g, const Vec3& v);

// Circle sweep through the base point: angle theta(x) applied in the plane
// spanned by the base and a fixed unit tangent at it, so the result is
// on-target pointwise (cos/sin for the sphere, cosh/sinh for the
// hyperboloid). theta = amplitude * sin(2 pi mode x1/L) in one dimension,
// times cos(2 pi mode x2/L) in two.
VecField great_circle(const Grid& g, const TargetSpec& target, double amplitude,
                      int mode);

// Same sweep with theta built from a fixed per-mode amplitude profile on one
// dyadic shell and phases drawn from rng: the ensemble for seed-to-seed
// reproducibility measurements.
VecField random_phases(const Grid& g, const TargetSpec& target, double amplitude,
                       int shell, const LPSpec& spec, std::mt19937_64& rng);

// Scalar field supported on one dyadic shell: white noise masked by the shell
// weight. Zero fields cannot occur (the noise is full-rank), but callers that
// need a guarantee should check.
RealField band_field(const Grid& g, int k, const LPSpec& spec, std::mt19937_64& rng);

// Initial data from a parsed config.
VecField make_data(const RunConfig& cfg, std::mt19937_64& rng);

} // namespace hwm
