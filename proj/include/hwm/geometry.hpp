#pragma once

#include <string>

#include "hwm/field.hpp"
#include "hwm/grid.hpp"

namespace hwm {

// Target manifold: the unit sphere (eta = +1) or the upper sheet of the unit
// hyperboloid (eta = -1), both embedded in R^3 with the bilinear form
//   a .eta b = eta*a0*b0 + a1*b1 + a2*b2,
// so points satisfy u .eta u = eta. The twisted cross product
//   a x_eta b = D(a x b), D = diag(eta, 1, 1)
// is tangent to the target at both arguments.
struct TargetSpec {
    int eta = 1;             // +1 sphere, -1 hyperboloid
    Vec3 base{1.0, 0.0, 0.0}; // reference point Q
    bool reject_lower_sheet = true;

    static TargetSpec sphere(Vec3 base = {1.0, 0.0, 0.0});
    static TargetSpec hyperboloid(Vec3 base = {1.0, 0.0, 0.0});

    // Checks eta, |base .eta base - eta| <= 1e-12, and base[0] > 0 when
    // eta = -1; throws ConfigError otherwise.
    void validate() const;
    bool on_target(const Vec3& p, double tol = 1e-12) const;
};

double dot_eta(const Vec3& a, const Vec3& b, int eta);
Vec3 cross_eta(const Vec3& a, const Vec3& b, int eta);

// Euclidean helpers used throughout.
double dot3(const Vec3& a, const Vec3& b);
Vec3 cross3(const Vec3& a, const Vec3& b);
double norm3(const Vec3& a);

// Projection of v onto the tangent space at u: v - (v .eta u / u .eta u) u.
// Rejects u with u .eta u numerically zero (null direction, no tangent space).
Vec3 tangent_project(const Vec3& v, const Vec3& u, int eta);

// Nearest-point style retraction onto the target: v/|v| on the sphere,
// v/sqrt(-v .eta v) on the hyperboloid (requires v .eta v < 0 and, when
// target.reject_lower_sheet, v0 > 0). Postcondition |r .eta r - eta| <= 1e-14.
Vec3 retract(const Vec3& v, const TargetSpec& target);

// Applied pointwise over a field; error messages carry the grid index.
VecField retract(const VecField& f, const TargetSpec& target);
VecField tangent_project(const VecField& v, const VecField& u, int eta);

// Largest pointwise violation of u .eta u = eta over the grid.
double constraint_violation(const VecField& f, const TargetSpec& target);

// Geodesic distance on the upper hyperboloid sheet, arccosh(-p .eta q) with
// eta = -1. Both points must satisfy the sheet constraint to 1e-8; the dot
// product is clamped to [-inf, -1] before arccosh to absorb roundoff.
double hyperbolic_distance(const Vec3& p, const Vec3& q);

// Geodesic distance to the base point as a scalar field, with the sphere case
// arccos(clamp(p . q)) so both targets share one entry point.
RealField distance_field(const VecField& u, const TargetSpec& target);

} // namespace hwm
