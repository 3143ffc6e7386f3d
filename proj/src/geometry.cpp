#include "hwm/geometry.hpp"

#include <cmath>
#include <string>

#include "hwm/errors.hpp"

namespace hwm {

TargetSpec TargetSpec::sphere(Vec3 base) {
    TargetSpec t;
    t.eta = 1;
    t.base = base;
    t.validate();
    return t;
}

TargetSpec TargetSpec::hyperboloid(Vec3 base) {
    TargetSpec t;
    t.eta = -1;
    t.base = base;
    t.validate();
    return t;
}

void TargetSpec::validate() const {
    if (eta != 1 && eta != -1)
        throw ConfigError("target: eta must be +1 or -1");
    const double c = dot_eta(base, base, eta);
    if (std::abs(c - eta) > 1e-12)
        throw ConfigError("target: base point violates the constraint, |Q .eta Q - eta| = " +
                          std::to_string(std::abs(c - eta)));
    if (eta == -1 && !(base[0] > 0.0))
        throw ConfigError("target: hyperboloid base point must sit on the upper sheet");
}

bool TargetSpec::on_target(const Vec3& p, double tol) const {
    if (std::abs(dot_eta(p, p, eta) - eta) > tol) return false;
    if (eta == -1 && reject_lower_sheet && !(p[0] > 0.0)) return false;
    return true;
}

double dot_eta(const Vec3& a, const Vec3& b, int eta) {
    return eta * a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross_eta(const Vec3& a, const Vec3& b, int eta) {
    const Vec3 c = cross3(a, b);
    return {eta * c[0], c[1], c[2]};
}

double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

Vec3 tangent_project(const Vec3& v, const Vec3& u, int eta) {
    const double uu = dot_eta(u, u, eta);
    if (std::abs(uu) < 1e-12)
        throw DomainError("tangent_project: null reference vector, u .eta u ~ 0");
    const double f = dot_eta(v, u, eta) / uu;
    return {v[0] - f * u[0], v[1] - f * u[1], v[2] - f * u[2]};
}

Vec3 retract(const Vec3& v, const TargetSpec& target) {
    if (target.eta == 1) {
        const double r = norm3(v);
        if (!(r > 0.0))
            throw DomainError("retract: zero vector cannot be normalized to the sphere");
        return {v[0] / r, v[1] / r, v[2] / r};
    }
    Vec3 w = v;
    if (!(w[0] > 0.0)) {
        if (target.reject_lower_sheet)
            throw DomainError("retract: point left the upper sheet (step too large; reduce dt)");
        w = {-w[0], -w[1], -w[2]};
        if (!(w[0] > 0.0))
            throw DomainError("retract: point has no timelike component");
    }
    const double q = -dot_eta(w, w, -1);
    if (!(q > 0.0))
        throw DomainError("retract: spacelike vector cannot reach the hyperboloid "
                          "(step too large; reduce dt)");
    const double r = std::sqrt(q);
    return {w[0] / r, w[1] / r, w[2] / r};
}

VecField retract(const VecField& f, const TargetSpec& target) {
    VecField out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        try {
            out.set(i, retract(f.at(i), target));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " [grid index " + std::to_string(i) + "]");
        }
    }
    return out;
}

VecField tangent_project(const VecField& v, const VecField& u, int eta) {
    if (!(v.grid == u.grid)) throw ConfigError("tangent_project: grids differ");
    VecField out(v.grid);
    for (std::size_t i = 0; i < v.size(); ++i) {
        try {
            out.set(i, tangent_project(v.at(i), u.at(i), eta));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " [grid index " + std::to_string(i) + "]");
        }
    }
    return out;
}

double constraint_violation(const VecField& f, const TargetSpec& target) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec3 p = f.at(i);
        m = std::max(m, std::abs(dot_eta(p, p, target.eta) - target.eta));
    }
    return m;
}

namespace {

void require_upper_sheet(const Vec3& p, const char* who) {
    if (std::abs(dot_eta(p, p, -1) + 1.0) > 1e-8 || !(p[0] > 0.0))
        throw DomainError(std::string(who) + ": point is not on the upper hyperboloid sheet");
}

} // namespace

double hyperbolic_distance(const Vec3& p, const Vec3& q) {
    require_upper_sheet(p, "hyperbolic_distance");
    require_upper_sheet(q, "hyperbolic_distance");
    const double pairing = -dot_eta(p, q, -1);
    return std::acosh(std::max(pairing, 1.0));
}

RealField distance_field(const VecField& u, const TargetSpec& target) {
    RealField out(u.grid);
    if (target.eta == 1) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double c = dot3(u.at(i), target.base);
            out[i] = std::acos(std::min(1.0, std::max(-1.0, c)));
        }
        return out;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        try {
            out[i] = hyperbolic_distance(u.at(i), target.base);
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " [grid index " + std::to_string(i) + "]");
        }
    }
    return out;
}

} // namespace hwm
