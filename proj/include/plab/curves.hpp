#pragma once
#include <cmath>
#include <stdexcept>

#include "plab/angles.hpp"
#include "plab/vec2.hpp"

namespace plab {

/// Ellipse x^2/a^2 + y^2/b^2 = 1.
struct EllipseShape {
    double a = 1.0;   ///< semi-axis along x
    double b = 1.0;   ///< semi-axis along y

    bool valid() const { return a > 0.0 && b > 0.0; }
    bool is_circle() const { return a == b; }
};

inline void require_valid(const EllipseShape& s) {
    if (!s.valid()) throw std::invalid_argument("ellipse semi-axes must be positive");
}

/// One evader sample: position on the curve and its derivative with respect
/// to the curve parameter (t or phi, whichever the parameterization uses).
struct EvaderState {
    double param = 0.0;
    Vec2 pos;
    Vec2 vel;   ///< d(pos)/d(param)
};

/// Standard parameterization: pos = (a cos t, b sin t), counterclockwise
/// from (a, 0). Neither speed nor angular velocity is constant unless a = b.
inline EvaderState ellipse_standard(double t, const EllipseShape& s) {
    require_valid(s);
    const double c = std::cos(t), sn = std::sin(t);
    return {t, {s.a * c, s.b * sn}, {-s.a * sn, s.b * c}};
}

/// Constant-angular-velocity parameterization: the polar argument of the
/// point is exactly t, so pos = r(t) (cos t, sin t) with
/// r(t) = a b / sqrt(a^2 sin^2 t + b^2 cos^2 t).
inline EvaderState ellipse_const_angvel(double t, const EllipseShape& s) {
    require_valid(s);
    const double c = std::cos(t), sn = std::sin(t);
    const double a2 = s.a * s.a, b2 = s.b * s.b;
    const double d2 = a2 * sn * sn + b2 * c * c;
    const double d = std::sqrt(d2);
    const double r = s.a * s.b / d;
    // r'(t) = -ab (a^2 - b^2) sin t cos t / d^3
    const double rp = -s.a * s.b * (a2 - b2) * sn * c / (d2 * d);
    return {t, {r * c, r * sn}, {rp * c - r * sn, rp * sn + r * c}};
}

/// Angular rate d(phi)/dt of the unit-speed parameterization:
/// (a^2 sin^2 phi + b^2 cos^2 phi)^{3/2} / (a^2 b^2). Strictly positive.
inline double phi_dot(double phi, const EllipseShape& s) {
    require_valid(s);
    const double c = std::cos(phi), sn = std::sin(phi);
    const double a2 = s.a * s.a, b2 = s.b * s.b;
    const double d2 = a2 * sn * sn + b2 * c * c;
    return d2 * std::sqrt(d2) / (a2 * b2);
}

/// Velocity with respect to TIME of the unit-speed parameterization; always
/// a unit vector. The phase phi is the argument of this velocity.
inline Vec2 const_speed_time_velocity(double phi) {
    return {std::cos(phi), std::sin(phi)};
}

/// Unit-speed parameterization by the velocity argument phi:
/// pos = (a^2 sin phi, -b^2 cos phi) / sqrt(a^2 sin^2 phi + b^2 cos^2 phi).
/// The stored vel is d(pos)/d(phi) = (cos phi, sin phi) / phi_dot, so code
/// integrating in phi can use it directly.
inline EvaderState ellipse_const_speed(double phi, const EllipseShape& s) {
    require_valid(s);
    const double c = std::cos(phi), sn = std::sin(phi);
    const double a2 = s.a * s.a, b2 = s.b * s.b;
    const double d2 = a2 * sn * sn + b2 * c * c;
    const double d = std::sqrt(d2);
    const double rate = d2 * d / (a2 * b2);   // phi_dot, inlined
    return {phi, {a2 * sn / d, -b2 * c / d}, {c / rate, sn / rate}};
}

/// Circle of radius a traversed at unit speed: pos = (a cos(t/a), a sin(t/a)).
inline EvaderState circle_unit_speed(double t, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    const double u = t / a;
    const double c = std::cos(u), sn = std::sin(u);
    return {t, {a * c, a * sn}, {-sn, c}};
}

/// The four evader parameterizations, as selected on the command line.
enum class Parameterization { standard, angvel, arclen, circle };

inline EvaderState eval_curve(Parameterization p, double u, const EllipseShape& s) {
    switch (p) {
        case Parameterization::standard: return ellipse_standard(u, s);
        case Parameterization::angvel:   return ellipse_const_angvel(u, s);
        case Parameterization::arclen:   return ellipse_const_speed(u, s);
        case Parameterization::circle:
            if (!s.is_circle())
                throw std::invalid_argument("circle parameterization requires a == b");
            return circle_unit_speed(u, s.a);
    }
    throw std::invalid_argument("unknown parameterization");
}

/// Parameter value at which the curve starts from (a, 0).
inline double curve_param_start(Parameterization p) {
    return p == Parameterization::arclen ? pi / 2.0 : 0.0;
}

/// Parameter increment corresponding to one full counterclockwise orbit.
inline double orbit_param_span(Parameterization p, const EllipseShape& s) {
    return p == Parameterization::circle ? two_pi * s.a : two_pi;
}

} // namespace plab
