#pragma once
#include <cmath>
#include <complex>
#include <sstream>
#include <tuple>
#include <utility>

#include "plab/curves.hpp"
#include "plab/errors.hpp"
#include "plab/ode.hpp"
#include "plab/vec2.hpp"

namespace plab {

/// Reduced state: separation rho = |E - P| and the velocity-argument
/// difference zeta = Theta - theta. zeta is kept unwrapped while integrating;
/// wrapping to (-pi, pi] is a reporting concern. phi carries the evader phase
/// for the non-autonomous (elliptical) system and is ignored otherwise.
struct DynState {
    double rho = 0.0;
    double zeta = 0.0;
    double phi = 0.0;
};

enum class StabilityClass { stable_spiral, stable_node, degenerate_double_root };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::stable_spiral: return "stable-spiral";
        case StabilityClass::stable_node: return "stable-node";
        case StabilityClass::degenerate_double_root: return "degenerate-double-root";
    }
    return "?";
}

struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    double trace() const { return m00 + m11; }
    double det() const { return m00 * m11 - m01 * m10; }
};

/// Eigenvalues of a real 2x2 matrix via its characteristic polynomial.
inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
    const double tr = m.trace();
    const double disc = tr * tr - 4.0 * m.det();
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {{0.5 * (tr + s), 0.0}, {0.5 * (tr - s), 0.0}};
    }
    const double s = std::sqrt(-disc);
    return {{0.5 * tr, 0.5 * s}, {0.5 * tr, -0.5 * s}};
}

struct EquilibriumReport {
    double rho_star = 0.0;
    double zeta_star = 0.0;
    Mat2 jacobian;
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    StabilityClass stability = StabilityClass::stable_spiral;
};

namespace detail {
inline void require_rho_positive(double rho) {
    if (!(rho > 0.0))
        throw SingularityError("reduced system requires rho > 0 (capture reached)");
}
inline void require_n_in_unit(double n) {
    if (!(n > 0.0)) throw std::invalid_argument("speed ratio n must be positive");
    if (n >= 1.0) throw Error("no equilibrium: requires 0 < n < 1");
}
} // namespace detail

/// General reduced system: rho' = cos zeta - n, zeta' = -sin(zeta)/rho + Theta'.
inline std::pair<double, double> dds_rhs(const DynState& st, double theta_dot, double n) {
    detail::require_rho_positive(st.rho);
    return {std::cos(st.zeta) - n, -std::sin(st.zeta) / st.rho + theta_dot};
}

/// Circular evader of radius a at unit speed: Theta' = 1/a, autonomous.
inline std::pair<double, double> dds_rhs_circle(const DynState& st, double n, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    return dds_rhs(st, 1.0 / a, n);
}

/// Elliptical evader at unit speed: Theta is the phase phi and Theta' comes
/// from phi_dot, making the (rho, zeta) pair non-autonomous. Returned as the
/// 3-state autonomous extension (rho', zeta', phi').
inline std::tuple<double, double, double> dds_rhs_ellipse(const DynState& st, double n,
                                                          const EllipseShape& shape) {
    const double rate = phi_dot(st.phi, shape);
    auto [rho_dot, zeta_dot] = dds_rhs(st, rate, n);
    return {rho_dot, zeta_dot, rate};
}

/// Equilibrium of the circular system: (a sqrt(1-n^2), arccos n), 0 < n < 1.
inline std::pair<double, double> equilibrium_circle(double n, double a) {
    detail::require_n_in_unit(n);
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    return {a * std::sqrt(1.0 - n * n), std::acos(n)};
}

/// Linearization of the circular system at its equilibrium.
inline Mat2 jacobian_circle(double n, double a) {
    detail::require_n_in_unit(n);
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    const double root = std::sqrt(1.0 - n * n);
    return {0.0, -root, 1.0 / (a * a * root), -n / (a * root)};
}

/// Closed-form eigenvalues (-n +- sqrt(5 n^2 - 4)) / (2 a sqrt(1 - n^2)).
inline std::pair<std::complex<double>, std::complex<double>> eigenvalues_circle(double n,
                                                                                double a) {
    detail::require_n_in_unit(n);
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    const double denom = 2.0 * a * std::sqrt(1.0 - n * n);
    const double re = -n / denom;
    const double disc = 5.0 * n * n - 4.0;
    if (disc < 0.0) {
        const double im = std::sqrt(-disc) / denom;
        return {{re, im}, {re, -im}};
    }
    const double off = std::sqrt(disc) / denom;
    return {{re + off, 0.0}, {re - off, 0.0}};
}

/// Eigenvalue-type boundary sits at n = 2/sqrt(5).
inline StabilityClass classify_equilibrium(double n) {
    detail::require_n_in_unit(n);
    const double n_crit = 2.0 / std::sqrt(5.0);
    if (std::abs(n - n_crit) <= 1e-12) return StabilityClass::degenerate_double_root;
    return n < n_crit ? StabilityClass::stable_spiral : StabilityClass::stable_node;
}

inline EquilibriumReport equilibrium_report(double n, double a) {
    EquilibriumReport rep;
    std::tie(rep.rho_star, rep.zeta_star) = equilibrium_circle(n, a);
    rep.jacobian = jacobian_circle(n, a);
    std::tie(rep.lambda_plus, rep.lambda_minus) = eigenvalues_circle(n, a);
    rep.stability = classify_equilibrium(n);
    return rep;
}

/// Invert the reduction back to the plane: the pursuer sits at distance rho
/// from the evader, opposite its own velocity direction theta = Theta - zeta.
inline Vec2 reconstruct_pursuer(Vec2 evader_pos, double Theta, const DynState& st) {
    const double theta = Theta - st.zeta;
    return evader_pos - Vec2{std::cos(theta), std::sin(theta)} * st.rho;
}

/// Evaluating the zeta(Theta) equation is refused once |sin zeta| drops
/// below this floor; it divides by f sin(zeta).
inline constexpr double zeta_singular_floor = 1e-8;

/// Second derivative of zeta with respect to Theta, with f = 1/Theta_dot:
/// zeta'' = [ (1-z')^2 (cos z - n) f - (f' sin z + f z' cos z)(1-z') ] / (f sin z).
inline double zeta_second_order_rhs(double zeta, double zeta_p, double Theta, double f,
                                    double f_p, double n) {
    if (!(f > 0.0)) throw std::invalid_argument("zeta_second_order_rhs: f must be positive");
    const double s = std::sin(zeta);
    if (std::abs(s) <= zeta_singular_floor) {
        std::ostringstream os;
        os.precision(17);
        os << "zeta ODE singular: |sin zeta| <= " << zeta_singular_floor << " at Theta=" << Theta;
        throw SingularityError(os.str());
    }
    const double c = std::cos(zeta);
    const double one_m = 1.0 - zeta_p;
    const double num = one_m * one_m * (c - n) * f - (f_p * s + f * zeta_p * c) * one_m;
    return num / (f * s);
}

/// f = 1/phi_dot and its logarithmic derivative with respect to Theta = phi:
/// f'/f = -3 (a^2 - b^2) sin(phi) cos(phi) / (a^2 sin^2 phi + b^2 cos^2 phi).
struct EllipseTimeFactor {
    double f = 0.0;
    double f_prime_over_f = 0.0;
};

inline EllipseTimeFactor f_and_logderiv_ellipse(double phi, const EllipseShape& s) {
    require_valid(s);
    const double c = std::cos(phi), sn = std::sin(phi);
    const double a2 = s.a * s.a, b2 = s.b * s.b;
    const double d2 = a2 * sn * sn + b2 * c * c;
    return {a2 * b2 / (d2 * std::sqrt(d2)), -3.0 * (a2 - b2) * sn * c / d2};
}

/// Slope for the zeta(Theta) equation consistent with a chosen rho at Theta0:
/// zeta'(Theta0) = 1 - f(Theta0) sin(zeta0) / rho0.
inline double zeta_initial_slope(double rho0, double zeta0, double Theta0,
                                 const EllipseShape& shape) {
    detail::require_rho_positive(rho0);
    return 1.0 - f_and_logderiv_ellipse(Theta0, shape).f * std::sin(zeta0) / rho0;
}

// ---------------------------------------------------------------------------
// Integration drivers. State layouts: circle [rho, zeta], ellipse
// [rho, zeta, phi], zeta ODE [zeta, zeta'] over Theta. rho down-crossing
// capture_eps ends a run through the event mechanism.
// ---------------------------------------------------------------------------

namespace detail {
inline EventSpec rho_capture_event(double capture_eps) {
    return {[capture_eps](double, std::span<const double> y) { return y[0] - capture_eps; },
            defaults::event_refine_tol};
}
inline void require_outside_capture(double rho0, double capture_eps) {
    require_rho_positive(rho0);
    if (rho0 <= capture_eps)
        throw CaptureError("reduced system starts within the capture radius");
}
// A stage probing rho <= 0 poisons the step with NaN so the step controller
// and event walk react instead of aborting mid-stage.
inline void poison(std::span<double> dy) {
    for (double& v : dy) v = std::numeric_limits<double>::quiet_NaN();
}
} // namespace detail

inline IntegrationResult integrate_dds_circle(double n, double a, double rho0, double zeta0,
                                              double t0, double t1,
                                              const IntegratorSettings& st = {},
                                              double capture_eps = defaults::capture_eps) {
    if (!(a > 0.0)) throw std::invalid_argument("circle radius must be positive");
    detail::require_outside_capture(rho0, capture_eps);
    OdeSystem sys{2, [n, a](double, std::span<const double> y, std::span<double> dy) {
                      if (!(y[0] > 0.0)) return detail::poison(dy);
                      auto [rd, zd] = dds_rhs_circle({y[0], y[1]}, n, a);
                      dy[0] = rd;
                      dy[1] = zd;
                  }};
    const double y0[2] = {rho0, zeta0};
    return integrate(sys, y0, t0, t1, st, detail::rho_capture_event(capture_eps));
}

inline IntegrationResult integrate_dds_ellipse(double n, const EllipseShape& shape, double rho0,
                                               double zeta0, double phi0, double t0, double t1,
                                               const IntegratorSettings& st = {},
                                               double capture_eps = defaults::capture_eps) {
    require_valid(shape);
    detail::require_outside_capture(rho0, capture_eps);
    OdeSystem sys{3, [n, shape](double, std::span<const double> y, std::span<double> dy) {
                      if (!(y[0] > 0.0)) return detail::poison(dy);
                      auto [rd, zd, pd] = dds_rhs_ellipse({y[0], y[1], y[2]}, n, shape);
                      dy[0] = rd;
                      dy[1] = zd;
                      dy[2] = pd;
                  }};
    const double y0[3] = {rho0, zeta0, phi0};
    return integrate(sys, y0, t0, t1, st, detail::rho_capture_event(capture_eps));
}

/// zeta(Theta) as a first-order pair [zeta, zeta'] for the elliptical case
/// (Theta identified with phi). Refuses to integrate through sin(zeta) = 0:
/// reaching the singular floor raises SingularityError naming the Theta.
inline IntegrationResult integrate_zeta_ode(double n, const EllipseShape& shape, double zeta0,
                                            double zeta_p0, double Theta0, double Theta1,
                                            const IntegratorSettings& st = {}) {
    require_valid(shape);
    if (std::abs(std::sin(zeta0)) <= zeta_singular_floor)
        throw SingularityError("zeta ODE singular: |sin zeta0| at/below the floor");
    OdeSystem sys{2, [n, shape](double Theta, std::span<const double> y, std::span<double> dy) {
                      if (std::abs(std::sin(y[0])) <= zeta_singular_floor)
                          return detail::poison(dy);
                      const EllipseTimeFactor tf = f_and_logderiv_ellipse(Theta, shape);
                      dy[0] = y[1];
                      dy[1] = zeta_second_order_rhs(y[0], y[1], Theta, tf.f,
                                                    tf.f_prime_over_f * tf.f, n);
                  }};
    EventSpec floor_event{[](double, std::span<const double> y) {
                              return std::abs(std::sin(y[0])) - zeta_singular_floor;
                          },
                          defaults::event_refine_tol};
    const double y0[2] = {zeta0, zeta_p0};
    IntegrationResult res = integrate(sys, y0, Theta0, Theta1, st, floor_event);
    if (res.event) {
        std::ostringstream os;
        os.precision(17);
        os << "zeta ODE singular: |sin zeta| reached the floor at Theta=" << res.event->t;
        throw SingularityError(os.str());
    }
    return res;
}

} // namespace plab
