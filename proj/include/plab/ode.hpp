#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "plab/errors.hpp"

namespace plab {

namespace defaults {
inline constexpr double fixed_step       = 1e-4;
inline constexpr double rel_tol          = 1e-9;
inline constexpr double abs_tol          = 1e-12;
inline constexpr double event_refine_tol = 1e-10;
inline constexpr double capture_eps      = 1e-6;
} // namespace defaults

using StateVec = std::vector<double>;

/// First-order system y' = rhs(t, y), dimension fixed at construction.
struct OdeSystem {
    int dim = 0;
    std::function<void(double, std::span<const double>, std::span<double>)> rhs;
};

/// Accepted steps (t, y, y') with strictly increasing t. Derivatives are kept
/// so trajectories interpolate to 4th order between nodes (see sample_at).
struct Trajectory {
    int dim = 0;
    std::vector<double> t;
    std::vector<double> y;    ///< row-major, t.size() * dim
    std::vector<double> dy;   ///< rhs at each node, same layout

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    double t_front() const { return t.front(); }
    double t_back() const { return t.back(); }

    std::span<const double> state(std::size_t i) const {
        return {y.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const double> deriv(std::size_t i) const {
        return {dy.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }

    void push(double ti, std::span<const double> yi, std::span<const double> dyi) {
        t.push_back(ti);
        y.insert(y.end(), yi.begin(), yi.end());
        dy.insert(dy.end(), dyi.begin(), dyi.end());
    }
};

/// Terminal down-crossing event: integration stops when guard(t, y) passes
/// from positive to non-positive. The crossing is refined by bisection until
/// both the bracket and |guard| are at/below refine_tol scale.
struct EventSpec {
    std::function<double(double, std::span<const double>)> guard;
    double refine_tol = defaults::event_refine_tol;
};

struct EventHit {
    double t = 0.0;
    StateVec y;
};

struct IntegrationResult {
    Trajectory trajectory;
    std::optional<EventHit> event;
};

struct IntegratorSettings {
    enum class Method { fixed, adaptive };
    Method method   = Method::adaptive;
    double step     = defaults::fixed_step;   ///< fixed-step size
    double rel_tol  = defaults::rel_tol;
    double abs_tol  = defaults::abs_tol;
    double max_step = 0.0;                    ///< adaptive step cap; 0 = none
};

namespace detail {

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline std::string describe_state(double t, std::span<const double> y) {
    std::ostringstream os;
    os.precision(17);
    os << "t=" << t << ", state=[";
    for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << "]";
    return os.str();
}

struct Rk4Workspace {
    StateVec k1, k2, k3, k4, tmp;
    explicit Rk4Workspace(int dim)
        : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}
};

/// One classical RK4 step from (t, y) over h, written into out. A non-finite
/// RHS anywhere poisons out with NaN; callers decide how to react (reject the
/// step, walk the event, or raise).
inline void rk4_advance(const OdeSystem& sys, double t, std::span<const double> y,
                        double h, Rk4Workspace& w, std::span<double> out) {
    const std::size_t n = y.size();
    sys.rhs(t, y, w.k1);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
    sys.rhs(t + 0.5 * h, w.tmp, w.k2);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
    sys.rhs(t + 0.5 * h, w.tmp, w.k3);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * w.k3[i];
    sys.rhs(t + h, w.tmp, w.k4);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    if (!all_finite(w.k1) || !all_finite(w.k2) || !all_finite(w.k3) || !all_finite(w.k4))
        for (std::size_t i = 0; i < n; ++i) out[i] = std::numeric_limits<double>::quiet_NaN();
}

/// Refine the down-crossing of ev.guard inside (t_lo, t_hi], starting from the
/// accepted sample (t_lo, y_lo). The bracket is first narrowed with fixed RK4
/// substeps, then bisected; every trial state is one short RK4 step from the
/// nearest substep node, so trial error stays far below refine_tol.
inline EventHit refine_down_crossing(const OdeSystem& sys, double t_lo,
                                     std::span<const double> y_lo, double t_hi,
                                     const EventSpec& ev) {
    constexpr int substeps = 64;
    Rk4Workspace w(sys.dim);
    StateVec ya(y_lo.begin(), y_lo.end());
    StateVec yb(y_lo.size());
    double ta = t_lo;
    double tb = t_hi;
    double ga = ev.guard(ta, ya);
    const double h_sub = (t_hi - t_lo) / substeps;
    for (int i = 1; i <= substeps; ++i) {
        const double tn = (i == substeps) ? t_hi : t_lo + i * h_sub;
        rk4_advance(sys, ta, ya, tn - ta, w, yb);
        const double gb = ev.guard(tn, yb);
        if (ga > 0.0 && gb <= 0.0) {
            tb = tn;
            break;
        }
        ta = tn;
        ya = yb;
        ga = gb;
    }

    double lo = ta, hi = tb;
    double tm = hi;
    StateVec ym(ya.size());
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 200; ++it) {
        tm = 0.5 * (lo + hi);
        rk4_advance(sys, ta, ya, tm - ta, w, ym);
        const double gm = ev.guard(tm, ym);
        if (gm > 0.0)
            lo = tm;
        else
            hi = tm;
        const double width = hi - lo;
        const bool width_done = width <= 0.01 * ev.refine_tol ||
                                width <= 8.0 * eps * std::max(1.0, std::abs(tm));
        if (width_done && std::abs(gm) <= ev.refine_tol) break;
    }
    return {tm, std::move(ym)};
}

inline void hermite_point(std::span<const double> y0, std::span<const double> d0,
                          std::span<const double> y1, std::span<const double> d1, double h,
                          double s, std::span<double> out) {
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = h00 * y0[j] + h10 * h * d0[j] + h01 * y1[j] + h11 * h * d1[j];
}

/// State at t0 + dt via a few RK4 substeps from (t0, y0); accurate enough to
/// probe the guard anywhere inside one accepted step.
inline void probe_advance(const OdeSystem& sys, double t0, std::span<const double> y0,
                          double dt, Rk4Workspace& w, std::span<double> out) {
    constexpr int parts = 8;
    StateVec cur(y0.begin(), y0.end());
    double t = t0;
    for (int i = 1; i <= parts; ++i) {
        const double tn = t0 + dt * i / parts;
        rk4_advance(sys, t, cur, tn - t, w, out);
        cur.assign(out.begin(), out.end());
        t = tn;
    }
}

/// Re-walk (t0, t1] at 64x finer resolution looking for the first
/// down-crossing. Recurses (depth-capped) into any subinterval where the
/// guard is again small against its per-substep change, so crossings far
/// below the accepted step size still get resolved.
inline std::optional<EventHit> fine_event_walk(const OdeSystem& sys, const EventSpec& ev,
                                               double t0, std::span<const double> y0,
                                               double g0, double t1, int depth) {
    constexpr int substeps = 64;
    Rk4Workspace w(static_cast<int>(y0.size()));
    StateVec ya(y0.begin(), y0.end()), yb(y0.size());
    double ta = t0, ga = g0;
    for (int i = 1; i <= substeps; ++i) {
        const double tb = (i == substeps) ? t1 : t0 + (t1 - t0) * i / substeps;
        if (!(tb > ta)) continue;
        rk4_advance(sys, ta, ya, tb - ta, w, yb);
        const double gb = all_finite(yb) ? ev.guard(tb, yb)
                                         : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(gb)) {
            // blew past a singular region; any crossing sits before it
            if (depth > 0 && ga > 0.0)
                if (auto hit = fine_event_walk(sys, ev, ta, ya, ga, tb, depth - 1)) return hit;
            return std::nullopt;
        }
        if (ga > 0.0 && gb <= 0.0) return refine_down_crossing(sys, ta, ya, tb, ev);
        if (depth > 0 && ga > 0.0 && std::min(ga, gb) <= 8.0 * std::abs(gb - ga)) {
            if (auto hit = fine_event_walk(sys, ev, ta, ya, ga, tb, depth - 1)) return hit;
        }
        ta = tb;
        ya.swap(yb);
        ga = gb;
    }
    return std::nullopt;
}

/// Event check for one accepted step. Three triggers, cheapest first:
///  - endpoint sign change: classic bracket, bisect it;
///  - small guard: the guard value is within a few per-step changes of zero,
///    so the crossing may sit between nodes (a fast pursuer reaches capture
///    range and overshoots within one step) -> fine re-walk of the step;
///  - slope bracket: endpoint slopes enclose an interior minimum while both
///    values stay positive (wide smooth dip) -> golden-section probe.
inline std::optional<EventHit> check_event_step(const OdeSystem& sys, const EventSpec& ev,
                                                double t0, std::span<const double> y0,
                                                std::span<const double> f0, double t1,
                                                std::span<const double> y1,
                                                std::span<const double> f1, double g0,
                                                double g1) {
    if (g0 > 0.0 && g1 <= 0.0) return refine_down_crossing(sys, t0, y0, t1, ev);
    if (!(g0 > 0.0 && g1 > 0.0)) return std::nullopt;
    const double h = t1 - t0;
    if (!(h > 0.0)) return std::nullopt;

    if (std::min(g0, g1) <= 8.0 * std::abs(g1 - g0)) {
        if (auto hit = fine_event_walk(sys, ev, t0, y0, g0, t1, 4)) return hit;
        return std::nullopt;
    }

    constexpr double ds = 1e-3;
    StateVec tmp(y0.size());
    hermite_point(y0, f0, y1, f1, h, ds, tmp);
    const double slope_in = (ev.guard(t0 + ds * h, tmp) - g0) / (ds * h);
    hermite_point(y0, f0, y1, f1, h, 1.0 - ds, tmp);
    const double slope_out = (g1 - ev.guard(t1 - ds * h, tmp)) / (ds * h);
    if (!(slope_in < 0.0 && slope_out > 0.0)) return std::nullopt;

    Rk4Workspace w(static_cast<int>(y0.size()));
    StateVec yp(y0.size());
    auto g_at = [&](double t) {
        probe_advance(sys, t0, y0, t - t0, w, yp);
        return ev.guard(t, yp);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = t0, hi = t1;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double gx1 = g_at(x1), gx2 = g_at(x2);
    double t_hit = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 80; ++it) {
        if (gx1 <= 0.0) {
            t_hit = x1;
            break;
        }
        if (gx2 <= 0.0) {
            t_hit = x2;
            break;
        }
        if (gx1 < gx2) {
            hi = x2;
            x2 = x1;
            gx2 = gx1;
            x1 = hi - gr * (hi - lo);
            gx1 = g_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            gx1 = gx2;
            x2 = lo + gr * (hi - lo);
            gx2 = g_at(x2);
        }
        if (hi - lo <= 1e-12 * h) break;
    }
    if (!std::isfinite(t_hit)) return std::nullopt;
    return refine_down_crossing(sys, t0, y0, t_hit, ev);
}

/// Hairer-style starting step size for the embedded pair.
inline double initial_step(const OdeSystem& sys, double t0, std::span<const double> y0,
                           std::span<const double> f0, double rel_tol, double abs_tol,
                           double span) {
    const std::size_t n = y0.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = abs_tol + rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sk) * (y0[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    StateVec y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
    sys.rhs(t0 + h0, y1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = abs_tol + rel_tol * std::abs(y0[i]);
        d2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    d2 = std::sqrt(d2 / n) / h0;

    const double dm = std::max(d1, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, span});
}

} // namespace detail

/// Single classical 4th-order Runge-Kutta step. h may be negative but not zero.
inline StateVec rk4_step(const OdeSystem& sys, double t, std::span<const double> y, double h) {
    if (h == 0.0) throw std::invalid_argument("rk4_step: h must be nonzero");
    detail::Rk4Workspace w(static_cast<int>(y.size()));
    StateVec out(y.size());
    detail::rk4_advance(sys, t, y, h, w, out);
    if (!detail::all_finite(out))
        throw IntegrationError("non-finite RHS at " + detail::describe_state(t, y));
    return out;
}

/// Fixed-step RK4 over [t0, t1]; the final partial step lands exactly on t1.
/// With an event spec, stops at the first down-crossing of the guard.
inline IntegrationResult integrate_fixed(const OdeSystem& sys, std::span<const double> y0,
                                         double t0, double t1, double h = defaults::fixed_step,
                                         const std::optional<EventSpec>& event = std::nullopt) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate_fixed: h must be positive");
    if (t1 < t0) throw std::invalid_argument("integrate_fixed: t1 must be >= t0");

    IntegrationResult res;
    Trajectory& traj = res.trajectory;
    traj.dim = sys.dim;

    StateVec y(y0.begin(), y0.end()), ynew(y0.size()), f(y0.size()), fnew(y0.size());
    detail::Rk4Workspace w(sys.dim);

    sys.rhs(t0, y, f);
    if (!detail::all_finite(y) || !detail::all_finite(f))
        throw IntegrationError("non-finite initial state or RHS at " + detail::describe_state(t0, y));
    traj.push(t0, y, f);

    double g_prev = event ? event->guard(t0, y) : 0.0;
    double t = t0;
    while (t < t1) {
        const double tn = (t + h >= t1) ? t1 : t + h;
        detail::rk4_advance(sys, t, y, tn - t, w, ynew);
        if (detail::all_finite(ynew)) sys.rhs(tn, ynew, fnew);
        if (!detail::all_finite(ynew) || !detail::all_finite(fnew)) {
            // the event (if armed) may sit just before the blow-up
            if (event && g_prev > 0.0) {
                if (auto hit = detail::fine_event_walk(sys, *event, t, y, g_prev, tn, 4)) {
                    sys.rhs(hit->t, hit->y, fnew);
                    traj.push(hit->t, hit->y, fnew);
                    res.event = std::move(hit);
                    return res;
                }
            }
            throw IntegrationError("integration blew up at " + detail::describe_state(tn, ynew));
        }
        if (event) {
            const double g = event->guard(tn, ynew);
            if (auto hit = detail::check_event_step(sys, *event, t, y, f, tn, ynew, fnew,
                                                    g_prev, g)) {
                sys.rhs(hit->t, hit->y, fnew);
                traj.push(hit->t, hit->y, fnew);
                res.event = std::move(hit);
                return res;
            }
            g_prev = g;
        }
        traj.push(tn, ynew, fnew);
        y.swap(ynew);
        f.swap(fnew);
        t = tn;
    }
    return res;
}

/// Adaptive Dormand-Prince 5(4) with PI-free standard step control. Accepted
/// steps are recorded; events follow the same contract as integrate_fixed.
inline IntegrationResult integrate_adaptive(const OdeSystem& sys, std::span<const double> y0,
                                            double t0, double t1,
                                            double rel_tol = defaults::rel_tol,
                                            double abs_tol = defaults::abs_tol,
                                            const std::optional<EventSpec>& event = std::nullopt,
                                            double max_step = 0.0) {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("integrate_adaptive: tolerances must be positive");
    if (t1 < t0) throw std::invalid_argument("integrate_adaptive: t1 must be >= t0");

    // Dormand-Prince 5(4) tableau; the 5th-order weights double as row 7 (FSAL).
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                     e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                     e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    IntegrationResult res;
    Trajectory& traj = res.trajectory;
    traj.dim = sys.dim;

    const std::size_t n = y0.size();
    StateVec y(y0.begin(), y0.end());
    StateVec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    sys.rhs(t0, y, k1);
    if (!detail::all_finite(y) || !detail::all_finite(k1))
        throw IntegrationError("non-finite initial state or RHS at " + detail::describe_state(t0, y));
    traj.push(t0, y, k1);
    if (t1 == t0) return res;

    const double span = t1 - t0;
    const double h_min = 1e-14 * span;
    double h = detail::initial_step(sys, t0, y, k1, rel_tol, abs_tol, span);
    if (!std::isfinite(h) || h <= 0.0) h = std::min(1e-6, span);
    if (max_step > 0.0) h = std::min(h, max_step);

    double g_prev = event ? event->guard(t0, y) : 0.0;
    double t = t0;
    while (t < t1) {
        h = std::min(h, t1 - t);
        double err = 0.0;
        bool accepted = false;
        while (!accepted) {
            if (h < h_min)
                throw IntegrationError("step size underflow at " + detail::describe_state(t, y));
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            sys.rhs(t + c2 * h, ytmp, k2);
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            sys.rhs(t + c3 * h, ytmp, k3);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            sys.rhs(t + c4 * h, ytmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            sys.rhs(t + c5 * h, ytmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                      a65 * k5[i]);
            sys.rhs(t + h, ytmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                      b6 * k6[i]);
            sys.rhs(t + h, ynew, k7);

            err = 0.0;
            bool finite = detail::all_finite(ynew) && detail::all_finite(k7);
            if (finite) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                          e6 * k6[i] + e7 * k7[i]);
                    const double sk =
                        abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                    err += (e / sk) * (e / sk);
                }
                err = std::sqrt(err / n);
            }
            if (!finite || !std::isfinite(err)) {
                h *= 0.5;
                continue;
            }
            if (err <= 1.0) {
                accepted = true;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
        }

        const double tn = t + h;
        if (event) {
            const double g = event->guard(tn, ynew);
            if (auto hit = detail::check_event_step(sys, *event, t, y, k1, tn, ynew, k7,
                                                    g_prev, g)) {
                sys.rhs(hit->t, hit->y, k2);
                traj.push(hit->t, hit->y, k2);
                res.event = std::move(hit);
                return res;
            }
            g_prev = g;
        }
        traj.push(tn, ynew, k7);
        y.swap(ynew);
        k1.swap(k7);   // FSAL
        t = tn;

        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
        if (max_step > 0.0) h = std::min(h, max_step);
    }
    return res;
}

/// Dispatch on IntegratorSettings::method.
inline IntegrationResult integrate(const OdeSystem& sys, std::span<const double> y0, double t0,
                                   double t1, const IntegratorSettings& st = {},
                                   const std::optional<EventSpec>& event = std::nullopt) {
    if (st.method == IntegratorSettings::Method::fixed)
        return integrate_fixed(sys, y0, t0, t1, st.step, event);
    return integrate_adaptive(sys, y0, t0, t1, st.rel_tol, st.abs_tol, event, st.max_step);
}

/// Dense output: cubic Hermite between stored nodes, exact at the nodes.
inline StateVec sample_at(const Trajectory& traj, double t) {
    if (traj.empty()) throw std::out_of_range("sample_at: empty trajectory");
    const double lo = traj.t_front(), hi = traj.t_back();
    const double slack = 1e-12 * std::max(1.0, hi - lo);
    if (t < lo - slack || t > hi + slack) {
        std::ostringstream os;
        os.precision(17);
        os << "sample_at: t=" << t << " outside [" << lo << ", " << hi << "]";
        throw std::out_of_range(os.str());
    }
    t = std::clamp(t, lo, hi);
    if (traj.size() == 1) return StateVec(traj.state(0).begin(), traj.state(0).end());

    auto it = std::upper_bound(traj.t.begin(), traj.t.end(), t);
    std::size_t i = (it == traj.t.begin()) ? 0 : static_cast<std::size_t>(it - traj.t.begin()) - 1;
    if (i + 1 >= traj.size()) i = traj.size() - 2;
    if (traj.t[i] == t) return StateVec(traj.state(i).begin(), traj.state(i).end());
    if (traj.t[i + 1] == t) return StateVec(traj.state(i + 1).begin(), traj.state(i + 1).end());

    const double h = traj.t[i + 1] - traj.t[i];
    const double s = (t - traj.t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    auto y0 = traj.state(i), y1 = traj.state(i + 1);
    auto d0 = traj.deriv(i), d1 = traj.deriv(i + 1);
    StateVec out(static_cast<std::size_t>(traj.dim));
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = h00 * y0[j] + h10 * h * d0[j] + h01 * y1[j] + h11 * h * d1[j];
    return out;
}

} // namespace plab
