#pragma once
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "plab/curves.hpp"
#include "plab/errors.hpp"
#include "plab/ode.hpp"
#include "plab/vec2.hpp"

namespace plab {

struct PursuitConfig {
    double n = 0.5;                  ///< pursuer : evader speed ratio
    Vec2 p0{0.0, 0.0};               ///< initial pursuer position
    double param0 = 0.0;             ///< curve-parameter interval
    double param1 = two_pi;
    double capture_eps = defaults::capture_eps;

    bool valid() const {
        return n > 0.0 && param1 > param0 && capture_eps > 0.0 && p0.finite();
    }
};

struct PursuitSample {
    double param = 0.0;
    Vec2 evader;
    Vec2 pursuer;
    double lambda = 0.0;   ///< separation / pursuer speed, per unit parameter
    double rho = 0.0;      ///< |evader - pursuer|
};

struct CaptureEvent {
    double param = 0.0;
    Vec2 position;
};

/// Evader curve pre-bound to its shape: parameter -> EvaderState.
using EvaderCurve = std::function<EvaderState(double)>;

inline EvaderCurve make_curve(Parameterization p, const EllipseShape& shape) {
    require_valid(shape);
    if (p == Parameterization::circle && !shape.is_circle())
        throw std::invalid_argument("circle parameterization requires a == b");
    return [p, shape](double u) { return eval_curve(p, u, shape); };
}

/// Pursuer velocity per unit of the evader's parameter:
/// n |E'| (E - P) / |E - P|. Its magnitude is exactly n |E'| and its
/// direction points from the pursuer at the evader. Dividing the time form
/// by phi_dot is implicit here: the curve's vel already is d(pos)/d(param).
inline Vec2 pursuit_rhs(const EvaderState& ev, Vec2 p, double n) {
    const Vec2 offset = ev.pos - p;
    const double rho = offset.norm();
    if (rho <= 0.0)
        throw CaptureError("pursuit_rhs: pursuer coincides with evader");
    return offset * (n * ev.vel.norm() / rho);
}

/// Scalar lambda with E - P = lambda * P': separation over pursuer speed,
/// i.e. rho / (n |E'|).
inline double lambda_of(const EvaderState& ev, Vec2 p, double n) {
    const double speed = ev.vel.norm();
    if (speed <= 0.0) throw Error("lambda_of: evader speed is zero");
    return distance(ev.pos, p) / (n * speed);
}

struct PursuitResult {
    Trajectory trajectory;                ///< raw pursuer (x, y) over the curve parameter
    std::vector<PursuitSample> samples;
    std::optional<CaptureEvent> capture;
};

/// Integrate the pursuer against `curve` over [param0, param1]. Integration
/// runs in the curve's own parameter; capture is detected as the separation
/// down-crossing capture_eps and stops the run there (the ODE is singular at
/// zero separation, so stepping across it is never attempted).
inline PursuitResult simulate_pursuit(const EvaderCurve& curve, const PursuitConfig& cfg,
                                      const IntegratorSettings& settings = {}) {
    if (!cfg.valid()) throw std::invalid_argument("simulate_pursuit: invalid config");
    const EvaderState ev0 = curve(cfg.param0);
    if (distance(ev0.pos, cfg.p0) <= cfg.capture_eps)
        throw CaptureError("simulate_pursuit: pursuer starts within the capture radius");

    OdeSystem sys{2, [&curve, n = cfg.n](double u, std::span<const double> y,
                                         std::span<double> dydu) {
                      const EvaderState ev = curve(u);
                      const Vec2 offset = ev.pos - Vec2{y[0], y[1]};
                      const double rho = offset.norm();
                      if (!(rho > 0.0)) {
                          // a stage probed exact coincidence; poison the step
                          dydu[0] = dydu[1] = std::numeric_limits<double>::quiet_NaN();
                          return;
                      }
                      const Vec2 v = offset * (n * ev.vel.norm() / rho);
                      dydu[0] = v.x;
                      dydu[1] = v.y;
                  }};
    EventSpec capture_event{
        [&curve, eps = cfg.capture_eps](double u, std::span<const double> y) {
            return distance(curve(u).pos, {y[0], y[1]}) - eps;
        },
        defaults::event_refine_tol};

    const double y0[2] = {cfg.p0.x, cfg.p0.y};
    IntegrationResult run = integrate(sys, y0, cfg.param0, cfg.param1, settings, capture_event);

    PursuitResult res;
    res.samples.reserve(run.trajectory.size());
    for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
        const double u = run.trajectory.t[i];
        const auto y = run.trajectory.state(i);
        const EvaderState ev = curve(u);
        const Vec2 p{y[0], y[1]};
        res.samples.push_back({u, ev.pos, p, lambda_of(ev, p, cfg.n), distance(ev.pos, p)});
    }
    if (run.event)
        res.capture = CaptureEvent{run.event->t, {run.event->y[0], run.event->y[1]}};
    res.trajectory = std::move(run.trajectory);
    return res;
}

} // namespace plab
