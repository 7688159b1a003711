#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <span>
#include <vector>

#include "plab/angles.hpp"
#include "plab/curves.hpp"
#include "plab/dynsys.hpp"
#include "plab/errors.hpp"
#include "plab/ode.hpp"
#include "plab/pursuit.hpp"

namespace plab {

// ---------------------------------------------------------------------------
// Reparameterization invariance
// ---------------------------------------------------------------------------

/// Parameter of the constant-angular-velocity run whose evader position
/// matches `pos`: that parameterization's argument IS the polar angle.
/// Unwrapped onto the revolution nearest `ref`.
inline double match_angvel_param(Vec2 pos, double ref) {
    return unwrap_near(std::atan2(pos.y, pos.x), ref);
}

/// Parameter of the unit-speed run whose evader position matches `pos`:
/// the position components are proportional to (a^2 sin phi, -b^2 cos phi).
inline double match_arclen_param(Vec2 pos, const EllipseShape& s, double ref) {
    return unwrap_near(std::atan2(pos.x / (s.a * s.a), -pos.y / (s.b * s.b)), ref);
}

struct InvarianceAnchor {
    int k = 0;
    double t_standard = 0.0;    ///< anchor parameter of the standard run
    double t_angvel = 0.0;      ///< matched parameter of the const-angvel run
    double phi_arclen = 0.0;    ///< matched parameter of the unit-speed run
    Vec2 evader;                ///< common evader position at the anchor
    std::array<Vec2, 3> pursuer;
    double max_dev = 0.0;       ///< max pairwise pursuer distance
};

struct InvarianceReport {
    std::vector<InvarianceAnchor> anchors;
    double max_pursuer_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool capture_reported = false;   ///< a run captured before its orbit finished
    std::array<std::vector<Vec2>, 3> pursuer_paths;   ///< standard, angvel, arclen
};

/// Simulate the same pursuit under the three ellipse parameterizations over
/// one orbit and compare pursuer positions where the evaders coincide.
/// Anchors sit at t = k*anchor_step of the standard run; matching parameters
/// for the other two runs come from the closed-form matchers above (for the
/// default step pi/2 these land on the axis points, t = phi - pi/2 = k pi/2).
/// A capture is reported, not treated as failure. With threads > 1 the three
/// simulations run concurrently.
inline InvarianceReport invariance_check(const EllipseShape& shape, double n, Vec2 p0,
                                         double anchor_step = pi / 2.0, double tol = 1e-3,
                                         const IntegratorSettings& settings = {},
                                         unsigned threads = 1) {
    require_valid(shape);
    if (!(anchor_step > 0.0)) throw std::invalid_argument("anchor_step must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const double phi_start = pi / 2.0;
    auto run = [&](Parameterization p, double u0) {
        PursuitConfig cfg;
        cfg.n = n;
        cfg.p0 = p0;
        cfg.param0 = u0;
        cfg.param1 = u0 + two_pi;
        return simulate_pursuit(make_curve(p, shape), cfg, settings);
    };

    PursuitResult sims[3];
    if (threads > 1) {
        auto f0 = std::async(std::launch::async, run, Parameterization::standard, 0.0);
        auto f1 = std::async(std::launch::async, run, Parameterization::angvel, 0.0);
        auto f2 = std::async(std::launch::async, run, Parameterization::arclen, phi_start);
        sims[0] = f0.get();
        sims[1] = f1.get();
        sims[2] = f2.get();
    } else {
        sims[0] = run(Parameterization::standard, 0.0);
        sims[1] = run(Parameterization::angvel, 0.0);
        sims[2] = run(Parameterization::arclen, phi_start);
    }

    InvarianceReport rep;
    rep.tolerance = tol;
    rep.capture_reported =
        sims[0].capture.has_value() || sims[1].capture.has_value() || sims[2].capture.has_value();
    for (int i = 0; i < 3; ++i) {
        rep.pursuer_paths[i].reserve(sims[i].samples.size());
        for (const auto& s : sims[i].samples) rep.pursuer_paths[i].push_back(s.pursuer);
    }

    for (int k = 0;; ++k) {
        const double t = k * anchor_step;
        if (t > two_pi * (1.0 + 1e-12)) break;
        InvarianceAnchor a;
        a.k = k;
        a.t_standard = t;
        a.evader = ellipse_standard(t, shape).pos;
        a.t_angvel = match_angvel_param(a.evader, t);
        a.phi_arclen = match_arclen_param(a.evader, shape, t + phi_start);

        const double params[3] = {a.t_standard, a.t_angvel, a.phi_arclen};
        bool in_range = true;
        for (int i = 0; i < 3; ++i)
            in_range = in_range && params[i] <= sims[i].trajectory.t_back() + 1e-12;
        if (!in_range) break;   // a capture truncated some run; stop at covered anchors

        for (int i = 0; i < 3; ++i) {
            const StateVec y = sample_at(sims[i].trajectory, params[i]);
            a.pursuer[i] = {y[0], y[1]};
        }
        a.max_dev = std::max({distance(a.pursuer[0], a.pursuer[1]),
                              distance(a.pursuer[0], a.pursuer[2]),
                              distance(a.pursuer[1], a.pursuer[2])});
        rep.max_pursuer_deviation = std::max(rep.max_pursuer_deviation, a.max_dev);
        rep.anchors.push_back(a);
    }
    rep.pass = rep.max_pursuer_deviation <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Poincare section and limit-cycle verdict
// ---------------------------------------------------------------------------

struct SectionCrossing {
    int k = 0;              ///< crossing index, in encounter order
    double t = 0.0;         ///< integration time of the crossing
    double rho = 0.0;
    double zeta_wrapped = 0.0;   ///< zeta wrapped to (-pi, pi]
};

/// Up-crossings of phi = section_phi (mod 2pi) on a [rho, zeta, phi]
/// trajectory. phi is monotone for the curves here, so each target value is
/// bracketed once and refined on the dense output to 1e-10 in phi.
inline std::vector<SectionCrossing> poincare_crossings(const Trajectory& traj,
                                                       double section_phi) {
    if (traj.dim != 3) throw std::invalid_argument("poincare_crossings: expected 3-state trajectory");
    if (traj.size() < 2) throw Error("poincare_crossings: trajectory too short");

    const double phi_first = traj.state(0)[2];
    const double phi_last = traj.state(traj.size() - 1)[2];
    if (!(phi_last > phi_first))
        throw Error("poincare_crossings: evader phase is not increasing");

    std::vector<SectionCrossing> out;
    // First section value strictly after the start of the trajectory.
    double target = section_phi + two_pi * std::ceil((phi_first - section_phi) / two_pi);
    if (target <= phi_first) target += two_pi;
    constexpr double phi_tol = 1e-10;

    std::size_t i = 0;
    int k = 0;
    while (target <= phi_last) {
        while (i + 1 < traj.size() && traj.state(i + 1)[2] < target) ++i;
        if (i + 1 >= traj.size()) break;
        double t_lo = traj.t[i], t_hi = traj.t[i + 1];
        // bisection on the interpolated phase
        for (int it = 0; it < 200 && t_hi - t_lo > 1e-15 * std::max(1.0, std::abs(t_hi)); ++it) {
            const double tm = 0.5 * (t_lo + t_hi);
            const double pm = sample_at(traj, tm)[2];
            if (pm < target)
                t_lo = tm;
            else
                t_hi = tm;
            if (std::abs(pm - target) <= phi_tol) {
                t_lo = t_hi = tm;
                break;
            }
        }
        const double tc = 0.5 * (t_lo + t_hi);
        const StateVec y = sample_at(traj, tc);
        out.push_back({k++, tc, y[0], wrap_angle(y[1])});
        target += two_pi;
    }
    if (out.size() < 2) throw Error("poincare_crossings: fewer than 2 section crossings");
    return out;
}

struct LimitCycleResult {
    bool converged = false;
    double last_gap = 0.0;
    double cycle_rho = 0.0;
    double cycle_zeta = 0.0;
    bool gaps_non_increasing = false;   ///< over the last half of the list
    std::vector<double> gaps;           ///< gap k = distance(crossing k, crossing k-1)
};

/// Successive-crossing gaps in the (rho, wrapped zeta) plane. Converged means
/// the final gap is at/below tol; the monotonicity flag covers the last half
/// of the gaps (ties allowed).
inline LimitCycleResult limit_cycle_detect(std::span<const SectionCrossing> crossings,
                                           double tol) {
    if (crossings.size() < 3) throw Error("limit_cycle_detect: need at least 3 crossings");
    LimitCycleResult res;
    res.gaps.reserve(crossings.size() - 1);
    for (std::size_t i = 1; i < crossings.size(); ++i) {
        const double dr = crossings[i].rho - crossings[i - 1].rho;
        const double dz = wrap_angle(crossings[i].zeta_wrapped - crossings[i - 1].zeta_wrapped);
        res.gaps.push_back(std::sqrt(dr * dr + dz * dz));
    }
    res.last_gap = res.gaps.back();
    res.converged = res.last_gap <= tol;
    res.cycle_rho = crossings.back().rho;
    res.cycle_zeta = crossings.back().zeta_wrapped;

    res.gaps_non_increasing = true;
    for (std::size_t i = std::max<std::size_t>(1, res.gaps.size() / 2); i < res.gaps.size(); ++i)
        if (res.gaps[i] > res.gaps[i - 1] + 1e-12) res.gaps_non_increasing = false;
    return res;
}

// ---------------------------------------------------------------------------
// Radial convergence of the pursuer tail
// ---------------------------------------------------------------------------

namespace detail {
inline std::size_t tail_start(std::size_t size, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must be in (0, 1)");
    const auto start = static_cast<std::size_t>(std::floor(size * (1.0 - tail_fraction)));
    if (start >= size) throw Error("radial_convergence: empty tail");
    return start;
}
} // namespace detail

/// Max | |pursuer - center| - expected_r | over the trailing tail_fraction of
/// samples. With expected_r = n*a this measures convergence onto the reduced
/// circle.
inline double radial_convergence(std::span<const PursuitSample> samples, Vec2 center,
                                 double expected_r, double tail_fraction) {
    if (samples.empty()) throw Error("radial_convergence: empty tail");
    double dev = 0.0;
    for (std::size_t i = detail::tail_start(samples.size(), tail_fraction); i < samples.size();
         ++i)
        dev = std::max(dev, std::abs(distance(samples[i].pursuer, center) - expected_r));
    return dev;
}

/// Same tail measure against a (scaled) ellipse: the reference radius is the
/// ellipse's radius at the sample's own polar angle about `center`.
inline double scaled_ellipse_deviation(std::span<const PursuitSample> samples, Vec2 center,
                                       const EllipseShape& scaled, double tail_fraction) {
    require_valid(scaled);
    if (samples.empty()) throw Error("radial_convergence: empty tail");
    const double a2 = scaled.a * scaled.a, b2 = scaled.b * scaled.b;
    double dev = 0.0;
    for (std::size_t i = detail::tail_start(samples.size(), tail_fraction); i < samples.size();
         ++i) {
        const Vec2 d = samples[i].pursuer - center;
        const double theta = std::atan2(d.y, d.x);
        const double c = std::cos(theta), sn = std::sin(theta);
        const double r_ref = scaled.a * scaled.b / std::sqrt(a2 * sn * sn + b2 * c * c);
        dev = std::max(dev, std::abs(d.norm() - r_ref));
    }
    return dev;
}

} // namespace plab
