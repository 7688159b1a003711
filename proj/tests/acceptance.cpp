// Acceptance suite: end-to-end checks of the library against its pinned
// tolerances. Each case prints one [PASS]/[FAIL] line so a run reads as a
// checklist; ctest fails if any check fails.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "plab/analysis.hpp"
#include "plab/angles.hpp"
#include "plab/curves.hpp"
#include "plab/dynsys.hpp"
#include "plab/ode.hpp"
#include "plab/pursuit.hpp"

using namespace plab;

namespace {

const EllipseShape kEllipse{1.0, 0.5};
const EllipseShape kCircle{1.0, 1.0};
constexpr double kN = 0.5;
constexpr double kRhoStar = 0.8660254;    // a sqrt(1 - n^2), n = 1/2, a = 1
constexpr double kZetaStar = 1.0471976;   // arccos(1/2)

void report(int criterion, const char* name, bool ok, double measured, double limit) {
    std::printf("[%s] criterion %d: %-34s (measured %.3e, limit %.1e)\n",
                ok ? "PASS" : "FAIL", criterion, name, measured, limit);
}

PursuitResult run_circle_ten_orbits() {
    PursuitConfig cfg;
    cfg.n = kN;
    cfg.p0 = {0.0, 0.0};
    cfg.param0 = 0.0;
    cfg.param1 = 10.0 * two_pi;
    return simulate_pursuit(make_curve(Parameterization::circle, kCircle), cfg);
}

PursuitResult run_ellipse_ten_orbits() {
    PursuitConfig cfg;
    cfg.n = kN;
    cfg.p0 = {0.0, 0.0};
    cfg.param0 = 0.0;
    cfg.param1 = 10.0 * two_pi;
    return simulate_pursuit(make_curve(Parameterization::standard, kEllipse), cfg);
}

// time at which the [rho, zeta, phi] trajectory passes the given phase
double t_at_phi(const Trajectory& traj, double phi_target) {
    double lo = traj.t_front(), hi = traj.t_back();
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        const double tm = 0.5 * (lo + hi);
        if (sample_at(traj, tm)[2] < phi_target)
            lo = tm;
        else
            hi = tm;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("criterion 1: circular reduction") {
    const auto res = run_circle_ten_orbits();
    REQUIRE_FALSE(res.capture.has_value());
    const double dev = radial_convergence(res.samples, {0.0, 0.0}, kN * 1.0, 0.2);
    const bool ok = dev <= 1e-3;
    report(1, "circular reduction to radius n*a", ok, dev, 1e-3);
    CHECK(ok);
}

TEST_CASE("criterion 2: elliptical non-reduction") {
    const auto res = run_ellipse_ten_orbits();
    REQUIRE_FALSE(res.capture.has_value());
    const double dev =
        scaled_ellipse_deviation(res.samples, {0.0, 0.0}, {kN * 1.0, kN * 0.5}, 0.2);
    const bool ok = dev > 0.05;
    report(2, "pursuer tail off the n-scaled ellipse", ok, dev, 0.05);
    CHECK(ok);
}

TEST_CASE("criterion 3: parameterization invariance") {
    IntegratorSettings st;
    st.rel_tol = 1e-9;
    st.abs_tol = 1e-12;
    const auto rep = invariance_check(kEllipse, kN, {0.0, 0.0}, pi / 2.0, 1e-3, st);
    REQUIRE(rep.anchors.size() >= 5);
    const bool ok_dev = rep.pass && rep.max_pursuer_deviation <= 1e-3;
    report(3, "pursuer deviation across params", ok_dev, rep.max_pursuer_deviation, 1e-3);
    CHECK(ok_dev);

    IntegratorSettings tight = st;
    tight.rel_tol = 1e-11;
    tight.abs_tol = 1e-14;
    const auto rep2 = invariance_check(kEllipse, kN, {0.0, 0.0}, pi / 2.0, 1e-3, tight);
    const bool ok_shrink = rep2.max_pursuer_deviation * 10.0 <= rep.max_pursuer_deviation;
    report(3, "deviation shrinks >= 10x at 100x tol", ok_shrink,
           rep2.max_pursuer_deviation / rep.max_pursuer_deviation, 0.1);
    CHECK(ok_shrink);
}

TEST_CASE("criterion 4: circular reduced system reaches its equilibrium") {
    const auto res = integrate_dds_circle(kN, 1.0, 1.0, pi / 2.0, 0.0, 10.0 * pi);
    REQUIRE_FALSE(res.event.has_value());
    const auto yf = res.trajectory.state(res.trajectory.size() - 1);
    const double dev = std::max(std::abs(yf[0] - kRhoStar), std::abs(yf[1] - kZetaStar));
    const bool ok = dev <= 1e-3;
    report(4, "final (rho, zeta) vs (0.866, 1.047)", ok, dev, 1e-3);
    CHECK(ok);
}

TEST_CASE("criterion 5: stability algebra") {
    const double n_crit = 2.0 / std::sqrt(5.0);
    const double ns[] = {0.3, 0.5, n_crit, 0.9, 0.95};
    const double as[] = {1.0, 2.0};

    double worst = 0.0;
    bool parts_negative = true;
    for (double n : ns)
        for (double a : as) {
            auto [rs, zs] = equilibrium_circle(n, a);
            // complex-step differentiation of the reduced circular field:
            // cancellation-free, which the defective Jacobian at n = 2/sqrt(5)
            // needs (real-step noise enters its eigenvalues as sqrt(noise))
            using cplx = std::complex<double>;
            auto field = [&](cplx r, cplx z) {
                return std::pair<cplx, cplx>{std::cos(z) - n, -std::sin(z) / r + 1.0 / a};
            };
            const double h = 1e-20;
            const auto [f_dr, g_dr] = field({rs, h}, {zs, 0.0});
            const auto [f_dz, g_dz] = field({rs, 0.0}, {zs, h});
            const Mat2 numeric{f_dr.imag() / h, f_dz.imag() / h, g_dr.imag() / h,
                               g_dz.imag() / h};
            auto [n1, n2] = eigenvalues(numeric);
            auto [c1, c2] = eigenvalues_circle(n, a);
            if (n1.imag() < n2.imag()) std::swap(n1, n2);
            if (c1.imag() < c2.imag()) std::swap(c1, c2);
            if (c1.imag() == c2.imag() && c1.real() < c2.real()) std::swap(c1, c2);
            if (n1.imag() == n2.imag() && n1.real() < n2.real()) std::swap(n1, n2);
            worst = std::max({worst, std::abs(n1 - c1), std::abs(n2 - c2)});
            parts_negative = parts_negative && c1.real() < 0.0 && c2.real() < 0.0;
        }
    const bool ok_match = worst <= 1e-6;
    report(5, "closed-form vs numeric eigenvalues", ok_match, worst, 1e-6);
    CHECK(ok_match);

    const bool ok_flip = classify_equilibrium(0.3) == StabilityClass::stable_spiral &&
                         classify_equilibrium(0.5) == StabilityClass::stable_spiral &&
                         classify_equilibrium(n_crit) == StabilityClass::degenerate_double_root &&
                         classify_equilibrium(0.9) == StabilityClass::stable_node &&
                         classify_equilibrium(0.95) == StabilityClass::stable_node;
    report(5, "spiral/node flip exactly at 2/sqrt(5)", ok_flip, ok_flip ? 0.0 : 1.0, 0.0);
    CHECK(ok_flip);

    report(5, "all real parts negative", parts_negative, parts_negative ? 0.0 : 1.0, 0.0);
    CHECK(parts_negative);
}

TEST_CASE("criterion 6: elliptical limit cycle on the Poincare section") {
    const auto res = integrate_dds_ellipse(kN, kEllipse, 1.0, pi / 2.0, pi / 2.0, 0.0,
                                           10.0 * pi);
    REQUIRE_FALSE(res.event.has_value());
    const auto crossings = poincare_crossings(res.trajectory, pi / 2.0);
    REQUIRE(crossings.size() >= 3);
    const auto verdict = limit_cycle_detect(crossings, 1e-3);
    const bool ok = verdict.converged && verdict.gaps_non_increasing;
    report(6, "final section gap and monotonicity", ok, verdict.last_gap, 1e-3);
    CHECK(verdict.converged);
    CHECK(verdict.gaps_non_increasing);
}

TEST_CASE("criterion 7: Cartesian and reduced models agree pointwise") {
    // Cartesian run in the unit-speed parameterization over one orbit of phi
    PursuitConfig cfg;
    cfg.n = kN;
    cfg.p0 = {0.0, 0.0};
    cfg.param0 = pi / 2.0;
    cfg.param1 = pi / 2.0 + two_pi;
    const auto cart = simulate_pursuit(make_curve(Parameterization::arclen, kEllipse), cfg);
    REQUIRE_FALSE(cart.capture.has_value());

    // reduced run started from the matching state: E(pi/2) = (1,0), P = (0,0)
    // gives rho = 1, Theta = pi/2, theta = 0, zeta = pi/2
    const auto red = integrate_dds_ellipse(kN, kEllipse, 1.0, pi / 2.0, pi / 2.0, 0.0, 6.0);
    REQUIRE_FALSE(red.event.has_value());
    REQUIRE(red.trajectory.state(red.trajectory.size() - 1)[2] >= cfg.param1);

    double max_dev = 0.0;
    const int grid = 200;
    for (int i = 0; i <= grid; ++i) {
        const double phi = cfg.param0 + two_pi * i / grid;
        const StateVec pc = sample_at(cart.trajectory, phi);
        const double t = t_at_phi(red.trajectory, phi);
        const StateVec y = sample_at(red.trajectory, t);
        const Vec2 p_rec =
            reconstruct_pursuer(ellipse_const_speed(phi, kEllipse).pos, phi,
                                {y[0], y[1], y[2]});
        max_dev = std::max(max_dev, distance({pc[0], pc[1]}, p_rec));
    }
    const bool ok = max_dev <= 1e-4;
    report(7, "simulate vs reconstructed pursuer", ok, max_dev, 1e-4);
    CHECK(ok);
}

TEST_CASE("criterion 8: zeta(Theta) equation matches the reduced system") {
    const double theta0 = pi / 2.0, theta1 = pi / 2.0 + two_pi;
    const double rho0 = 1.0, zeta0 = pi / 2.0;

    const auto red = integrate_dds_ellipse(kN, kEllipse, rho0, zeta0, theta0, 0.0, 6.0);
    REQUIRE(red.trajectory.state(red.trajectory.size() - 1)[2] >= theta1);

    const double slope = zeta_initial_slope(rho0, zeta0, theta0, kEllipse);
    IntegrationResult zo;
    try {
        zo = integrate_zeta_ode(kN, kEllipse, zeta0, slope, theta0, theta1);
    } catch (const SingularityError& e) {
        std::printf("[SKIP] criterion 8: sin(zeta) hit the singular floor: %s\n", e.what());
        return;
    }

    double max_dev = 0.0;
    double min_sin = 1.0;
    const int grid = 200;
    for (int i = 0; i <= grid; ++i) {
        const double theta = theta0 + two_pi * i / grid;
        const double z_ode = sample_at(zo.trajectory, theta)[0];
        const double t = t_at_phi(red.trajectory, theta);
        const double z_red = sample_at(red.trajectory, t)[1];
        max_dev = std::max(max_dev, std::abs(z_ode - z_red));
        min_sin = std::min(min_sin, std::abs(std::sin(z_red)));
    }
    if (min_sin <= zeta_singular_floor) {
        std::printf("[SKIP] criterion 8: sin(zeta) reached %.3e on the compared span\n",
                    min_sin);
        return;
    }
    const bool ok = max_dev <= 1e-4;
    report(8, "zeta from Eq. order-2 vs reduced run", ok, max_dev, 1e-4);
    CHECK(ok);
}

TEST_CASE("criterion 9: pursuit invariants across the acceptance runs") {
    struct Run {
        PursuitResult res;
        EvaderCurve curve;
    };
    std::vector<Run> runs;
    runs.push_back({run_circle_ten_orbits(), make_curve(Parameterization::circle, kCircle)});
    runs.push_back({run_ellipse_ten_orbits(), make_curve(Parameterization::standard, kEllipse)});
    for (auto p : {Parameterization::standard, Parameterization::angvel,
                   Parameterization::arclen}) {
        PursuitConfig cfg;
        cfg.n = kN;
        cfg.p0 = {0.0, 0.0};
        cfg.param0 = curve_param_start(p);
        cfg.param1 = cfg.param0 + two_pi;
        runs.push_back({simulate_pursuit(make_curve(p, kEllipse), cfg),
                        make_curve(p, kEllipse)});
    }

    double worst_speed = 0.0, worst_bearing = 0.0;
    for (const auto& run : runs) {
        const auto& traj = run.res.trajectory;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const EvaderState ev = run.curve(traj.t[i]);
            const Vec2 p{traj.state(i)[0], traj.state(i)[1]};
            const Vec2 pdot{traj.deriv(i)[0], traj.deriv(i)[1]};
            const double rho = distance(ev.pos, p);
            worst_speed = std::max(worst_speed, std::abs(pdot.norm() / ev.vel.norm() - kN));
            if (rho > 0.0 && pdot.norm() > 0.0)
                worst_bearing = std::max(
                    worst_bearing, std::abs(pdot.cross(ev.pos - p)) / (rho * pdot.norm()));
        }
    }
    const bool ok_speed = worst_speed <= 1e-6;
    report(9, "speed ratio |P'|/|E'| = n", ok_speed, worst_speed, 1e-6);
    CHECK(ok_speed);
    const bool ok_bearing = worst_bearing <= 1e-9;
    report(9, "bearing cross-product bound", ok_bearing, worst_bearing, 1e-9);
    CHECK(ok_bearing);
}
