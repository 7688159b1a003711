#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plab/angles.hpp"
#include "plab/dynsys.hpp"

using namespace plab;

namespace {

const EllipseShape kShape{1.0, 0.5};
const double kNCrit = 2.0 / std::sqrt(5.0);

// central-difference Jacobian of the circular vector field
Mat2 fd_jacobian(double n, double a, double rho, double zeta, double h = 1e-6) {
    auto f = [&](double r, double z) { return dds_rhs_circle({r, z}, n, a); };
    const auto [fr_p, gr_p] = f(rho + h, zeta);
    const auto [fr_m, gr_m] = f(rho - h, zeta);
    const auto [fz_p, gz_p] = f(rho, zeta + h);
    const auto [fz_m, gz_m] = f(rho, zeta - h);
    return {(fr_p - fr_m) / (2 * h), (fz_p - fz_m) / (2 * h), (gr_p - gr_m) / (2 * h),
            (gz_p - gz_m) / (2 * h)};
}

void check_eig_pair(std::pair<std::complex<double>, std::complex<double>> got,
                    std::pair<std::complex<double>, std::complex<double>> want, double tol) {
    auto key = [](const std::complex<double>& z) {
        return std::make_pair(z.real(), z.imag());
    };
    if (key(got.first) > key(got.second)) std::swap(got.first, got.second);
    if (key(want.first) > key(want.second)) std::swap(want.first, want.second);
    CHECK(std::abs(got.first - want.first) < tol);
    CHECK(std::abs(got.second - want.second) < tol);
}

} // namespace

TEST_CASE("reduced vector field") {
    auto [rd, zd] = dds_rhs({1.0, pi / 2.0, 0.0}, 1.0, 0.5);
    CHECK(rd == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(std::abs(zd) < 1e-15);

    auto [rd2, zd2] = dds_rhs({3.7, 0.0, 0.0}, 0.0, 1.0);
    CHECK(rd2 == 0.0);
    CHECK(zd2 == 0.0);

    auto [rd3, zd3] = dds_rhs({2.0, 0.0, 0.0}, 0.25, 0.5);
    CHECK(rd3 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(zd3 == doctest::Approx(0.25).epsilon(1e-15));

    CHECK_THROWS_AS(dds_rhs({0.0, 1.0, 0.0}, 1.0, 0.5), SingularityError);
    CHECK_THROWS_AS(dds_rhs({-1.0, 1.0, 0.0}, 1.0, 0.5), SingularityError);
}

TEST_CASE("circular specialization uses Theta' = 1/a") {
    auto [rd, zd] = dds_rhs_circle({1.0, pi / 2.0, 0.0}, 0.5, 1.0);
    CHECK(rd == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(std::abs(zd) < 1e-15);

    auto [rd2, zd2] = dds_rhs_circle({0.5, 0.0, 0.0}, 0.5, 2.0);
    CHECK(rd2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(zd2 == doctest::Approx(0.5).epsilon(1e-15));

    auto [rs, zs] = equilibrium_circle(0.5, 1.0);
    auto [rde, zde] = dds_rhs_circle({rs, zs, 0.0}, 0.5, 1.0);
    CHECK(std::abs(rde) < 1e-15);
    CHECK(std::abs(zde) < 1e-15);
}

TEST_CASE("elliptical specialization couples in phi via phi_dot") {
    auto [rd, zd, pd] = dds_rhs_ellipse({1.0, pi / 2.0, pi / 2.0}, 0.5, kShape);
    CHECK(rd == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(zd == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(pd == doctest::Approx(4.0).epsilon(1e-14));

    auto [rd2, zd2, pd2] = dds_rhs_ellipse({1.0, 0.0, 0.0}, 0.5, kShape);
    CHECK(rd2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(zd2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pd2 == doctest::Approx(0.5).epsilon(1e-15));

    // a = b: identical to the circular field for random states
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> rs(0.1, 3.0), zs(-3.0, 3.0), ps(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const DynState st{rs(rng), zs(rng), ps(rng)};
        auto [er, ez, ep] = dds_rhs_ellipse(st, 0.5, {1.4, 1.4});
        auto [cr, cz] = dds_rhs_circle(st, 0.5, 1.4);
        CHECK(er == doctest::Approx(cr).epsilon(1e-14));
        CHECK(ez == doctest::Approx(cz).epsilon(1e-13));
        CHECK(ep == doctest::Approx(1.0 / 1.4).epsilon(1e-13));
    }
}

TEST_CASE("equilibrium location") {
    auto [r1, z1] = equilibrium_circle(0.5, 1.0);
    CHECK(r1 == doctest::Approx(0.8660254037844386).epsilon(1e-12));
    CHECK(z1 == doctest::Approx(1.0471975511965976).epsilon(1e-12));

    auto [r2, z2] = equilibrium_circle(0.6, 2.0);
    CHECK(r2 == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(z2 == doctest::Approx(0.9272952180016122).epsilon(1e-9));

    auto [r3, z3] = equilibrium_circle(1e-12, 1.0);
    CHECK(r3 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(z3 == doctest::Approx(pi / 2.0).epsilon(1e-9));

    CHECK_THROWS_AS(equilibrium_circle(1.0, 1.0), Error);
    CHECK_THROWS_AS(equilibrium_circle(-0.5, 1.0), std::invalid_argument);
}

TEST_CASE("equilibrium is exact for random parameters") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ns(1e-3, 1.0 - 1e-3), as(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double n = ns(rng), a = as(rng);
        auto [rs, zs] = equilibrium_circle(n, a);
        auto [rd, zd] = dds_rhs_circle({rs, zs, 0.0}, n, a);
        CHECK(std::abs(rd) < 1e-12);
        CHECK(std::abs(zd) < 1e-12);
    }
}

TEST_CASE("analytic Jacobian matches the definition and finite differences") {
    const Mat2 j = jacobian_circle(0.5, 1.0);
    CHECK(j.m00 == 0.0);
    CHECK(j.m01 == doctest::Approx(-0.8660254037844386).epsilon(1e-12));
    CHECK(j.m10 == doctest::Approx(1.1547005383792515).epsilon(1e-12));
    CHECK(j.m11 == doctest::Approx(-0.5773502691896257).epsilon(1e-12));

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ns(0.05, 0.95), as(0.3, 4.0);
    for (int i = 0; i < 50; ++i) {
        const double n = ns(rng), a = as(rng);
        auto [rs, zs] = equilibrium_circle(n, a);
        const Mat2 exact = jacobian_circle(n, a);
        const Mat2 fd = fd_jacobian(n, a, rs, zs);
        CHECK(std::abs(exact.m00 - fd.m00) < 1e-6);
        CHECK(std::abs(exact.m01 - fd.m01) < 1e-6);
        CHECK(std::abs(exact.m10 - fd.m10) < 1e-6);
        CHECK(std::abs(exact.m11 - fd.m11) < 1e-6);
        // structure: trace < 0, det = 1/a^2
        CHECK(exact.trace() < 0.0);
        CHECK(exact.det() == doctest::Approx(1.0 / (a * a)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form eigenvalues match the characteristic polynomial") {
    check_eig_pair(eigenvalues_circle(0.5, 1.0),
                   {{-0.2886751345948129, 0.9574271077563381},
                    {-0.2886751345948129, -0.9574271077563381}},
                   1e-7);
    // frozen from two agreeing routes: the closed form and the characteristic
    // polynomial of the analytic Jacobian (their sum also matches the trace)
    check_eig_pair(eigenvalues_circle(0.95, 1.0),
                   {{-0.3748743345, 0.0}, {-2.6675605878, 0.0}}, 1e-9);

    // degenerate boundary: double root at -1/a
    auto [lp, lm] = eigenvalues_circle(kNCrit, 2.0);
    CHECK(std::abs(lp.real() + 0.5) < 1e-7);
    CHECK(std::abs(lm.real() + 0.5) < 1e-7);
    CHECK(std::abs(lp.imag()) < 1e-7);

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ns(0.02, 0.98), as(0.3, 4.0);
    for (int i = 0; i < 200; ++i) {
        double n = ns(rng);
        if (std::abs(n - kNCrit) < 1e-6) continue;   // sqrt(~0) noise has no meaning there
        const double a = as(rng);
        check_eig_pair(eigenvalues_circle(n, a), eigenvalues(jacobian_circle(n, a)), 1e-10);
        // asymptotic stability: strictly negative real parts
        auto [l1, l2] = eigenvalues_circle(n, a);
        CHECK(l1.real() < 0.0);
        CHECK(l2.real() < 0.0);
    }
}

TEST_CASE("stability classification flips at n = 2/sqrt(5)") {
    CHECK(classify_equilibrium(0.5) == StabilityClass::stable_spiral);
    CHECK(classify_equilibrium(0.9) == StabilityClass::stable_node);
    CHECK(classify_equilibrium(kNCrit) == StabilityClass::degenerate_double_root);
    CHECK(classify_equilibrium(kNCrit - 1e-9) == StabilityClass::stable_spiral);
    CHECK(classify_equilibrium(kNCrit + 1e-9) == StabilityClass::stable_node);
    CHECK_THROWS_AS(classify_equilibrium(1.0), Error);
    CHECK_THROWS_AS(classify_equilibrium(0.0), std::invalid_argument);
}

TEST_CASE("pursuer reconstruction inverts the reduction") {
    const Vec2 p1 = reconstruct_pursuer({1.0, 0.0}, pi / 2.0, {1.0, pi / 2.0, 0.0});
    CHECK(std::abs(p1.x) < 1e-15);
    CHECK(std::abs(p1.y) < 1e-15);

    // zeta = 0: pursuer sits behind the velocity ray
    const Vec2 p2 = reconstruct_pursuer({2.0, 1.0}, 0.7, {0.5, 0.0, 0.0});
    CHECK(p2.x == doctest::Approx(2.0 - 0.5 * std::cos(0.7)).epsilon(1e-15));
    CHECK(p2.y == doctest::Approx(1.0 - 0.5 * std::sin(0.7)).epsilon(1e-15));

    // rho = 0: capture, P = E
    const Vec2 p3 = reconstruct_pursuer({-1.0, 3.0}, 1.2, {0.0, 2.0, 0.0});
    CHECK(p3.x == -1.0);
    CHECK(p3.y == 3.0);
}

TEST_CASE("zeta(Theta) right-hand side") {
    CHECK(zeta_second_order_rhs(pi / 2.0, 0.0, 0.0, 1.0, 0.0, 0.5) ==
          doctest::Approx(-0.5).epsilon(1e-12));
    // every term carries (1 - zeta'), so zeta' = 1 kills the RHS when f' = 0
    CHECK(zeta_second_order_rhs(1.0, 1.0, 0.0, 2.0, 0.0, 0.7) == 0.0);
    // circular equilibrium: f = a constant, zeta = zeta*, slope 0
    const double zstar = std::acos(0.5);
    CHECK(std::abs(zeta_second_order_rhs(zstar, 0.0, 0.0, 1.0, 0.0, 0.5)) < 1e-15);

    CHECK_THROWS_AS(zeta_second_order_rhs(0.0, 0.0, 3.3, 1.0, 0.0, 0.5), SingularityError);
    CHECK_THROWS_AS(zeta_second_order_rhs(pi, 0.0, 0.0, 1.0, 0.0, 0.5), SingularityError);
    CHECK_THROWS_AS(zeta_second_order_rhs(1.0, 0.0, 0.0, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("time factor f and its log-derivative on the ellipse") {
    const auto tf1 = f_and_logderiv_ellipse(pi / 2.0, kShape);
    CHECK(tf1.f == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(tf1.f_prime_over_f) < 1e-14);

    const auto tf2 = f_and_logderiv_ellipse(pi / 4.0, kShape);
    CHECK(tf2.f_prime_over_f == doctest::Approx(-1.8).epsilon(1e-13));

    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ps(-7.0, 7.0);
    for (int i = 0; i < 100; ++i) {
        const double phi = ps(rng);
        CHECK(std::abs(f_and_logderiv_ellipse(phi, {1.2, 1.2}).f_prime_over_f) < 1e-14);
        // f is 1/phi_dot by definition
        CHECK(f_and_logderiv_ellipse(phi, kShape).f ==
              doctest::Approx(1.0 / phi_dot(phi, kShape)).epsilon(1e-13));
        // and the log-derivative matches a finite difference of log f
        const double h = 1e-6;
        const double dlog = (std::log(f_and_logderiv_ellipse(phi + h, kShape).f) -
                             std::log(f_and_logderiv_ellipse(phi - h, kShape).f)) /
                            (2 * h);
        CHECK(f_and_logderiv_ellipse(phi, kShape).f_prime_over_f ==
              doctest::Approx(dlog).epsilon(5e-5));
    }
}

TEST_CASE("circular driver relaxes to the equilibrium") {
    const auto res = integrate_dds_circle(0.5, 1.0, 1.0, pi / 2.0, 0.0, 10.0 * pi);
    CHECK_FALSE(res.event.has_value());
    const auto yf = res.trajectory.state(res.trajectory.size() - 1);
    CHECK(std::abs(yf[0] - 0.8660254037844386) < 1e-3);
    CHECK(std::abs(yf[1] - 1.0471975511965976) < 1e-3);
}

TEST_CASE("reduced-system capture ends the run through the event mechanism") {
    // n > 1: rho' = cos(zeta) - n < 0 always, so rho hits the capture radius
    const auto res = integrate_dds_circle(1.5, 1.0, 0.4, 0.0, 0.0, 10.0);
    REQUIRE(res.event.has_value());
    CHECK(res.trajectory.state(res.trajectory.size() - 1)[0] ==
          doctest::Approx(defaults::capture_eps).epsilon(1e-3));
    CHECK(res.event->t < 10.0);
}

TEST_CASE("zeta slope seed matches the first-order relation") {
    // zeta'(Theta0) = 1 - f sin(zeta0)/rho0; reference configuration gives 0.75
    CHECK(zeta_initial_slope(1.0, pi / 2.0, pi / 2.0, kShape) ==
          doctest::Approx(0.75).epsilon(1e-14));
    CHECK_THROWS_AS(zeta_initial_slope(0.0, 1.0, 0.0, kShape), SingularityError);
}
