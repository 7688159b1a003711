#pragma once
#include <cmath>
#include <numbers>

namespace plab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double x) {
    double r = std::fmod(x + pi, two_pi);
    if (r <= 0.0) r += two_pi;
    return r - pi;
}

/// Shift `angle` by a multiple of 2*pi so it lands as close to `ref` as possible.
inline double unwrap_near(double angle, double ref) {
    return angle + two_pi * std::round((ref - angle) / two_pi);
}

} // namespace plab
