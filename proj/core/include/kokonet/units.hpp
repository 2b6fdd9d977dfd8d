#pragma once

#include <cmath>
#include <numbers>

namespace kokonet {

inline constexpr double pi = std::numbers::pi;

constexpr double deg(double degrees) noexcept { return degrees * pi / 180.0; }
constexpr double to_deg(double radians) noexcept { return radians * 180.0 / pi; }

// Maps x into (-pi, pi].
inline double wrap_angle(double x) noexcept {
  double y = std::remainder(x, 2.0 * pi);
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

inline double angle_distance(double a, double b) noexcept {
  return std::abs(wrap_angle(a - b));
}

// Angle theta with cot(theta/2) = num/den, in (-pi, pi].
inline double angle_from_cot_half(double num, double den) noexcept {
  return wrap_angle(2.0 * std::atan2(den, num));
}

inline double cot_half(double theta) noexcept {
  return 1.0 / std::tan(0.5 * theta);
}

}  // namespace kokonet
