#pragma once

#include <vector>

#include "kokonet/angles.hpp"

namespace kokonet {

struct QsSeed {
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double gamma1 = 0.0;
};

// Open interval; bounds may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double t) const { return t > lo && t < hi; }
  bool bounded() const;
};

// Quasi-symmetric net with delta1 = pi/2. Throws NotElliptic or InvalidSeed.
NetAngles build_qs_net(const QsSeed& seed);

// Closed-form one-parameter flexion of a QS net, parameterised by t = cot(theta2/2).
struct QsFlexion {
  QsSeed seed;
  NetAngles net;
  int branch = 1;
  std::vector<Interval> validIntervals;

  double sinBeta = 0.0;
  // Denominators: den13(t) = den13[0] + den13[1] t^2 for theta1 and theta3,
  // den4(t) = den4[0] + den4[1] t^2 for theta4.
  std::array<double, 2> den13{};
  std::array<double, 2> den4{};
  // D(t) = first(t) * second(t), first = f[0] + f[1] t^2, second = den4.
  std::array<double, 2> first{};

  double s2 = 0.0;
  double M = 0.0;
  double oneMinusS2 = 0.0;  // kept separately, s2 and M may sit next to 1
  double oneMinusM = 0.0;
  double barSineProduct = 0.0;

  double discriminant(double t) const;
  // Same quantity through the factorised form P (1 - s2 + t^2)((1 - M)/(1 - s2) t^2 + 1).
  double discriminant_factored(double t) const;
  bool in_domain(double t) const;
};

QsFlexion qs_flexion(const QsSeed& seed, int branch);

// Throws OutOfRange if t is not interior to a valid interval, NegativeDiscriminant if D(t) < 0.
DihedralState eval_flexion(const QsFlexion& fl, double t);

// n points strictly inside the interval; unbounded sides use t = tan(phi).
std::vector<double> sample_interval(const Interval& iv, int n);

}  // namespace kokonet
