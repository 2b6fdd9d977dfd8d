#pragma once

#include <array>
#include <string>

#include "kokonet/elliptic.hpp"

namespace kokonet {

// Flat angles at one interior vertex, radians in (0, pi).
struct VertexGermAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  bool operator==(const VertexGermAngles&) const = default;
};

// Flat angles of the whole 3x3 net. vertices[0] is A1, ..., vertices[3] is A4.
struct NetAngles {
  std::array<VertexGermAngles, 4> vertices{};

  VertexGermAngles& operator[](int i) { return vertices[static_cast<std::size_t>(i)]; }
  const VertexGermAngles& operator[](int i) const { return vertices[static_cast<std::size_t>(i)]; }
  bool operator==(const NetAngles&) const = default;

  double delta_sum() const;
};

// Oriented dihedral angles theta1..theta4 at the central edges, each in (-pi, pi].
// theta[0] is theta1; the vertex-indexed alias theta0 = theta4 is prev_theta(0).
struct DihedralState {
  std::array<double, 4> theta{};

  double& operator[](int i) { return theta[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return theta[static_cast<std::size_t>(i)]; }
  bool operator==(const DihedralState&) const = default;
};

// Largest wrap-aware difference between corresponding angles.
double state_distance(const DihedralState& a, const DihedralState& b);

// Square root of a real number constrained to the positive real or imaginary ray.
struct Amplitude {
  double magnitude = 0.0;
  bool imaginary = false;
};

struct DerivedVertexQuantities {
  double sigma = 0.0;
  double alphaBar = 0.0, betaBar = 0.0, gammaBar = 0.0, deltaBar = 0.0;
  int epsilon = 1;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double M = 0.0, r = 0.0, s = 0.0, f = 0.0;
  double u = 0.0, x = 0.0, y = 0.0, z = 0.0;
  Amplitude p, q;
};

inline constexpr double kEllipticityTol = 1e-9;

// Returns the first signed sum alpha +- beta +- gamma +- delta that vanishes mod 2 pi
// within tol, e.g. "alpha-beta+gamma-delta", or an empty string if none does.
std::string ellipticity_violation(const VertexGermAngles& g, double tol = kEllipticityTol);
bool is_elliptic(const VertexGermAngles& g, double tol = kEllipticityTol);

DerivedVertexQuantities derive(const VertexGermAngles& g);

// Differences between the two sides of the seven sine-ratio identities
// (1-ab, 1-bc, 1-bd, cd-1, ad-1, ac-1, 1-M).
std::array<double, 7> sine_identity_residuals(const VertexGermAngles& g);

VertexGermAngles complement(const VertexGermAngles& g);
NetAngles complement(const NetAngles& net);

// Sign conditions required of a realizable vertex with M > 0.
bool admissible(const DerivedVertexQuantities& q);

AmplitudeClass amplitude_class(const Amplitude& p, const Amplitude& q) noexcept;

}  // namespace kokonet
