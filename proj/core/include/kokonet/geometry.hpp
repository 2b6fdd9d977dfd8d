#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "kokonet/angles.hpp"

namespace kokonet {

using Vec3 = Eigen::Vector3d;

// Free lengths of a realization. The last two central sides follow from the deltas.
struct EdgeLengths {
  double a1a2 = 1.0;
  double a2a3 = 1.0;
  std::array<double, 4> ab{1.0, 1.0, 1.0, 1.0};  // |A_i B_i|
  std::array<double, 4> ac{1.0, 1.0, 1.0, 1.0};  // |A_i C_i|

  bool operator==(const EdgeLengths&) const = default;
};

// Central quad A1..A4 in the z = 0 plane: A2 at the origin, A1 on +x, A3 with y > 0.
// Throws Domain on bad deltas and DegenerateQuad when a remaining side is not positive.
std::array<Vec3, 4> build_central_quad(const std::array<double, 4>& deltas, double a1a2 = 1.0,
                                       double a2a3 = 1.0);

// Vertex order A1..A4, B1..B4, C1..C4.
inline constexpr std::array<const char*, 12> kVertexLabels{"A1", "A2", "A3", "A4", "B1", "B2",
                                                           "B3", "B4", "C1", "C2", "C3", "C4"};

// Central quad, four side quads, four corner triangles.
const std::vector<std::vector<int>>& net_faces();

struct EmbeddedNet {
  std::array<Vec3, 12> vertices{};
  std::vector<std::vector<int>> faces;
  EdgeLengths lengths;

  const Vec3& A(int i) const { return vertices[static_cast<std::size_t>(i)]; }
  const Vec3& B(int i) const { return vertices[static_cast<std::size_t>(4 + i)]; }
  const Vec3& C(int i) const { return vertices[static_cast<std::size_t>(8 + i)]; }
  double diameter() const;
};

inline constexpr double kEmbedTol = 1e-9;

// Throws EmbedInconsistent naming the worst check if the result does not reproduce
// the flat and dihedral angles, or if a quad is not planar and convex.
EmbeddedNet embed(const NetAngles& net, const DihedralState& state, const EdgeLengths& lengths = {});

// Wing lengths no longer than requested, shortened where two wing edges of a side quad
// would otherwise meet, so every side quad stays convex.
EdgeLengths convex_wing_lengths(const NetAngles& net, const EdgeLengths& requested = {});

DihedralState measure_dihedrals(const EmbeddedNet& e);
NetAngles measure_flat_angles(const EmbeddedNet& e);

struct Triangle {
  Vec3 p0, p1, p2;
};

// True if the triangles overlap by more than eps (contact within eps does not count).
bool triangles_intersect(const Triangle& a, const Triangle& b, double eps);

// Fan triangulation of every face; pairs sharing a vertex are skipped.
bool self_intersects(const EmbeddedNet& e);

struct BundleSample {
  double t = 0.0;
  DihedralState theta;
  EmbeddedNet embedded;
};

struct FlexionBundle {
  NetAngles net;
  EdgeLengths lengths;
  int branch = 1;                     // +1 or -1
  std::string provenance = "closed-form";  // closed-form | traced | search
  std::vector<BundleSample> samples;
};

struct BundleCheck {
  double maxFlatAngleError = 0.0;
  double maxDihedralError = 0.0;
  double maxCongruenceError = 0.0;
  std::vector<bool> selfIntersecting;
  bool consistent = false;  // all three errors within kEmbedTol
};

BundleCheck check_bundle(const FlexionBundle& b);

}  // namespace kokonet
