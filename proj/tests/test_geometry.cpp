#include <doctest.h>

#include <random>

#include "kokonet/error.hpp"
#include "kokonet/geometry.hpp"
#include "kokonet/kinematics.hpp"
#include "kokonet/qsnet.hpp"
#include "kokonet/search.hpp"
#include "oracles.hpp"
#include "reference.hpp"

using namespace kokonet;

namespace {

void check_measure_back(const EmbeddedNet& e, const NetAngles& net, const DihedralState& s, double tol) {
  const auto th = oracle::dihedrals_direct(e);
  for (int i = 0; i < 4; ++i) CHECK(angle_distance(th[static_cast<std::size_t>(i)], s[i]) <= tol);
  for (int v = 0; v < 4; ++v) {
    const auto g = oracle::flat_direct(e, v);
    CHECK(std::abs(g.alpha - net[v].alpha) <= tol);
    CHECK(std::abs(g.beta - net[v].beta) <= tol);
    CHECK(std::abs(g.gamma - net[v].gamma) <= tol);
    CHECK(std::abs(g.delta - net[v].delta) <= tol);
  }
  const auto m = measure_dihedrals(e);
  for (int i = 0; i < 4; ++i) CHECK(angle_distance(m[i], s[i]) <= tol);
}

FlexionBundle rational_bundle(int sign, int n, const EdgeLengths& L) {
  FlexionBundle b;
  b.net = ref::rational_modulus_net();
  b.lengths = L;
  b.branch = sign;
  const double lo = ref::rational_t_min(), hi = ref::rational_t_max();
  for (int i = 1; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / (n + 1.0);
    const DihedralState s = ref::rational_modulus_flexion(t, sign);
    b.samples.push_back({t, s, embed(b.net, s, L)});
  }
  return b;
}

}  // namespace

TEST_CASE("central quad: square, measured angles, near-degenerate") {
  const auto sq = build_central_quad({pi / 2, pi / 2, pi / 2, pi / 2});
  CHECK((sq[1] - Vec3(0, 0, 0)).norm() < 1e-15);
  CHECK((sq[0] - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((sq[2] - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((sq[3] - Vec3(1, 1, 0)).norm() < 1e-14);

  for (const std::array<double, 4>& dd : {std::array<double, 4>{120, 80, 85, 75}, std::array<double, 4>{170, 170, 10, 10},
                                          std::array<double, 4>{60, 115, 80, 105}}) {
    const std::array<double, 4> d{deg(dd[0]), deg(dd[1]), deg(dd[2]), deg(dd[3])};
    const auto A = build_central_quad(d);
    for (int i = 0; i < 4; ++i) {
      const auto& p = A[static_cast<std::size_t>(i)];
      CHECK(std::abs(p.z()) < 1e-15);
      CHECK(p.y() >= -1e-15);
      const double ang = oracle::corner(p, A[static_cast<std::size_t>((i + 1) % 4)], A[static_cast<std::size_t>((i + 3) % 4)]);
      CHECK(std::abs(ang - d[static_cast<std::size_t>(i)]) < 1e-12);
    }
  }
  CHECK_THROWS_AS(build_central_quad({deg(100), deg(100), deg(100), deg(100)}), Error);
  try {
    build_central_quad({deg(170), deg(170), deg(5), deg(15)}, 1.0, 0.01);
    FAIL("expected DegenerateQuad");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateQuad);
  }
}

TEST_CASE("embed: measure-back against closed forms") {
  const NetAngles n105 = ref::qs105_net();
  for (double t : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    const DihedralState s = ref::qs105_flexion(t, 1);
    check_measure_back(embed(n105, s), n105, s, 1e-10);
  }
  const NetAngles n15 = ref::qs15_net();
  const EdgeLengths L15 = convex_wing_lengths(n15);
  for (double t : {0.1, 0.5}) {
    const DihedralState s = ref::qs15_flexion(t, 1);
    check_measure_back(embed(n15, s, L15), n15, s, 1e-10);
  }
  check_measure_back(embed(n15, ref::isolated_qs_state(), L15), n15, ref::isolated_qs_state(), 1e-10);
  const NetAngles rat = ref::rational_modulus_net();
  for (int sign : {-1, 1}) {
    const DihedralState s = ref::rational_modulus_flexion(0.7, sign);
    check_measure_back(embed(rat, s), rat, s, 1e-10);
  }
}

TEST_CASE("embed: reference nets have positive orientation determinant") {
  const NetAngles n = ref::qs105_net();
  const DihedralState s = ref::qs105_flexion(1.0, 1);
  for (int i = 0; i < 4; ++i) REQUIRE(s[i] > 0.0);
  const auto th = oracle::dihedrals_direct(embed(n, s));
  for (double v : th) {
    CHECK(v > 0.0);
    CHECK(v < pi);
  }
}

TEST_CASE("embed: quad faces planar and convex, wing lengths honoured") {
  const NetAngles n = ref::qs105_net();
  EdgeLengths L;
  L.ab = {0.7, 0.8, 0.9, 0.6};
  L.ac = {0.5, 0.4, 0.3, 0.6};
  const EmbeddedNet e = embed(n, ref::qs105_flexion(0.3, -1), L);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs((e.B(i) - e.A(i)).norm() - L.ab[static_cast<std::size_t>(i)]) < 1e-14);
    CHECK(std::abs((e.C(i) - e.A(i)).norm() - L.ac[static_cast<std::size_t>(i)]) < 1e-14);
  }
  CHECK(std::abs((e.A(0) - e.A(1)).norm() - 1.0) < 1e-14);
  CHECK(std::abs((e.A(2) - e.A(1)).norm() - 1.0) < 1e-14);
  for (const auto& f : e.faces) {
    if (f.size() != 4) continue;
    const Vec3 nrm = (e.vertices[static_cast<std::size_t>(f[1])] - e.vertices[static_cast<std::size_t>(f[0])])
                         .cross(e.vertices[static_cast<std::size_t>(f[3])] - e.vertices[static_cast<std::size_t>(f[0])])
                         .normalized();
    const double dist = std::abs(nrm.dot(e.vertices[static_cast<std::size_t>(f[2])] - e.vertices[static_cast<std::size_t>(f[0])]));
    CHECK(dist / e.diameter() <= 1e-9);
    // convex: consecutive edge cross products point the same way
    double sgn = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec3& p = e.vertices[static_cast<std::size_t>(f[k])];
      const Vec3& q = e.vertices[static_cast<std::size_t>(f[(k + 1) % 4])];
      const Vec3& r = e.vertices[static_cast<std::size_t>(f[(k + 2) % 4])];
      const double c = (q - p).cross(r - q).dot(nrm);
      if (k == 0) sgn = c;
      CHECK(c * sgn > 0.0);
    }
  }
}

TEST_CASE("embed rejects a non-closing state") {
  DihedralState s = ref::qs105_flexion(0.5, 1);
  s[1] += 0.05;
  try {
    embed(ref::qs105_net(), s);
    FAIL("expected EmbedInconsistent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmbedInconsistent);
  }
}

TEST_CASE("convex wing lengths never exceed the request") {
  const NetAngles n = ref::qs15_net();
  const EdgeLengths L = convex_wing_lengths(n);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(L.ab[i] <= 1.0);
    CHECK(L.ac[i] <= 1.0);
    CHECK(L.ab[i] > 0.0);
  }
  CHECK_THROWS_AS(embed(n, ref::qs15_flexion(0.5, 1)), Error);
  CHECK_NOTHROW(embed(n, ref::qs15_flexion(0.5, 1), L));
  CHECK(convex_wing_lengths(ref::qs105_net()) == EdgeLengths{});
}

TEST_CASE("triangle intersection primitives") {
  const Triangle a{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK(triangles_intersect(a, {{0.2, 0.2, -1}, {0.2, 0.2, 1}, {0.3, 0.4, 1}}, 1e-9));
  CHECK_FALSE(triangles_intersect(a, {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}}, 1e-9));
  // coplanar, disjoint
  CHECK_FALSE(triangles_intersect(a, {{2, 2, 0}, {3, 2, 0}, {2, 3, 0}}, 1e-9));
  // coplanar, overlapping
  CHECK(triangles_intersect(a, {{0.1, 0.1, 0}, {2, 0.1, 0}, {0.1, 2, 0}}, 1e-9));
  // touching along a point within tolerance does not count
  CHECK_FALSE(triangles_intersect(a, {{1, 0, 0}, {2, 0, 1}, {2, 0, -1}}, 1e-9));
}

TEST_CASE("rational-modulus net: upper branch clean, lower branch self-intersects") {
  const BundleCheck up = check_bundle(rational_bundle(-1, 50, EdgeLengths{}));
  CHECK(up.consistent);
  int hits = 0;
  for (bool b : up.selfIntersecting) hits += b ? 1 : 0;
  CHECK(hits == 0);
  const BundleCheck lo = check_bundle(rational_bundle(1, 50, EdgeLengths{}));
  CHECK(lo.consistent);
  hits = 0;
  for (bool b : lo.selfIntersecting) hits += b ? 1 : 0;
  CHECK(hits >= 1);
}

TEST_CASE("bundle congruence: faces keep their shape along the flexion") {
  const FlexionBundle b = rational_bundle(-1, 20, EdgeLengths{});
  const BundleCheck c = check_bundle(b);
  CHECK(c.maxCongruenceError <= 1e-9);
  CHECK(c.maxFlatAngleError <= 1e-9);
  CHECK(c.maxDihedralError <= 1e-9);
  // a tampered sample is caught
  FlexionBundle bad = b;
  bad.samples[3].embedded.vertices[5] += Vec3(0, 0, 1e-4);
  CHECK_FALSE(check_bundle(bad).consistent);
}

TEST_CASE("numerical nets at the tabulated state are free of self-intersection") {
  for (const auto& pub : {ref::numerical_net_a(), ref::numerical_net_b()}) {
    SearchConfig cfg;
    for (std::size_t i = 0; i < 4; ++i) {
      cfg.deltas[i] = deg(pub.deltasDeg[i]);
      cfg.thetas[i] = deg(pub.thetasDeg[i]);
    }
    const auto s = snap_to_family(pub.net, cfg);
    REQUIRE(s.has_value());
    const DihedralState st = ref::tabulated_state(pub);
    const EmbeddedNet e = embed(s->net, st, convex_wing_lengths(s->net));
    CHECK_FALSE(self_intersects(e));
    check_measure_back(e, s->net, st, 1e-9);
  }
}
