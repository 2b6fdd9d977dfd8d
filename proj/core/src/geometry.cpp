#include "kokonet/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

// Neighbours along the alpha edge and the gamma edge of each central vertex.
constexpr std::array<int, 4> kAlphaNbr{1, 0, 3, 2};
constexpr std::array<int, 4> kGammaNbr{3, 2, 1, 0};

int xi_of(int v) { return v < 2 ? 0 : 2; }
int eta_of(int v) { return (v == 0 || v == 3) ? 3 : 1; }

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

struct Worst {
  double value = 0.0;
  std::string what;
  void note(double v, const std::string& w) {
    if (!(v <= value)) {
      value = v;
      what = w;
    }
  }
};

// Distance of a quad's fourth vertex from the plane of the first three, and convexity.
void check_quad(const EmbeddedNet& e, const std::vector<int>& f, double diam, Worst& planar,
                bool& convex) {
  const Vec3& p0 = e.vertices[static_cast<std::size_t>(f[0])];
  const Vec3& p1 = e.vertices[static_cast<std::size_t>(f[1])];
  const Vec3& p2 = e.vertices[static_cast<std::size_t>(f[2])];
  const Vec3& p3 = e.vertices[static_cast<std::size_t>(f[3])];
  Vec3 n = (p1 - p0).cross(p2 - p0) + (p2 - p0).cross(p3 - p0);
  n.normalize();
  double dev = 0.0;
  for (const Vec3* p : {&p0, &p1, &p2, &p3}) dev = std::max(dev, std::abs(n.dot(*p - p0)));
  std::ostringstream os;
  os << "face [" << f[0] << "," << f[1] << "," << f[2] << "," << f[3] << "] planarity";
  planar.note(dev / diam, os.str());
  const std::array<const Vec3*, 4> q{&p0, &p1, &p2, &p3};
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec3 a = *q[(k + 1) % 4] - *q[k];
    const Vec3 b = *q[(k + 2) % 4] - *q[(k + 1) % 4];
    if (!(n.dot(a.cross(b)) > 0.0)) convex = false;
  }
}

}  // namespace

std::array<Vec3, 4> build_central_quad(const std::array<double, 4>& d, double a1a2, double a2a3) {
  double sum = 0.0;
  for (double x : d) {
    if (!(x > 0.0 && x < pi)) throw Error(ErrorCode::Domain, "central angles must lie in (0, 180) deg");
    sum += x;
  }
  if (std::abs(sum - 2 * pi) > 1e-9) throw Error(ErrorCode::Domain, "central angles must sum to 360 deg");
  if (!(a1a2 > 0.0 && a2a3 > 0.0)) throw Error(ErrorCode::Domain, "central side lengths must be positive");
  std::array<Vec3, 4> A;
  A[1] = Vec3::Zero();
  A[0] = Vec3(a1a2, 0, 0);
  A[2] = a2a3 * Vec3(std::cos(d[1]), std::sin(d[1]), 0);
  // A4 = A3 + lambda u = A1 + mu w
  const double ang = d[1] + pi + d[2];
  const Eigen::Vector2d u(std::cos(ang), std::sin(ang));
  const Eigen::Vector2d w(-std::cos(d[0]), std::sin(d[0]));
  Eigen::Matrix2d m;
  m << u, -w;
  const Eigen::Vector2d rhs = A[0].head<2>() - A[2].head<2>();
  const double det = m.determinant();
  if (std::abs(det) < 1e-14) throw Error(ErrorCode::DegenerateQuad, "sides A3A4 and A1A4 are parallel");
  const Eigen::Vector2d sol = m.inverse() * rhs;
  if (!(sol[0] > 0.0 && sol[1] > 0.0)) {
    std::ostringstream os;
    os << "no positive-length solution (|A3A4| = " << sol[0] << ", |A1A4| = " << sol[1] << ")";
    throw Error(ErrorCode::DegenerateQuad, os.str());
  }
  A[3] = A[2] + sol[0] * Vec3(u[0], u[1], 0);
  return A;
}

const std::vector<std::vector<int>>& net_faces() {
  static const std::vector<std::vector<int>> faces{
      {0, 1, 2, 3},                                             // central
      {4, 0, 1, 5}, {9, 1, 2, 10}, {6, 2, 3, 7}, {11, 3, 0, 8},  // sides on theta1..theta4
      {4, 0, 8}, {5, 1, 9}, {6, 2, 10}, {7, 3, 11}};            // corners B_i A_i C_i
  return faces;
}

double EmbeddedNet::diameter() const {
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

EdgeLengths convex_wing_lengths(const NetAngles& net, const EdgeLengths& req) {
  const std::array<Vec3, 4> A = build_central_quad(
      {net[0].delta, net[1].delta, net[2].delta, net[3].delta}, req.a1a2, req.a2a3);
  EdgeLengths out = req;
  // Side quads: (i, j, angle at i, angle at j, wing array).
  auto fit = [&](int i, int j, double ai, double aj, std::array<double, 4>& L) {
    if (ai + aj >= pi) return;
    const double base = (A[static_cast<std::size_t>(i)] - A[static_cast<std::size_t>(j)]).norm();
    const double s = std::sin(ai + aj);
    const double di = base * std::sin(aj) / s, dj = base * std::sin(ai) / s;
    L[static_cast<std::size_t>(i)] = std::min(L[static_cast<std::size_t>(i)], 0.5 * di);
    L[static_cast<std::size_t>(j)] = std::min(L[static_cast<std::size_t>(j)], 0.5 * dj);
  };
  fit(0, 1, net[0].alpha, net[1].alpha, out.ab);
  fit(2, 3, net[2].alpha, net[3].alpha, out.ab);
  fit(1, 2, net[1].gamma, net[2].gamma, out.ac);
  fit(3, 0, net[3].gamma, net[0].gamma, out.ac);
  return out;
}

EmbeddedNet embed(const NetAngles& net, const DihedralState& state, const EdgeLengths& lengths) {
  for (double L : lengths.ab) if (!(L > 0)) throw Error(ErrorCode::Domain, "wing lengths must be positive");
  for (double L : lengths.ac) if (!(L > 0)) throw Error(ErrorCode::Domain, "wing lengths must be positive");
  EmbeddedNet e;
  e.lengths = lengths;
  e.faces = net_faces();
  const std::array<Vec3, 4> A = build_central_quad(
      {net[0].delta, net[1].delta, net[2].delta, net[3].delta}, lengths.a1a2, lengths.a2a3);
  for (int v = 0; v < 4; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    e.vertices[vi] = A[vi];
  }
  for (int v = 0; v < 4; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    const VertexGermAngles& g = net[v];
    // Local frame: x toward the alpha neighbour, y in-plane toward the gamma side, z up.
    const Vec3 x = (A[static_cast<std::size_t>(kAlphaNbr[vi])] - A[vi]).normalized();
    const Vec3 toG = A[static_cast<std::size_t>(kGammaNbr[vi])] - A[vi];
    const Vec3 y = (toG - toG.dot(x) * x).normalized();
    const Vec3 z = Vec3::UnitZ();
    const double xi = state[xi_of(v)], eta = state[eta_of(v)];
    const Vec3 e1 = std::cos(g.alpha) * x + std::sin(g.alpha) * (std::cos(xi) * y + std::sin(xi) * z);
    const Vec3 gd = std::cos(g.delta) * x + std::sin(g.delta) * y;
    const Vec3 gp = std::sin(g.delta) * x - std::cos(g.delta) * y;
    const Vec3 e2 = std::cos(g.gamma) * gd + std::sin(g.gamma) * (std::cos(eta) * gp + std::sin(eta) * z);
    e.vertices[4 + vi] = A[vi] + lengths.ab[vi] * e1;
    e.vertices[8 + vi] = A[vi] + lengths.ac[vi] * e2;
  }

  Worst worst;
  const NetAngles flat = measure_flat_angles(e);
  static const char* names[4] = {"alpha", "beta", "gamma", "delta"};
  for (int v = 0; v < 4; ++v) {
    const std::array<double, 4> got{flat[v].alpha, flat[v].beta, flat[v].gamma, flat[v].delta};
    const std::array<double, 4> want{net[v].alpha, net[v].beta, net[v].gamma, net[v].delta};
    for (std::size_t k = 0; k < 4; ++k) {
      worst.note(std::abs(got[k] - want[k]), std::string(names[k]) + " at A" + std::to_string(v + 1));
    }
  }
  const DihedralState th = measure_dihedrals(e);
  for (int i = 0; i < 4; ++i) {
    worst.note(angle_distance(th[i], state[i]), "theta" + std::to_string(i + 1));
  }
  const double diam = e.diameter();
  bool convex = true;
  for (std::size_t f = 0; f < 5; ++f) check_quad(e, e.faces[f], diam, worst, convex);
  if (worst.value > kEmbedTol) {
    std::ostringstream os;
    os << "worst offender " << worst.what << " off by " << worst.value;
    throw Error(ErrorCode::EmbedInconsistent, os.str());
  }
  if (!convex) {
    throw Error(ErrorCode::EmbedInconsistent, "a quad face is not convex with these edge lengths");
  }
  return e;
}

DihedralState measure_dihedrals(const EmbeddedNet& e) {
  const Vec3 n0 = (e.A(0) - e.A(1)).cross(e.A(2) - e.A(1));
  const std::array<Vec3, 4> n{(e.B(1) - e.A(1)).cross(e.A(0) - e.A(1)),
                              (e.A(2) - e.A(1)).cross(e.C(1) - e.A(1)),
                              (e.A(3) - e.A(2)).cross(e.B(2) - e.A(2)),
                              (e.C(0) - e.A(0)).cross(e.A(3) - e.A(0))};
  DihedralState s;
  for (int i = 0; i < 4; ++i) {
    const Vec3& ni = n[static_cast<std::size_t>(i)];
    const Vec3 edge = e.A(i) - e.A((i + 1) % 4);
    Eigen::Matrix3d m;
    m << ni, n0, edge;
    const double ang = pi - angle_between(n0, ni);
    s[i] = m.determinant() > 0.0 ? ang : wrap_angle(-ang);
  }
  return s;
}

NetAngles measure_flat_angles(const EmbeddedNet& e) {
  NetAngles out;
  for (int v = 0; v < 4; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    const Vec3 a = e.A(v);
    const Vec3 toA = e.A(kAlphaNbr[vi]) - a, toG = e.A(kGammaNbr[vi]) - a;
    const Vec3 b = e.B(v) - a, c = e.C(v) - a;
    out[v] = {angle_between(b, toA), angle_between(b, c), angle_between(c, toG), angle_between(toA, toG)};
  }
  return out;
}

namespace {

// Interval of the line parameter where a triangle meets the other plane.
bool plane_interval(const std::array<Vec3, 3>& p, const std::array<double, 3>& d, const Vec3& dir,
                    double eps, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  bool any = false;
  for (std::size_t k = 0; k < 3; ++k) {
    if (std::abs(d[k]) <= eps) {
      const double s = dir.dot(p[k]);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      any = true;
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t j = (k + 1) % 3;
    if (std::abs(d[k]) > eps && std::abs(d[j]) > eps && (d[k] > 0) != (d[j] > 0)) {
      const Vec3 x = p[k] + (p[j] - p[k]) * (d[k] / (d[k] - d[j]));
      const double s = dir.dot(x);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      any = true;
    }
  }
  return any;
}

using P2 = Eigen::Vector2d;

double cross2(const P2& a, const P2& b) { return a[0] * b[1] - a[1] * b[0]; }

bool segments_cross(const P2& a, const P2& b, const P2& c, const P2& d, double eps) {
  const double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
  const double la = (b - a).norm(), lc = (d - c).norm();
  return ((d1 > eps * la && d2 < -eps * la) || (d1 < -eps * la && d2 > eps * la)) &&
         ((d3 > eps * lc && d4 < -eps * lc) || (d3 < -eps * lc && d4 > eps * lc));
}

bool strictly_inside(const P2& q, const std::array<P2, 3>& t, double eps) {
  const double area = cross2(t[1] - t[0], t[2] - t[0]);
  const double sgn = area > 0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const P2& a = t[k];
    const P2& b = t[(k + 1) % 3];
    if (!(sgn * cross2(b - a, q - a) > eps * (b - a).norm())) return false;
  }
  return true;
}

bool coplanar_intersect(const Triangle& a, const Triangle& b, const Vec3& n, double eps) {
  int drop = 0;
  n.cwiseAbs().maxCoeff(&drop);
  auto proj = [drop](const Vec3& p) {
    P2 q;
    int k = 0;
    for (int c = 0; c < 3; ++c)
      if (c != drop) q[k++] = p[c];
    return q;
  };
  const std::array<P2, 3> ta{proj(a.p0), proj(a.p1), proj(a.p2)};
  const std::array<P2, 3> tb{proj(b.p0), proj(b.p1), proj(b.p2)};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (segments_cross(ta[i], ta[(i + 1) % 3], tb[j], tb[(j + 1) % 3], eps)) return true;
  for (const auto& q : ta) if (strictly_inside(q, tb, eps)) return true;
  for (const auto& q : tb) if (strictly_inside(q, ta, eps)) return true;
  return false;
}

}  // namespace

bool triangles_intersect(const Triangle& a, const Triangle& b, double eps) {
  const std::array<Vec3, 3> pa{a.p0, a.p1, a.p2}, pb{b.p0, b.p1, b.p2};
  Vec3 na = (a.p1 - a.p0).cross(a.p2 - a.p0);
  Vec3 nb = (b.p1 - b.p0).cross(b.p2 - b.p0);
  if (na.norm() == 0.0 || nb.norm() == 0.0) return false;
  na.normalize();
  nb.normalize();
  std::array<double, 3> db{}, da{};
  for (std::size_t k = 0; k < 3; ++k) {
    db[k] = na.dot(pb[k] - a.p0);
    da[k] = nb.dot(pa[k] - b.p0);
  }
  auto one_side = [eps](const std::array<double, 3>& d) {
    return (d[0] > eps && d[1] > eps && d[2] > eps) || (d[0] < -eps && d[1] < -eps && d[2] < -eps);
  };
  if (one_side(db) || one_side(da)) return false;
  const bool coplanar = std::all_of(db.begin(), db.end(), [eps](double x) { return std::abs(x) <= eps; });
  const Vec3 dir = na.cross(nb);
  if (coplanar || dir.norm() < 1e-12) return coplanar && coplanar_intersect(a, b, na, eps);
  const Vec3 u = dir.normalized();
  double loA, hiA, loB, hiB;
  if (!plane_interval(pa, da, u, eps, loA, hiA) || !plane_interval(pb, db, u, eps, loB, hiB)) return false;
  return std::min(hiA, hiB) - std::max(loA, loB) > eps;
}

bool self_intersects(const EmbeddedNet& e) {
  struct Tri {
    std::array<int, 3> idx;
    int face;
  };
  std::vector<Tri> tris;
  for (std::size_t f = 0; f < e.faces.size(); ++f) {
    const auto& face = e.faces[f];
    for (std::size_t k = 1; k + 1 < face.size(); ++k) {
      tris.push_back({{face[0], face[k], face[k + 1]}, static_cast<int>(f)});
    }
  }
  const double eps = 1e-9 * e.diameter();
  auto pt = [&](int i) { return e.vertices[static_cast<std::size_t>(i)]; };
  for (std::size_t i = 0; i < tris.size(); ++i) {
    for (std::size_t j = i + 1; j < tris.size(); ++j) {
      if (tris[i].face == tris[j].face) continue;
      bool shares = false;
      for (int a : tris[i].idx)
        for (int b : tris[j].idx) shares = shares || a == b;
      if (shares) continue;
      const Triangle ta{pt(tris[i].idx[0]), pt(tris[i].idx[1]), pt(tris[i].idx[2])};
      const Triangle tb{pt(tris[j].idx[0]), pt(tris[j].idx[1]), pt(tris[j].idx[2])};
      if (triangles_intersect(ta, tb, eps)) return true;
    }
  }
  return false;
}

namespace {

// Edge lengths followed by interior angles of every face.
std::vector<double> face_shape(const EmbeddedNet& e) {
  std::vector<double> out;
  for (const auto& f : e.faces) {
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3& p = e.vertices[static_cast<std::size_t>(f[k])];
      const Vec3& q = e.vertices[static_cast<std::size_t>(f[(k + 1) % n])];
      const Vec3& r = e.vertices[static_cast<std::size_t>(f[(k + n - 1) % n])];
      out.push_back((q - p).norm());
      out.push_back(angle_between(q - p, r - p));
    }
  }
  return out;
}

}  // namespace

BundleCheck check_bundle(const FlexionBundle& b) {
  BundleCheck out;
  std::vector<double> ref;
  for (const auto& s : b.samples) {
    const NetAngles flat = measure_flat_angles(s.embedded);
    for (int v = 0; v < 4; ++v) {
      out.maxFlatAngleError = std::max({out.maxFlatAngleError, std::abs(flat[v].alpha - b.net[v].alpha),
                                        std::abs(flat[v].beta - b.net[v].beta),
                                        std::abs(flat[v].gamma - b.net[v].gamma),
                                        std::abs(flat[v].delta - b.net[v].delta)});
    }
    const DihedralState th = measure_dihedrals(s.embedded);
    for (int i = 0; i < 4; ++i) {
      out.maxDihedralError = std::max(out.maxDihedralError, angle_distance(th[i], s.theta[i]));
    }
    const std::vector<double> shape = face_shape(s.embedded);
    if (ref.empty()) ref = shape;
    for (std::size_t k = 0; k < shape.size() && k < ref.size(); ++k) {
      out.maxCongruenceError = std::max(out.maxCongruenceError, std::abs(shape[k] - ref[k]));
    }
    out.selfIntersecting.push_back(self_intersects(s.embedded));
  }
  out.consistent = out.maxFlatAngleError <= kEmbedTol && out.maxDihedralError <= kEmbedTol &&
                   out.maxCongruenceError <= kEmbedTol;
  return out;
}

}  // namespace kokonet
