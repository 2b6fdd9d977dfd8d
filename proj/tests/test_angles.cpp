#include <doctest.h>

#include <random>

#include "kokonet/angles.hpp"
#include "kokonet/error.hpp"
#include "oracles.hpp"
#include "reference.hpp"

using namespace kokonet;

namespace {

VertexGermAngles random_germ(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.05, pi - 0.05);
  for (;;) {
    const VertexGermAngles g{U(rng), U(rng), U(rng), U(rng)};
    if (!is_elliptic(g, 1e-3)) continue;
    const auto d = oracle::derive_direct(g);
    if (std::min({std::abs(std::sin(d.aBar)), std::abs(std::sin(d.bBar)), std::abs(std::sin(d.gBar)),
                  std::abs(std::sin(d.dBar))}) < 1e-2)
      continue;
    return g;
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("derive agrees with the defining sine ratios") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const auto g = random_germ(rng);
    const auto q = derive(g);
    const auto o = oracle::derive_direct(g);
    CHECK(rel(q.sigma, o.sigma) < 1e-14);
    CHECK(q.epsilon == o.eps);
    CHECK(rel(q.a, o.a) < 1e-12);
    CHECK(rel(q.d, o.d) < 1e-12);
    CHECK(rel(q.M, o.M) < 1e-12);
    CHECK(rel(q.r, o.r) < 1e-12);
    CHECK(rel(q.s, o.s) < 1e-12);
    CHECK(rel(q.f, o.f) < 1e-12);
    CHECK(rel(q.u, o.u) < 1e-12);
    if (std::abs(o.r - 1) > 1e-3) CHECK(rel(q.x, o.x) < 1e-9);
    if (std::abs(o.s - 1) > 1e-3) CHECK(rel(q.y, o.y) < 1e-9);
    if (std::abs(o.f - 1) > 1e-3) CHECK(rel(q.z, o.z) < 1e-9);
  }
}

TEST_CASE("sine-ratio identities hold on 10^4 random germs") {
  std::mt19937_64 rng(2);
  double worstLib = 0.0, worstDirect = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto g = random_germ(rng);
    for (double r : sine_identity_residuals(g)) worstLib = std::max(worstLib, std::abs(r));
    // Direct check: left sides from the ratios, right sides from the sigma/bar form.
    const auto o = oracle::derive_direct(g);
    const double ss = std::sin(o.sigma);
    const double sa = std::sin(o.aBar), sb = std::sin(o.bBar), sg = std::sin(o.gBar), sd = std::sin(o.dBar);
    const double A = std::sin(o.aBar - g.beta), G = std::sin(o.gBar - g.beta), D = std::sin(o.dBar - g.beta);
    const std::array<std::pair<double, double>, 7> sides{{
        {1 - o.a * o.b, ss * A / (sa * sb)},
        {1 - o.b * o.c, ss * G / (sb * sg)},
        {1 - o.b * o.d, ss * D / (sb * sd)},
        {o.c * o.d - 1, ss * A / (sg * sd)},
        {o.a * o.d - 1, ss * G / (sa * sd)},
        {o.a * o.c - 1, ss * D / (sa * sg)},
        {1 - o.M, ss * A * G * D / (sa * sb * sg * sd)},
    }};
    for (const auto& [l, r] : sides) worstDirect = std::max(worstDirect, rel(l, r));
  }
  CHECK(worstLib <= 1e-12);
  CHECK(worstDirect <= 1e-12);
}

TEST_CASE("ellipticity test") {
  CHECK(is_elliptic({deg(105), deg(15), deg(120), deg(90)}));
  // 90 + 90 - 90 - 90 = 0
  const VertexGermAngles flat{deg(90), deg(90), deg(90), deg(90)};
  CHECK_FALSE(is_elliptic(flat));
  CHECK_FALSE(ellipticity_violation(flat).empty());
  // alpha - beta + gamma - delta = 0
  const VertexGermAngles g{deg(70), deg(30), deg(50), deg(90)};
  CHECK_FALSE(is_elliptic(g));
  CHECK(ellipticity_violation({deg(105), deg(15), deg(120), deg(90)}).empty());
}

TEST_CASE("complement preserves M, r, s, f and ellipticity") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto g = random_germ(rng);
    const auto c = complement(g);
    CHECK(c.alpha == doctest::Approx(pi - g.alpha));
    CHECK(is_elliptic(c) == is_elliptic(g));
    const auto a = derive(g), b = derive(c);
    CHECK(rel(a.M, b.M) < 1e-11);
    CHECK(rel(a.r, b.r) < 1e-11);
    CHECK(rel(a.s, b.s) < 1e-11);
    CHECK(rel(a.f, b.f) < 1e-11);
    CHECK(std::abs(b.sigma - (2 * pi - a.sigma)) < 1e-12);
  }
}

TEST_CASE("admissibility inequalities for positive modulus") {
  std::mt19937_64 rng(4);
  int seen = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto g = random_germ(rng);
    const auto o = oracle::derive_direct(g);
    if (!(o.M > 0)) continue;
    ++seen;
    CHECK(admissible(derive(g)));
    for (double bar : {o.aBar, o.bBar, o.gBar, o.dBar}) {
      CHECK(bar > 0.0);
      CHECK(bar < pi);
    }
    CHECK(o.r > 0);
    CHECK(o.s > 0);
    CHECK(o.f > 0);
    CHECK((o.r - 1) * (o.r - o.M) > 0);
    CHECK((o.s - 1) * (o.s - o.M) > 0);
    CHECK((o.f - 1) * (o.f - o.M) > 0);
    CHECK((o.r - 1) * (o.s - 1) * (o.f - 1) * (1 - o.M) > 0);
  }
  CHECK(seen > 500);
}

TEST_CASE("amplitude classes") {
  const Amplitude real{1.0, false}, imag{1.0, true};
  CHECK(amplitude_class(real, real) == AmplitudeClass::PosReal);
  CHECK(amplitude_class(real, imag) == AmplitudeClass::PosImag);
  CHECK(amplitude_class(imag, real) == AmplitudeClass::PosImag);
  CHECK(amplitude_class(imag, imag) == AmplitudeClass::NegReal);
}

TEST_CASE("rational-modulus net: exact derived quantities") {
  const NetAngles net = ref::rational_modulus_net();
  CHECK(std::abs(net.delta_sum() - 2 * pi) < 1e-14);
  for (int i = 0; i < 4; ++i) {
    const auto q = derive(net[i]);
    const auto s = static_cast<std::size_t>(i);
    CHECK(std::abs(q.r - ref::kRationalR[s]) <= 1e-12);
    CHECK(std::abs(q.s - ref::kRationalS[s]) <= 1e-12);
    CHECK(std::abs(q.f - ref::kRationalF[s]) <= 1e-12);
    CHECK(std::abs(q.M - 0.5) <= 1e-12);
  }
}

TEST_CASE("state_distance wraps") {
  const DihedralState a{{pi - 0.01, 0, 0, 0}}, b{{-pi + 0.01, 0, 0, 0}};
  CHECK(state_distance(a, b) == doctest::Approx(0.02));
}
