#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "whitney/selfint.hpp"

using namespace whitney;
using namespace whitney::test;

namespace {

SelfIntersectConfig test_config() {
  SelfIntersectConfig cfg;
  cfg.threads = 2;
  return cfg;
}

double dist_to(const Vec& a, std::initializer_list<double> b) {
  double s = 0;
  auto it = b.begin();
  for (double c : a) {
    double d = c - *it++;
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("tangent basis fixtures and properties") {
  // at (0,0,r): (1,0,0),(0,1,0) is well oriented
  auto b1 = tangent_basis({0.0, 0.0, 2.0});
  REQUIRE(b1.size() == 2);
  Mat m1(3, 3);
  Vec p1 = {0.0, 0.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    m1.at(i, 0) = p1[i];
    m1.at(i, 1) = b1[0][i];
    m1.at(i, 2) = b1[1][i];
  }
  CHECK(det(m1) > 0);

  // the reference bases (1,0,0),(0,1,0) at the north pole and (1,0,0),(0,-1,0)
  // at the south pole pass the orientation check
  Mat chk(3, 3);
  double cols_p[3][3] = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) chk.at(i, j) = cols_p[j][i];
  CHECK(det(chk) > 0);
  double cols_q[3][3] = {{0, 0, -1}, {1, 0, 0}, {0, -1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) chk.at(i, j) = cols_q[j][i];
  CHECK(det(chk) > 0);

  SplitMix64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Vec p(3);
    for (auto& c : p) c = rng.normal();
    double r = norm(p);
    auto basis = tangent_basis(p);
    for (const auto& v : basis) {
      CHECK(std::abs(dot(v, p)) < 1e-12 * r);
      CHECK(norm(v) == doctest::Approx(1.0));
    }
    CHECK(std::abs(dot(basis[0], basis[1])) < 1e-12);
  }
  CHECK_THROWS(tangent_basis({0.0, 0.0, 0.0}));
}

TEST_CASE("solver finds exactly the polar pair of the fixture") {
  PolynomialMap g = polar_pair_fixture();
  SolverStats stats;
  auto pairs = find_self_intersections(g, 1.0, test_config(), &stats);
  REQUIRE(pairs.size() == 1);
  CHECK(stats.complete);
  const auto& pr = pairs[0];
  // canonical order puts (0,0,-1) first
  CHECK(dist_to(pr.p, {0, 0, -1}) < 1e-8);
  CHECK(dist_to(pr.q, {0, 0, 1}) < 1e-8);
  CHECK(pr.residual < 1e-12);
  CHECK(std::abs(norm(pr.p) - 1.0) < 1e-10);
  CHECK(std::abs(norm(pr.q) - 1.0) < 1e-10);
}

TEST_CASE("linear embedding has no self-intersections") {
  SolverStats stats;
  auto pairs = find_self_intersections(linear_embedding(), 1.0, test_config(), &stats);
  CHECK(pairs.empty());
  CHECK(stats.complete);
}

TEST_CASE("rotated fixture pair sits at the rotated poles") {
  SplitMix64 rng(77);
  PolynomialMap g = polar_pair_fixture();
  auto q = random_rational_rotation(rng, 3);
  PolynomialMap rotated = compose_linear(g, q);
  auto pairs = find_self_intersections(rotated, 1.0, test_config());
  REQUIRE(pairs.size() == 1);
  // expected solutions: Q^{-1} (0,0,+-1) = Q^T (0,0,+-1) = third row of Q
  Vec pole(3), anti(3);
  for (int i = 0; i < 3; ++i) {
    pole[i] = q[2][i].to_double();
    anti[i] = -pole[i];
  }
  double d1 = std::min(dist(pairs[0].p, pole), dist(pairs[0].p, anti));
  double d2 = std::min(dist(pairs[0].q, pole), dist(pairs[0].q, anti));
  CHECK(d1 < 1e-8);
  CHECK(d2 < 1e-8);
  CHECK(dist(pairs[0].p, pairs[0].q) > 1.9);
}

TEST_CASE("pair classification reproduces the -4r^2 determinant") {
  PolynomialMap g = polar_pair_fixture();
  SelfIntersectConfig cfg = test_config();
  for (double r : {1.0, 0.5, 0.1}) {
    Vec p = {0.0, 0.0, r}, q = {0.0, 0.0, -r};
    PairClassification cl = classify_pair(g, p, q, cfg);
    CHECK(cl.regular);
    CHECK(cl.sign == -1);
    CHECK(cl.det == doctest::Approx(-4.0 * r * r).epsilon(1e-10));

    // swapping the points keeps the sign (n even)
    PairClassification sw = classify_pair(g, q, p, cfg);
    CHECK(sw.sign == cl.sign);
    CHECK(sw.det == doctest::Approx(cl.det).epsilon(1e-10));
  }
}

TEST_CASE("sign flips with the scaled first component") {
  SelfIntersectConfig cfg = test_config();
  Vec p = {0.0, 0.0, 1.0}, q = {0.0, 0.0, -1.0};
  for (long s : {2L, 5L}) {
    PolynomialMap gp = scale_component(polar_pair_fixture(), 0, Rational(s));
    PolynomialMap gn = scale_component(polar_pair_fixture(), 0, Rational(-s));
    CHECK(classify_pair(gp, p, q, cfg).sign == -1);
    CHECK(classify_pair(gn, p, q, cfg).sign == 1);
  }
}

TEST_CASE("sign is invariant under the choice of well-oriented basis") {
  PolynomialMap g = polar_pair_fixture();
  SelfIntersectConfig cfg = test_config();
  Vec p = {0.0, 0.0, 1.0}, q = {0.0, 0.0, -1.0};
  PairClassification ref = classify_pair(g, p, q, cfg);
  SplitMix64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    // rotate each basis by a random planar rotation: stays well oriented
    auto rotate = [&](std::vector<Vec> basis) {
      double th = 2.0 * M_PI * rng.uniform01();
      Vec a = basis[0], b = basis[1];
      for (std::size_t i = 0; i < a.size(); ++i) {
        basis[0][i] = std::cos(th) * a[i] + std::sin(th) * b[i];
        basis[1][i] = -std::sin(th) * a[i] + std::cos(th) * b[i];
      }
      return basis;
    };
    PairClassification cl = classify_pair_with_bases(g, p, q, rotate(tangent_basis(p)),
                                                     rotate(tangent_basis(q)), cfg);
    CHECK(cl.sign == ref.sign);
    CHECK(cl.det == doctest::Approx(ref.det).epsilon(1e-9));
  }
}

TEST_CASE("intersection numbers of the fixture family") {
  SelfIntersectConfig cfg = test_config();

  IntersectionReport fx = intersection_number_via_pairs(polar_pair_fixture(), 1.0, cfg);
  REQUIRE(fx.intersection_number_valid);
  CHECK(fx.complete_regular);
  CHECK(fx.intersection_number == -1);

  IntersectionReport emb = intersection_number_via_pairs(linear_embedding(), 1.0, cfg);
  REQUIRE(emb.intersection_number_valid);
  CHECK(emb.intersection_number == 0);

  IntersectionReport s2 = intersection_number_via_pairs(
      scale_component(polar_pair_fixture(), 0, Rational(2)), 1.0, cfg);
  REQUIRE(s2.intersection_number_valid);
  CHECK(s2.intersection_number == -1);

  IntersectionReport sneg = intersection_number_via_pairs(
      scale_component(polar_pair_fixture(), 0, Rational(-3)), 1.0, cfg);
  REQUIRE(sneg.intersection_number_valid);
  CHECK(sneg.intersection_number == 1);
}

TEST_CASE("radius stability") {
  SelfIntersectConfig cfg = test_config();
  RadiusStability st =
      radius_stability_check(polar_pair_fixture(), {1.0, 0.1, 0.01}, cfg);
  CHECK(st.stable);
  CHECK(st.values == std::vector<int>{-1, -1, -1});

  RadiusStability emb = radius_stability_check(linear_embedding(), {1.0, 0.1, 0.01}, cfg);
  CHECK(emb.stable);
  CHECK(emb.values == std::vector<int>{0, 0, 0});

  SplitMix64 rng(31337);
  auto q = random_rational_rotation(rng, 3);
  RadiusStability rot = radius_stability_check(
      compose_linear(polar_pair_fixture(), q), {1.0, 0.1, 0.01}, cfg);
  CHECK(rot.stable);
  CHECK(rot.values == std::vector<int>{-1, -1, -1});
}

TEST_CASE("domain rotation invariance of the intersection number") {
  SelfIntersectConfig cfg = test_config();
  SplitMix64 rng(2718);
  for (int trial = 0; trial < 5; ++trial) {
    auto q = random_rational_rotation(rng, 3);
    IntersectionReport rep = intersection_number_via_pairs(
        compose_linear(polar_pair_fixture(), q), 1.0, cfg);
    REQUIRE(rep.intersection_number_valid);
    CHECK(rep.intersection_number == -1);
  }
}

TEST_CASE("synthetic triple point withholds the pair-route number") {
  PolynomialMap g = polar_pair_fixture();
  SolverStats stats;
  stats.complete = true;
  // three distinct points declared mutually intersecting at one image value;
  // only the aggregation logic is under test here
  Vec a = {0.0, 0.0, 1.0}, b = {0.0, 0.0, -1.0}, c = {1.0, 0.0, 0.0};
  auto mk = [](Vec p, Vec q) {
    SelfIntersectionPair pr;
    pr.p = std::move(p);
    pr.q = std::move(q);
    pr.residual = 0.0;
    return pr;
  };
  // force a shared image cluster by an artificial map with constant image
  Polynomial one = Polynomial::constant(3, Rational(1));
  PolynomialMap constant_image(3, {one, one, one, one});
  IntersectionReport rep = assemble_intersection_report(
      constant_image, 1.0, {mk(a, b), mk(a, c), mk(b, c)}, stats, test_config());
  CHECK_FALSE(rep.complete_regular);
  CHECK_FALSE(rep.intersection_number_valid);
  CHECK(rep.note.find("triple point detected") != std::string::npos);
}

TEST_CASE("incomplete solver pass withholds the number") {
  PolynomialMap g = polar_pair_fixture();
  SolverStats stats;
  stats.complete = false;
  IntersectionReport rep = assemble_intersection_report(g, 1.0, {}, stats, test_config());
  CHECK_FALSE(rep.complete_regular);
  CHECK_FALSE(rep.intersection_number_valid);
}
