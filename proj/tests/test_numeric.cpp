#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "whitney/numeric.hpp"

using namespace whitney;
using namespace whitney::test;

TEST_CASE("lu determinant and solve") {
  Mat m(3, 3);
  double vals[9] = {2, 1, 0, 1, 3, 1, 0, 1, 4};
  for (int i = 0; i < 9; ++i) m.a[i] = vals[i];
  CHECK(det(m) == doctest::Approx(18.0));  // 2*(12-1) - 1*(4-0) = 18

  LU f = lu_factor(m);
  Vec x = lu_solve(f, {1.0, 2.0, 3.0});
  // residual check
  Vec r(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m.at(i, j) * x[j];
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(3.0));
}

TEST_CASE("singular values of a constructed matrix") {
  // diag(3, 2, 0.5) rotated; singular values are invariant
  Mat d(3, 3);
  d.at(0, 0) = 3;
  d.at(1, 1) = 2;
  d.at(2, 2) = 0.5;
  double c = std::cos(0.7), s = std::sin(0.7);
  Mat rot(3, 3);
  rot.at(0, 0) = c;
  rot.at(0, 1) = -s;
  rot.at(1, 0) = s;
  rot.at(1, 1) = c;
  rot.at(2, 2) = 1;
  Mat a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int k = 0; k < 3; ++k) acc += rot.at(i, k) * d.at(k, j);
      a.at(i, j) = acc;
    }
  Vec sv = singular_values(a);
  CHECK(sv[0] == doctest::Approx(3.0));
  CHECK(sv[1] == doctest::Approx(2.0));
  CHECK(sv[2] == doctest::Approx(0.5));
}

TEST_CASE("tangent frame is orthonormal and positively oriented") {
  SplitMix64 rng(5);
  for (int dim : {3, 4, 6}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vec u(dim);
      double n2 = 0;
      for (int i = 0; i < dim; ++i) {
        u[i] = rng.normal();
        n2 += u[i] * u[i];
      }
      for (double& c : u) c /= std::sqrt(n2);
      auto frame = tangent_frame(u);
      REQUIRE(static_cast<int>(frame.size()) == dim - 1);
      for (int i = 0; i < dim - 1; ++i) {
        CHECK(std::abs(dot(frame[i], u)) < 1e-12);
        CHECK(norm(frame[i]) == doctest::Approx(1.0));
        for (int j = i + 1; j < dim - 1; ++j)
          CHECK(std::abs(dot(frame[i], frame[j])) < 1e-12);
      }
      Mat m(dim, dim);
      for (int i = 0; i < dim; ++i) m.at(i, 0) = u[i];
      for (int j = 1; j < dim; ++j)
        for (int i = 0; i < dim; ++i) m.at(i, j) = frame[j - 1][i];
      CHECK(det(m) == doctest::Approx(1.0));
    }
  }
  // near-e1 degenerate branch
  Vec e1 = {1.0, 0.0, 0.0};
  auto frame = tangent_frame(e1);
  CHECK(frame[0][1] == 1.0);
  CHECK(frame[1][2] == 1.0);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  Vec x, w;
  gauss_legendre(8, x, w);
  // degree up to 15 is exact; try x^6 and x^10
  double i6 = 0, i10 = 0, i0 = 0;
  for (int k = 0; k < 8; ++k) {
    i0 += w[k];
    i6 += w[k] * std::pow(x[k], 6);
    i10 += w[k] * std::pow(x[k], 10);
  }
  CHECK(i0 == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(i6 == doctest::Approx(2.0 / 7).epsilon(1e-13));
  CHECK(i10 == doctest::Approx(2.0 / 11).epsilon(1e-13));
}

TEST_CASE("inverse normal cdf") {
  CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inv_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(inv_normal_cdf(0.00134989803163) == doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("sphere points are unit and deterministic") {
  Vec shift = halton_shift(4, 99);
  Vec mean(4, 0.0);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    Vec p = sphere_point(4, i, shift);
    CHECK(norm(p) == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 4; ++k) mean[k] += p[k];
  }
  for (int k = 0; k < 4; ++k) CHECK(std::abs(mean[k]) / 2000 < 0.05);

  Vec p1 = sphere_point(5, 123, halton_shift(5, 7));
  Vec p2 = sphere_point(5, 123, halton_shift(5, 7));
  CHECK(p1 == p2);
}

TEST_CASE("compiled map matches exact evaluation") {
  SplitMix64 rng(31);
  PolynomialMap g = random_map(rng, 3, 4, 4, 6);
  CompiledMap cm = CompiledMap::from(g);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
    Vec out(4), j(12);
    cm.eval_jac(x.data(), out.data(), j.data());
    auto exact = g.eval_double(x);
    PolyMatrix jp = jacobian(g);
    for (int i = 0; i < 4; ++i) {
      CHECK(out[i] == doctest::Approx(exact[i]).epsilon(1e-12));
      for (int v = 0; v < 3; ++v)
        CHECK(j[i * 3 + v] == doctest::Approx(jp.at(i, v).eval_double(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("parallel chunk reduction is thread-count independent") {
  const std::uint64_t total = 100000;
  const std::uint64_t chunk = 1024;
  auto run = [&](int threads) {
    std::vector<double> partial((total + chunk - 1) / chunk, 0.0);
    parallel_chunks(total, chunk, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
      double s = 0;
      for (std::uint64_t i = b; i < e; ++i) s += std::sin(1e-3 * static_cast<double>(i));
      partial[c] = s;
    });
    double acc = 0;
    for (double p : partial) acc += p;
    return acc;
  };
  double s1 = run(1), s2 = run(2), s4 = run(4);
  CHECK(s1 == s2);
  CHECK(s1 == s4);
}
