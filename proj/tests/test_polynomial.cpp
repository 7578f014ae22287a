#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "whitney/polynomial.hpp"

using namespace whitney;
using namespace whitney::test;

TEST_CASE("rational basics") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(3) + Rational(1, 3) == Rational(10, 3));
  CHECK((Rational(1, 2) * Rational(2, 3)).to_string() == "1/3");
  CHECK(Rational::from_string("-7/21") == Rational(-1, 3));
  CHECK(Rational::from_string("5") == Rational(5));
  CHECK(Rational(-4, 6).to_string() == "-2/3");
  CHECK(Rational(6, 3).to_string() == "2");
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Rational::from_string("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::from_string("a/2"), std::invalid_argument);
  CHECK(Rational(2, 3).pow(3) == Rational(8, 27));
  CHECK(Rational(-5, 7) < Rational(0));
}

TEST_CASE("evaluation") {
  // (x1^2, x1 x2) at (2,3) -> (4,6)
  Polynomial x1 = var(2, 0), x2 = var(2, 1);
  PolynomialMap m(2, {x1 * x1, x1 * x2});
  auto v = m.eval({Rational(2), Rational(3)});
  CHECK(v[0] == Rational(4));
  CHECK(v[1] == Rational(6));

  PolynomialMap zero(2, {Polynomial(2), Polynomial(2)});
  auto z = zero.eval({Rational(7), Rational(-1, 2)});
  CHECK(z[0] == Rational(0));
  CHECK(z[1] == Rational(0));

  // x1^2 + x2^2 + x3^2 at (1,2,2) -> 9
  Polynomial omega(3);
  for (int i = 0; i < 3; ++i) omega += var(3, i) * var(3, i);
  CHECK(omega.eval({Rational(1), Rational(2), Rational(2)}) == Rational(9));

  CHECK_THROWS(omega.eval({Rational(1)}));
}

TEST_CASE("jacobian fixtures") {
  PolynomialMap g = polar_pair_fixture();
  PolyMatrix j = jacobian(g);
  REQUIRE(j.rows == 4);
  REQUIRE(j.cols == 3);
  Polynomial x = var(3, 0), y = var(3, 1), z = var(3, 2);
  Polynomial one = Polynomial::constant(3, Rational(1));
  CHECK(j.at(0, 0) == one);
  CHECK(j.at(0, 1) == Polynomial(3));
  CHECK(j.at(1, 1) == one);
  CHECK(j.at(2, 0) == z);
  CHECK(j.at(2, 2) == x);
  CHECK(j.at(3, 1) == z);
  CHECK(j.at(3, 2) == y);

  PolynomialMap c(2, {Polynomial::constant(2, Rational(5))});
  PolyMatrix jc = jacobian(c);
  CHECK(jc.at(0, 0).is_zero());
  CHECK(jc.at(0, 1).is_zero());

  Polynomial omega(3);
  for (int i = 0; i < 3; ++i) omega += var(3, i) * var(3, i);
  PolyMatrix grad = jacobian(PolynomialMap(3, {omega}));
  for (int i = 0; i < 3; ++i) CHECK(grad.at(0, i) == var(3, i).scaled(Rational(2)));
}

TEST_CASE("minor counts and identity") {
  // 2x3 matrix, k=2 -> 3 minors
  std::vector<Polynomial> e;
  for (int i = 0; i < 6; ++i) e.push_back(Polynomial::constant(1, Rational(i)));
  CHECK(minors(PolyMatrix(2, 3, e), 2).size() == 3);

  // identity 3x3, k=3 -> [1]
  std::vector<Polynomial> id;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      id.push_back(Polynomial::constant(1, Rational(i == j ? 1 : 0)));
  auto dets = minors(PolyMatrix(3, 3, id), 3);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0] == Polynomial::constant(1, Rational(1)));

  CHECK_THROWS(minors(PolyMatrix(2, 3, e), 4));
}

static PolyMatrix augmented(const PolynomialMap& g) {
  std::vector<Polynomial> rows = jacobian(g).entries;
  for (int i = 0; i < g.domain_dim; ++i)
    rows.push_back(var(g.domain_dim, i).scaled(Rational(2)));
  return PolyMatrix(static_cast<int>(g.components.size()) + 1, g.domain_dim, rows);
}

TEST_CASE("augmented jacobian minors of the sphere fixture") {
  PolynomialMap g = polar_pair_fixture();
  auto ms = minors(augmented(g), 3);
  REQUIRE(ms.size() == 10);
  // row subsets in lexicographic order: {0,1,4} is the third subset
  Polynomial z2 = var(3, 2).scaled(Rational(2));
  CHECK(ms[2] == z2);

  // independent route: evaluating each minor polynomial at random rational
  // points must match the determinant of the evaluated numeric matrix
  SplitMix64 rng(42);
  PolyMatrix a = augmented(g);
  std::vector<int> rsel = {0, 1, 2};
  int idx = 0;
  do {
    for (int rep = 0; rep < 3; ++rep) {
      auto pt = random_rational_point(rng, 3);
      std::vector<double> ptd;
      for (auto& q : pt) ptd.push_back(q.to_double());
      Mat num(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) num.at(i, j) = a.at(rsel[i], j).eval_double(ptd);
      double direct = det(num);
      double via_poly = ms[idx].eval_double(ptd);
      CHECK(via_poly == doctest::Approx(direct).epsilon(1e-9));
    }
    ++idx;
  } while (next_combination(rsel, 5));
}

TEST_CASE("telescoping decomposition fixtures") {
  // g = x1^2 -> q_11 = x1 + y1
  Polynomial sq = var(1, 0) * var(1, 0);
  PolyMatrix q1 = telescoping_decomposition(PolynomialMap(1, {sq}));
  CHECK(q1.at(0, 0) == var(2, 0) + var(2, 1));

  // g = x1 x2 -> q_11 = x2, q_12 = y1
  Polynomial prod = var(2, 0) * var(2, 1);
  PolyMatrix q2 = telescoping_decomposition(PolynomialMap(2, {prod}));
  CHECK(q2.at(0, 0) == var(4, 1));
  CHECK(q2.at(0, 1) == var(4, 2));
}

TEST_CASE("telescoping identity and diagonal derivative, randomized") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    PolynomialMap g = random_map(rng, 3, 4, 3, 5);
    PolyMatrix q = telescoping_decomposition(g);
    for (int i = 0; i < 4; ++i) {
      // sum_j q_ij (x_j - y_j) == g_i(x) - g_i(y) as polynomials
      Polynomial recon(6);
      for (int j = 0; j < 3; ++j)
        recon += q.at(i, j) * (var(6, j) - var(6, 3 + j));
      std::vector<Polynomial> ximg, yimg;
      for (int v = 0; v < 3; ++v) ximg.push_back(var(6, v));
      for (int v = 0; v < 3; ++v) yimg.push_back(var(6, 3 + v));
      Polynomial diff = g.components[i].substitute(ximg) - g.components[i].substitute(yimg);
      CHECK(recon == diff);

      // q_ij on the diagonal equals the partial derivative
      for (int j = 0; j < 3; ++j)
        CHECK(diagonal_restriction(q.at(i, j)) == g.components[i].derivative(j));
    }
  }

  // spot check the identity at random rational points too
  for (int trial = 0; trial < 5; ++trial) {
    PolynomialMap g = random_map(rng, 2, 2, 3, 4);
    PolyMatrix q = telescoping_decomposition(g);
    for (int rep = 0; rep < 10; ++rep) {
      auto xy = random_rational_point(rng, 4);
      std::vector<Rational> xpt(xy.begin(), xy.begin() + 2);
      std::vector<Rational> ypt(xy.begin() + 2, xy.end());
      for (int i = 0; i < 2; ++i) {
        Rational acc(0);
        for (int j = 0; j < 2; ++j)
          acc += q.at(i, j).eval(xy) * (xy[j] - xy[2 + j]);
        CHECK(acc == g.components[i].eval(xpt) - g.components[i].eval(ypt));
      }
    }
  }
}

TEST_CASE("quotient minors match augmented jacobian minors on the diagonal") {
  SplitMix64 rng(11);
  std::vector<PolynomialMap> cases;
  cases.push_back(polar_pair_fixture());
  for (int i = 0; i < 10; ++i) cases.push_back(random_map(rng, 3, 4, 3, 4));

  Polynomial omega(3);
  for (int i = 0; i < 3; ++i) omega += var(3, i) * var(3, i);

  for (const auto& g : cases) {
    PolynomialMap extended = g;
    extended.components.push_back(omega);
    PolyMatrix q = telescoping_decomposition(extended);
    REQUIRE(q.rows == 5);
    REQUIRE(q.cols == 3);
    auto wm = quotient_minors(q);
    auto jm = minors(augmented(g), 3);
    REQUIRE(wm.size() == 10);
    REQUIRE(jm.size() == 10);
    for (int k = 0; k < 10; ++k) CHECK(diagonal_restriction(wm[k]) == jm[k]);
  }
}

TEST_CASE("quotient minors of an identity block") {
  // q = [I_3; 0 rows] -> subset {0,1,2} gives 1, any subset with a zero row gives 0
  std::vector<Polynomial> e;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j)
      e.push_back(Polynomial::constant(2, Rational(i == j ? 1 : 0)));
  auto wm = quotient_minors(PolyMatrix(5, 3, e));
  REQUIRE(wm.size() == 10);
  CHECK(wm[0] == Polynomial::constant(2, Rational(1)));
  for (int k = 1; k < 10; ++k) CHECK(wm[k].is_zero());
}

TEST_CASE("jacobian commutes with linear substitution") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    PolynomialMap g = random_map(rng, 3, 3, 3, 4);
    auto a = random_rational_rotation(rng, 3);
    PolynomialMap composed = compose_linear(g, a);
    PolyMatrix lhs = jacobian(composed);

    // rhs: J(g)(Ax) * A
    PolyMatrix jg = jacobian(g);
    std::vector<Polynomial> images;
    for (int i = 0; i < 3; ++i) {
      Polynomial row(3);
      for (int j = 0; j < 3; ++j) {
        Exponents ee(3, 0);
        ee[j] = 1;
        row.add_term(ee, a[i][j]);
      }
      images.push_back(row);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Polynomial acc(3);
        for (int k = 0; k < 3; ++k) {
          Polynomial jk = jg.at(i, k).substitute(images);
          Polynomial akj(3);
          akj.add_term(Exponents(3, 0), a[k][j]);
          acc += jk * akj;
        }
        CHECK(lhs.at(i, j) == acc);
      }
  }
}

TEST_CASE("minors of a rank-deficient constant matrix vanish") {
  // rows 2 and 3 are multiples of row 1
  std::vector<Polynomial> e;
  long base[3] = {1, 2, 3};
  for (int i = 1; i <= 3; ++i)
    for (int j = 0; j < 3; ++j)
      e.push_back(Polynomial::constant(1, Rational(base[j] * i)));
  auto ms = minors(PolyMatrix(3, 3, e), 2);
  for (const auto& m : ms) CHECK(m.is_zero());
  CHECK(determinant(PolyMatrix(3, 3, e)).is_zero());
}

TEST_CASE("bareiss agrees with cofactor and evaluation on larger matrices") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Polynomial> e;
    for (int i = 0; i < 25; ++i) e.push_back(random_polynomial(rng, 2, 2, 3));
    PolyMatrix a(5, 5, e);
    Polynomial d = determinant(a);  // bareiss path
    for (int rep = 0; rep < 4; ++rep) {
      auto pt = random_rational_point(rng, 2);
      std::vector<double> ptd = {pt[0].to_double(), pt[1].to_double()};
      Mat num(5, 5);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) num.at(i, j) = a.at(i, j).eval_double(ptd);
      CHECK(d.eval_double(ptd) ==
            doctest::Approx(det(num)).epsilon(1e-8).scale(std::max(1.0, std::abs(det(num)))));
    }
  }
}

TEST_CASE("exact division") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial a = random_polynomial(rng, 3, 3, 4);
    Polynomial b = random_polynomial(rng, 3, 2, 3);
    if (b.is_zero()) continue;
    Polynomial p = a * b;
    if (p.is_zero()) continue;
    CHECK(p.divide_exact(b) == a);
  }
  Polynomial x = var(2, 0), y = var(2, 1);
  CHECK_THROWS_AS((x * x + y).divide_exact(x + y), std::domain_error);
}

TEST_CASE("substitution utilities") {
  // substitute_tail fixes trailing parameters
  Polynomial x = var(2, 0), s = var(2, 1);
  PolynomialMap fam(2, {x * s, x * x});
  PolynomialMap fixed = substitute_tail(fam, {Rational(3)});
  CHECK(fixed.domain_dim == 1);
  CHECK(fixed.components[0] == var(1, 0).scaled(Rational(3)));
  CHECK(fixed.components[1] == var(1, 0) * var(1, 0));

  // diagonal restriction merges exponents
  Polynomial p(4);
  p.add_term({1, 0, 0, 2}, Rational(5));  // x1 * y2^2
  Polynomial d = diagonal_restriction(p);
  Polynomial expect(2);
  expect.add_term({1, 2}, Rational(5));
  CHECK(d == expect);
}
