#ifndef WHITNEY_TEST_UTIL_HPP
#define WHITNEY_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "whitney/numeric.hpp"
#include "whitney/polynomial.hpp"

namespace whitney::test {

inline Polynomial var(int nv, int i) { return Polynomial::variable(nv, i); }

/// g(x,y,z) = (x, y, xz, yz): an immersion on every origin-centered sphere
/// whose only double point is the polar pair, with intersection number -1.
inline PolynomialMap polar_pair_fixture() {
  Polynomial x = var(3, 0), y = var(3, 1), z = var(3, 2);
  return PolynomialMap(3, {x, y, x * z, y * z});
}

/// Linear embedding (x, y, z, 0): injective, intersection number 0.
inline PolynomialMap linear_embedding() {
  Polynomial x = var(3, 0), y = var(3, 1), z = var(3, 2);
  return PolynomialMap(3, {x, y, z, Polynomial(3)});
}

/// (x, y, x^2, y^2): fails the small-sphere immersion test on the z = 0
/// equator (every maximal minor of the augmented Jacobian is divisible by z).
inline PolynomialMap equator_degenerate_map() {
  Polynomial x = var(3, 0), y = var(3, 1);
  return PolynomialMap(3, {x, y, x * x, y * y});
}

/// Scales component `index` by the exact rational s.
inline PolynomialMap scale_component(const PolynomialMap& g, int index, const Rational& s) {
  PolynomialMap out = g;
  out.components[index] = out.components[index].scaled(s);
  return out;
}

/// Random sparse polynomial with small rational coefficients, for exact
/// identity property tests.
inline Polynomial random_polynomial(SplitMix64& rng, int nv, int max_deg, int n_terms) {
  Polynomial p(nv);
  for (int t = 0; t < n_terms; ++t) {
    Exponents e(nv, 0);
    int budget = max_deg;
    for (int v = 0; v < nv; ++v) {
      int d = static_cast<int>(rng.next() % static_cast<std::uint64_t>(budget + 1));
      e[v] = static_cast<std::uint32_t>(d);
      budget -= d;
    }
    long num = static_cast<long>(rng.next() % 19) - 9;
    long den = 1 + static_cast<long>(rng.next() % 3);
    if (num != 0) p.add_term(e, Rational(num, den));
  }
  return p;
}

inline PolynomialMap random_map(SplitMix64& rng, int nv, int n_comps, int max_deg,
                                int n_terms) {
  std::vector<Polynomial> comps;
  comps.reserve(n_comps);
  for (int i = 0; i < n_comps; ++i)
    comps.push_back(random_polynomial(rng, nv, max_deg, n_terms));
  return PolynomialMap(nv, std::move(comps));
}

inline std::vector<Rational> random_rational_point(SplitMix64& rng, int nv) {
  std::vector<Rational> p;
  p.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    long num = static_cast<long>(rng.next() % 13) - 6;
    long den = 1 + static_cast<long>(rng.next() % 4);
    p.emplace_back(num, den);
  }
  return p;
}

/// Rational special-orthogonal matrix via the Cayley transform of a random
/// rational skew-symmetric matrix: Q = (I - S)(I + S)^{-1}.
inline std::vector<std::vector<Rational>> random_rational_rotation(SplitMix64& rng, int n) {
  using RMat = std::vector<std::vector<Rational>>;
  RMat s(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      long num = static_cast<long>(rng.next() % 9) - 4;
      long den = 1 + static_cast<long>(rng.next() % 3);
      s[i][j] = Rational(num, den);
      s[j][i] = -s[i][j];
    }

  RMat a(n, std::vector<Rational>(n, Rational(0)));  // I + S
  RMat inv(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) {
    inv[i][i] = Rational(1);
    for (int j = 0; j < n; ++j) a[i][j] = (i == j ? Rational(1) : Rational(0)) + s[i][j];
  }
  // exact Gauss-Jordan; I + S is invertible for skew S
  for (int k = 0; k < n; ++k) {
    int piv = k;
    while (a[piv][k].is_zero()) ++piv;
    std::swap(a[piv], a[k]);
    std::swap(inv[piv], inv[k]);
    Rational p = a[k][k];
    for (int j = 0; j < n; ++j) {
      a[k][j] /= p;
      inv[k][j] /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k || a[i][k].is_zero()) continue;
      Rational f = a[i][k];
      for (int j = 0; j < n; ++j) {
        a[i][j] -= f * a[k][j];
        inv[i][j] -= f * inv[k][j];
      }
    }
  }

  RMat q(n, std::vector<Rational>(n, Rational(0)));  // (I - S) * inv
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Rational acc(0);
      for (int k = 0; k < n; ++k) {
        Rational lhs = (i == k ? Rational(1) : Rational(0)) - s[i][k];
        acc += lhs * inv[k][j];
      }
      q[i][j] = acc;
    }
  return q;
}

}  // namespace whitney::test

#endif
