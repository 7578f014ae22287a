#ifndef WHITNEY_POLYNOMIAL_HPP
#define WHITNEY_POLYNOMIAL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "whitney/rational.hpp"

namespace whitney {

/// Exponent vector of a monomial; length equals the number of variables.
using Exponents = std::vector<std::uint32_t>;

/// Sparse multivariate polynomial with exact rational coefficients.
/// Invariant: no stored coefficient is zero, every exponent vector has
/// length num_vars(). Immutable value semantics; all arithmetic is exact.
class Polynomial {
 public:
  explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, Rational c);
  static Polynomial variable(int num_vars, int index);
  static Polynomial monomial(int num_vars, Exponents e, Rational c);

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t num_terms() const { return terms_.size(); }
  int total_degree() const;
  const std::map<Exponents, Rational>& terms() const { return terms_; }

  /// Adds c * x^e, cancelling exactly.
  void add_term(const Exponents& e, const Rational& c);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial operator-() const;
  Polynomial scaled(const Rational& c) const;
  Polynomial pow(unsigned e) const;

  Polynomial derivative(int var) const;

  Rational eval(const std::vector<Rational>& point) const;
  double eval_double(const std::vector<double>& point) const;

  /// Substitutes variable i by images[i]; all images must share a common
  /// variable count, which becomes the result's.
  Polynomial substitute(const std::vector<Polynomial>& images) const;

  /// Exact division; throws std::domain_error if the divisor does not divide
  /// this polynomial exactly.
  Polynomial divide_exact(const Polynomial& divisor) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  /// sum over terms of |coef| * radius^degree; a magnitude bound for the
  /// polynomial on the ball of that radius, used to normalize numerics.
  double coefficient_scale(double radius) const;

  std::string to_string(const std::vector<std::string>& var_names = {}) const;

 private:
  int num_vars_;
  std::map<Exponents, Rational> terms_;
};

/// A tuple of polynomials over a common domain.
struct PolynomialMap {
  int domain_dim = 0;
  std::vector<Polynomial> components;

  PolynomialMap() = default;
  PolynomialMap(int dim, std::vector<Polynomial> comps);

  std::vector<Rational> eval(const std::vector<Rational>& point) const;
  std::vector<double> eval_double(const std::vector<double>& point) const;
};

/// Dense matrix of polynomials, row-major, all entries over the same domain.
struct PolyMatrix {
  int rows = 0, cols = 0;
  std::vector<Polynomial> entries;

  PolyMatrix() = default;
  PolyMatrix(int r, int c, std::vector<Polynomial> e);

  const Polynomial& at(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }
  Polynomial& at(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
};

/// Entry (i,j) is the exact partial derivative of component i by variable j.
PolyMatrix jacobian(const PolynomialMap& m);

/// Exact determinant: cofactor expansion up to 4x4, fraction-free Bareiss
/// elimination above that.
Polynomial determinant(const PolyMatrix& a);

/// All k x k minor determinants, ordered lexicographically by (row subset,
/// column subset).
std::vector<Polynomial> minors(const PolyMatrix& a, int k);

/// Difference-quotient decomposition of a map g with v variables: returns the
/// components x cols matrix q over 2v variables (x_1..x_v, y_1..y_v) with
///   q_ij(x, y) = [g_i(y_1..y_{j-1}, x_j..x_v) - g_i(y_1..y_j, x_{j+1}..x_v)] / (x_j - y_j),
/// so that g_i(x) - g_i(y) = sum_j q_ij(x,y) (x_j - y_j) exactly, and
/// q_ij(x, x) = dg_i/dx_j(x).
PolyMatrix telescoping_decomposition(const PolynomialMap& g);

/// All maximal (cols x cols) minors over row subsets of a difference-quotient
/// matrix, in lexicographic row-subset order.
std::vector<Polynomial> quotient_minors(const PolyMatrix& q);

/// For a polynomial in 2v variables (x, y), substitutes y := x, producing a
/// polynomial in v variables.
Polynomial diagonal_restriction(const Polynomial& p);

/// Fixes the trailing variables of every component to exact values.
PolynomialMap substitute_tail(const PolynomialMap& m, const std::vector<Rational>& tail_values);

/// Precomposition with the linear map x = A x'; a has domain_dim rows, its
/// column count is the new domain dimension.
PolynomialMap compose_linear(const PolynomialMap& m, const std::vector<std::vector<Rational>>& a);

/// Lexicographic enumeration of k-subsets of {0..n-1}. Returns false when
/// exhausted. Start with idx = {0,1,..,k-1}.
bool next_combination(std::vector<int>& idx, int n);

}  // namespace whitney

#endif
