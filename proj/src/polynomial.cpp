#include "whitney/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace whitney {

Polynomial Polynomial::constant(int num_vars, Rational c) {
  Polynomial p(num_vars);
  p.add_term(Exponents(num_vars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int index) {
  if (index < 0 || index >= num_vars)
    throw std::invalid_argument("Polynomial::variable: index out of range");
  Exponents e(num_vars, 0);
  e[index] = 1;
  return monomial(num_vars, std::move(e), Rational(1));
}

Polynomial Polynomial::monomial(int num_vars, Exponents e, Rational c) {
  if (static_cast<int>(e.size()) != num_vars)
    throw std::invalid_argument("Polynomial::monomial: exponent length mismatch");
  Polynomial p(num_vars);
  p.add_term(e, c);
  return p;
}

int Polynomial::total_degree() const {
  int deg = 0;
  for (const auto& [e, c] : terms_) {
    int d = std::accumulate(e.begin(), e.end(), 0);
    deg = std::max(deg, d);
  }
  return deg;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
  if (static_cast<int>(e.size()) != num_vars_)
    throw std::invalid_argument("Polynomial::add_term: exponent length mismatch");
  if (c.is_zero()) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (num_vars_ != o.num_vars_)
    throw std::invalid_argument("Polynomial: variable count mismatch in +");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (num_vars_ != o.num_vars_)
    throw std::invalid_argument("Polynomial: variable count mismatch in -");
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.num_vars_ != b.num_vars_)
    throw std::invalid_argument("Polynomial: variable count mismatch in *");
  Polynomial r(a.num_vars_);
  Exponents e(a.num_vars_, 0);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (int v = 0; v < a.num_vars_; ++v) e[v] = ea[v] + eb[v];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r(num_vars_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial r(num_vars_);
  if (c.is_zero()) return r;
  for (const auto& [e, coef] : terms_) r.terms_.emplace(e, coef * c);
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial r = constant(num_vars_, Rational(1));
  Polynomial base(*this);
  while (e) {
    if (e & 1u) r = r * base;
    if (e >>= 1u) base = base * base;
  }
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= num_vars_)
    throw std::invalid_argument("Polynomial::derivative: variable out of range");
  Polynomial r(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents d = e;
    d[var] -= 1;
    r.add_term(d, c * Rational(static_cast<long>(e[var])));
  }
  return r;
}

Rational Polynomial::eval(const std::vector<Rational>& point) const {
  if (static_cast<int>(point.size()) != num_vars_)
    throw std::invalid_argument("Polynomial::eval: dimension mismatch");
  Rational acc(0);
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (int v = 0; v < num_vars_; ++v)
      if (e[v]) t *= point[v].pow(e[v]);
    acc += t;
  }
  return acc;
}

double Polynomial::eval_double(const std::vector<double>& point) const {
  if (static_cast<int>(point.size()) != num_vars_)
    throw std::invalid_argument("Polynomial::eval_double: dimension mismatch");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c.to_double();
    for (int v = 0; v < num_vars_; ++v)
      for (std::uint32_t k = 0; k < e[v]; ++k) t *= point[v];
    acc += t;
  }
  return acc;
}

Polynomial Polynomial::substitute(const std::vector<Polynomial>& images) const {
  if (static_cast<int>(images.size()) != num_vars_)
    throw std::invalid_argument("Polynomial::substitute: image count mismatch");
  int out_vars = images.empty() ? 0 : images[0].num_vars();
  for (const auto& im : images)
    if (im.num_vars() != out_vars)
      throw std::invalid_argument("Polynomial::substitute: inconsistent image domains");

  // memoized powers of each image
  std::vector<std::vector<Polynomial>> powers(num_vars_);
  auto image_pow = [&](int v, std::uint32_t e) -> const Polynomial& {
    auto& cache = powers[v];
    if (cache.empty()) cache.push_back(Polynomial::constant(out_vars, Rational(1)));
    while (cache.size() <= e) cache.push_back(cache.back() * images[v]);
    return cache[e];
  };

  Polynomial r(out_vars);
  for (const auto& [e, c] : terms_) {
    Polynomial t = Polynomial::constant(out_vars, c);
    for (int v = 0; v < num_vars_; ++v)
      if (e[v]) t = t * image_pow(v, e[v]);
    r += t;
  }
  return r;
}

namespace {

// lexicographic monomial order used by the division algorithm
bool lex_less(const Exponents& a, const Exponents& b) { return a < b; }

struct LeadingTerm {
  Exponents e;
  Rational c;
};

LeadingTerm leading(const Polynomial& p) {
  const auto& t = *p.terms().rbegin();
  return {t.first, t.second};
}

bool divides(const Exponents& d, const Exponents& n) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > n[i]) return false;
  return true;
}

}  // namespace

Polynomial Polynomial::divide_exact(const Polynomial& divisor) const {
  if (divisor.num_vars_ != num_vars_)
    throw std::invalid_argument("Polynomial::divide_exact: variable count mismatch");
  if (divisor.is_zero()) throw std::domain_error("Polynomial::divide_exact: zero divisor");

  Polynomial rem(*this);
  Polynomial quot(num_vars_);
  const LeadingTerm ld = leading(divisor);
  while (!rem.is_zero()) {
    const LeadingTerm lr = leading(rem);
    if (!divides(ld.e, lr.e))
      throw std::domain_error("Polynomial::divide_exact: not divisible");
    Exponents q(num_vars_);
    for (int v = 0; v < num_vars_; ++v) q[v] = lr.e[v] - ld.e[v];
    Rational qc = lr.c / ld.c;
    Polynomial qt = Polynomial::monomial(num_vars_, q, qc);
    quot += qt;
    rem -= qt * divisor;
  }
  return quot;
}

double Polynomial::coefficient_scale(double radius) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    int d = std::accumulate(e.begin(), e.end(), 0);
    s += std::abs(c.to_double()) * std::pow(radius, d);
  }
  return s;
}

std::string Polynomial::to_string(const std::vector<std::string>& var_names) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  // print highest monomial first
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    if (!first) os << (c.sign() > 0 ? " + " : " - ");
    Rational mag = first ? c : c.abs();
    first = false;
    bool has_var = std::any_of(e.begin(), e.end(), [](std::uint32_t k) { return k > 0; });
    bool unit = mag == Rational(1);
    if (!unit || !has_var) os << mag.to_string();
    bool printed = !unit || !has_var;
    for (int v = 0; v < num_vars_; ++v) {
      if (!e[v]) continue;
      if (printed) os << "*";
      if (v < static_cast<int>(var_names.size()))
        os << var_names[v];
      else
        os << "x" << (v + 1);
      if (e[v] > 1) os << "^" << e[v];
      printed = true;
    }
  }
  return os.str();
}

PolynomialMap::PolynomialMap(int dim, std::vector<Polynomial> comps)
    : domain_dim(dim), components(std::move(comps)) {
  for (const auto& c : components)
    if (c.num_vars() != dim)
      throw std::invalid_argument("PolynomialMap: component domain mismatch");
}

std::vector<Rational> PolynomialMap::eval(const std::vector<Rational>& point) const {
  std::vector<Rational> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.eval(point));
  return out;
}

std::vector<double> PolynomialMap::eval_double(const std::vector<double>& point) const {
  std::vector<double> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.eval_double(point));
  return out;
}

PolyMatrix::PolyMatrix(int r, int c, std::vector<Polynomial> e)
    : rows(r), cols(c), entries(std::move(e)) {
  if (entries.size() != static_cast<std::size_t>(r) * c)
    throw std::invalid_argument("PolyMatrix: entry count mismatch");
  for (const auto& p : entries)
    if (p.num_vars() != entries[0].num_vars())
      throw std::invalid_argument("PolyMatrix: inconsistent entry domains");
}

PolyMatrix jacobian(const PolynomialMap& m) {
  std::vector<Polynomial> entries;
  entries.reserve(m.components.size() * m.domain_dim);
  for (const auto& c : m.components)
    for (int j = 0; j < m.domain_dim; ++j) entries.push_back(c.derivative(j));
  return PolyMatrix(static_cast<int>(m.components.size()), m.domain_dim, std::move(entries));
}

namespace {

Polynomial det_cofactor(const PolyMatrix& a, std::vector<int> rows, std::vector<int> cols) {
  const int n = static_cast<int>(rows.size());
  const int nv = a.entries[0].num_vars();
  if (n == 1) return a.at(rows[0], cols[0]);
  Polynomial acc(nv);
  // expand along the first column of the submatrix
  for (int i = 0; i < n; ++i) {
    const Polynomial& piv = a.at(rows[i], cols[0]);
    if (piv.is_zero()) continue;
    std::vector<int> sub_rows;
    sub_rows.reserve(n - 1);
    for (int k = 0; k < n; ++k)
      if (k != i) sub_rows.push_back(rows[k]);
    std::vector<int> sub_cols(cols.begin() + 1, cols.end());
    Polynomial minor = det_cofactor(a, sub_rows, sub_cols);
    Polynomial term = piv * minor;
    if (i % 2 == 1) term = -term;
    acc += term;
  }
  return acc;
}

Polynomial det_bareiss(const PolyMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  const int n = static_cast<int>(rows.size());
  const int nv = a.entries[0].num_vars();
  std::vector<Polynomial> w;
  w.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w.push_back(a.at(rows[i], cols[j]));
  auto at = [&](int i, int j) -> Polynomial& { return w[static_cast<std::size_t>(i) * n + j]; };

  int sign = 1;
  Polynomial prev = Polynomial::constant(nv, Rational(1));
  for (int k = 0; k + 1 < n; ++k) {
    int piv = -1;
    for (int i = k; i < n; ++i)
      if (!at(i, k).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) return Polynomial(nv);  // singular
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(piv, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        Polynomial num = at(k, k) * at(i, j) - at(i, k) * at(k, j);
        at(i, j) = num.divide_exact(prev);
      }
      at(i, k) = Polynomial(nv);
    }
    prev = at(k, k);
  }
  Polynomial d = at(n - 1, n - 1);
  return sign < 0 ? -d : d;
}

}  // namespace

Polynomial determinant(const PolyMatrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("determinant: non-square matrix");
  if (a.rows == 0) throw std::invalid_argument("determinant: empty matrix");
  std::vector<int> rows(a.rows), cols(a.cols);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  if (a.rows <= 4) return det_cofactor(a, rows, cols);
  return det_bareiss(a, rows, cols);
}

bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

std::vector<Polynomial> minors(const PolyMatrix& a, int k) {
  if (k < 1 || k > std::min(a.rows, a.cols))
    throw std::invalid_argument("minors: order out of range");
  std::vector<Polynomial> out;
  std::vector<int> rsel(k);
  std::iota(rsel.begin(), rsel.end(), 0);
  do {
    std::vector<int> csel(k);
    std::iota(csel.begin(), csel.end(), 0);
    do {
      std::vector<Polynomial> sub;
      sub.reserve(static_cast<std::size_t>(k) * k);
      for (int i : rsel)
        for (int j : csel) sub.push_back(a.at(i, j));
      out.push_back(determinant(PolyMatrix(k, k, std::move(sub))));
    } while (next_combination(csel, a.cols));
  } while (next_combination(rsel, a.rows));
  return out;
}

PolyMatrix telescoping_decomposition(const PolynomialMap& g) {
  const int v = g.domain_dim;
  const int nc = static_cast<int>(g.components.size());
  const int w = 2 * v;  // (x_1..x_v, y_1..y_v)

  // images mapping the original variables into the doubled domain: the first
  // j variables go to y, the rest to x.
  auto prefix_images = [&](int j) {
    std::vector<Polynomial> im;
    im.reserve(v);
    for (int i = 0; i < v; ++i)
      im.push_back(Polynomial::variable(w, i < j ? v + i : i));
    return im;
  };

  std::vector<Polynomial> entries;
  entries.reserve(static_cast<std::size_t>(nc) * v);
  for (int i = 0; i < nc; ++i) {
    Polynomial upper = g.components[i].substitute(prefix_images(0));  // g_i(x)
    for (int j = 0; j < v; ++j) {
      Polynomial lower = g.components[i].substitute(prefix_images(j + 1));
      Polynomial diff = upper - lower;
      Polynomial step = Polynomial::variable(w, j) - Polynomial::variable(w, v + j);
      entries.push_back(diff.is_zero() ? Polynomial(w) : diff.divide_exact(step));
      upper = std::move(lower);
    }
  }
  return PolyMatrix(nc, v, std::move(entries));
}

std::vector<Polynomial> quotient_minors(const PolyMatrix& q) {
  if (q.rows < q.cols)
    throw std::invalid_argument("quotient_minors: need at least as many rows as columns");
  return minors(q, q.cols);
}

Polynomial diagonal_restriction(const Polynomial& p) {
  const int w = p.num_vars();
  if (w % 2 != 0)
    throw std::invalid_argument("diagonal_restriction: odd variable count");
  const int v = w / 2;
  std::vector<Polynomial> images;
  images.reserve(w);
  for (int i = 0; i < w; ++i) images.push_back(Polynomial::variable(v, i % v));
  return p.substitute(images);
}

PolynomialMap substitute_tail(const PolynomialMap& m, const std::vector<Rational>& tail_values) {
  const int p = static_cast<int>(tail_values.size());
  const int keep = m.domain_dim - p;
  if (keep < 0) throw std::invalid_argument("substitute_tail: too many values");
  std::vector<Polynomial> images;
  images.reserve(m.domain_dim);
  for (int i = 0; i < keep; ++i) images.push_back(Polynomial::variable(keep, i));
  for (int i = 0; i < p; ++i) images.push_back(Polynomial::constant(keep, tail_values[i]));
  std::vector<Polynomial> comps;
  comps.reserve(m.components.size());
  for (const auto& c : m.components) comps.push_back(c.substitute(images));
  return PolynomialMap(keep, std::move(comps));
}

PolynomialMap compose_linear(const PolynomialMap& m,
                             const std::vector<std::vector<Rational>>& a) {
  if (static_cast<int>(a.size()) != m.domain_dim)
    throw std::invalid_argument("compose_linear: row count mismatch");
  const int new_dim = a.empty() ? 0 : static_cast<int>(a[0].size());
  std::vector<Polynomial> images;
  images.reserve(m.domain_dim);
  for (int i = 0; i < m.domain_dim; ++i) {
    if (static_cast<int>(a[i].size()) != new_dim)
      throw std::invalid_argument("compose_linear: ragged matrix");
    Polynomial row(new_dim);
    for (int j = 0; j < new_dim; ++j) {
      Exponents e(new_dim, 0);
      e[j] = 1;
      row.add_term(e, a[i][j]);
    }
    images.push_back(std::move(row));
  }
  std::vector<Polynomial> comps;
  comps.reserve(m.components.size());
  for (const auto& c : m.components) comps.push_back(c.substitute(images));
  return PolynomialMap(new_dim, std::move(comps));
}

}  // namespace whitney
