#include "whitney/rational.hpp"

#include <cctype>

namespace whitney {

Rational::Rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  mpq_init(q_);
  mpq_set_si(q_, num, 1);
  mpq_t d;
  mpq_init(d);
  mpq_set_si(d, den, 1);
  mpq_div(q_, q_, d);
  mpq_clear(d);
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::invalid_argument("Rational: division by zero");
  mpq_div(q_, q_, o.q_);
  return *this;
}

Rational Rational::pow(unsigned e) const {
  Rational r(1);
  Rational base(*this);
  while (e) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

Rational Rational::from_string(std::string_view s) {
  auto valid_int = [](std::string_view t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };

  std::string_view num = s, den = "1";
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    num = s.substr(0, slash);
    den = s.substr(slash + 1);
  }
  if (!valid_int(num) || !valid_int(den))
    throw std::invalid_argument("Rational: malformed literal '" + std::string(s) + "'");

  Rational r;
  mpz_t n, d;
  mpz_init(n);
  mpz_init(d);
  mpz_set_str(n, std::string(num).c_str(), 10);
  mpz_set_str(d, std::string(den).c_str(), 10);
  if (mpz_sgn(d) == 0) {
    mpz_clear(n);
    mpz_clear(d);
    throw std::invalid_argument("Rational: zero denominator in '" + std::string(s) + "'");
  }
  mpq_set_num(r.q_, n);
  mpq_set_den(r.q_, d);
  mpq_canonicalize(r.q_);
  mpz_clear(n);
  mpz_clear(d);
  return r;
}

std::string Rational::to_string() const {
  char* c = mpq_get_str(nullptr, 10, q_);
  std::string s(c);
  void (*freefn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(c, s.size() + 1);
  return s;
}

}  // namespace whitney
