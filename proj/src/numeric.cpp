#include "whitney/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace whitney {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

LU lu_factor(Mat m) {
  const int n = m.rows;
  LU f;
  f.perm.resize(n);
  for (int i = 0; i < n; ++i) f.perm[i] = i;
  f.sign = 1;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(m.at(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(m.at(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) {
      f.lu = std::move(m);
      f.ok = false;
      return f;
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      double l = m.at(i, k) / m.at(k, k);
      m.at(i, k) = l;
      for (int j = k + 1; j < n; ++j) m.at(i, j) -= l * m.at(k, j);
    }
  }
  f.lu = std::move(m);
  f.ok = true;
  return f;
}

Vec lu_solve(const LU& f, const Vec& rhs) {
  const int n = f.lu.rows;
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu.at(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu.at(i, j) * x[j];
    x[i] /= f.lu.at(i, i);
  }
  return x;
}

double lu_det(const LU& f) {
  if (!f.ok) return 0.0;
  double d = f.sign;
  for (int i = 0; i < f.lu.rows; ++i) d *= f.lu.at(i, i);
  return d;
}

double det(const Mat& m) { return lu_det(lu_factor(m)); }

Vec singular_values(Mat m) {
  // one-sided Jacobi: orthogonalize columns of m in place
  const int rows = m.rows, cols = m.cols;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < cols - 1; ++p) {
      for (int q = p + 1; q < cols; ++q) {
        double app = 0, aqq = 0, apq = 0;
        for (int i = 0; i < rows; ++i) {
          app += m.at(i, p) * m.at(i, p);
          aqq += m.at(i, q) * m.at(i, q);
          apq += m.at(i, p) * m.at(i, q);
        }
        off = std::max(off, std::abs(apq) / (std::sqrt(app * aqq) + 1e-300));
        if (std::abs(apq) < 1e-30) continue;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < rows; ++i) {
          double vp = m.at(i, p), vq = m.at(i, q);
          m.at(i, p) = c * vp - s * vq;
          m.at(i, q) = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  Vec sv(cols);
  for (int j = 0; j < cols; ++j) {
    double s = 0;
    for (int i = 0; i < rows; ++i) s += m.at(i, j) * m.at(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

std::vector<Vec> tangent_frame(const Vec& u) {
  const int m = static_cast<int>(u.size());
  std::vector<Vec> frame;
  frame.reserve(m - 1);
  if (u[0] > 1.0 - 1e-12) {
    for (int j = 1; j < m; ++j) {
      Vec v(m, 0.0);
      v[j] = 1.0;
      frame.push_back(std::move(v));
    }
    return frame;
  }
  // Householder reflector mapping e_1 to u; its remaining columns span the
  // complement but with orientation -1, fixed by negating the last vector.
  Vec w(u);
  w[0] -= 1.0;
  double nw2 = dot(w, w);
  for (int j = 1; j < m; ++j) {
    Vec v(m, 0.0);
    v[j] = 1.0;
    double f = 2.0 * w[j] / nw2;
    for (int i = 0; i < m; ++i) v[i] -= f * w[i];
    frame.push_back(std::move(v));
  }
  for (double& c : frame.back()) c = -c;
  return frame;
}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  double u;
  do {
    u = uniform01();
  } while (u <= 0.0 || u >= 1.0);
  return inv_normal_cdf(u);
}

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inv_normal_cdf: p out of (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // one Halley refinement step
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1 + x * u / 2);
  return x;
}

double halton(std::uint64_t index, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

static const std::uint32_t kHaltonBases[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                             23, 29, 31, 37, 41, 43, 47, 53};

Vec halton_shift(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vec s(dim);
  for (int i = 0; i < dim; ++i) s[i] = rng.uniform01();
  return s;
}

Vec sphere_point(int dim, std::uint64_t index, const Vec& shift) {
  if (dim > static_cast<int>(sizeof(kHaltonBases) / sizeof(kHaltonBases[0])))
    throw std::invalid_argument("sphere_point: dimension too large");
  Vec x(dim);
  double n2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    double u = halton(index + 1, kHaltonBases[i]) + shift[i];
    u -= std::floor(u);
    u = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
    x[i] = inv_normal_cdf(u);
    n2 += x[i] * x[i];
  }
  double inv = 1.0 / std::sqrt(n2);
  for (double& c : x) c *= inv;
  return x;
}

void gauss_legendre(int n, Vec& nodes, Vec& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

CompiledPoly CompiledPoly::from(const Polynomial& p) {
  CompiledPoly cp;
  cp.nv = p.num_vars();
  for (const auto& [e, c] : p.terms()) {
    Term t;
    t.c = c.to_double();
    t.e.assign(e.begin(), e.end());
    for (auto d : e) cp.max_deg = std::max(cp.max_deg, static_cast<int>(d));
    cp.terms.push_back(std::move(t));
  }
  return cp;
}

double CompiledPoly::eval(const double* x) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.c;
    for (int i = 0; i < nv; ++i) {
      double b = x[i];
      std::uint32_t e = t.e[i];
      while (e) {
        if (e & 1u) v *= b;
        b *= b;
        e >>= 1u;
      }
    }
    acc += v;
  }
  return acc;
}

CompiledMap CompiledMap::from(const PolynomialMap& m) {
  CompiledMap cm;
  cm.dim_in = m.domain_dim;
  cm.dim_out = static_cast<int>(m.components.size());
  for (const auto& c : m.components) cm.f.push_back(CompiledPoly::from(c));
  PolyMatrix j = jacobian(m);
  for (const auto& e : j.entries) cm.jac.push_back(CompiledPoly::from(e));
  return cm;
}

void CompiledMap::eval(const double* x, double* out) const {
  for (int i = 0; i < dim_out; ++i) out[i] = f[i].eval(x);
}

void CompiledMap::eval_jac(const double* x, double* out, double* j) const {
  eval(x, out);
  for (int i = 0; i < dim_out * dim_in; ++i) j[i] = jac[i].eval(x);
}

void parallel_chunks(std::uint64_t total, std::uint64_t chunk, int threads,
                     const std::function<void(int, std::uint64_t, std::uint64_t)>& fn) {
  if (total == 0) return;
  const int nchunks = static_cast<int>((total + chunk - 1) / chunk);
  threads = std::max(1, std::min(threads, nchunks));
  if (threads == 1) {
    for (int c = 0; c < nchunks; ++c)
      fn(c, static_cast<std::uint64_t>(c) * chunk,
         std::min(total, (static_cast<std::uint64_t>(c) + 1) * chunk));
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c, static_cast<std::uint64_t>(c) * chunk,
         std::min(total, (static_cast<std::uint64_t>(c) + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

int default_thread_count() {
  if (const char* env = std::getenv("WHITNEY_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

}  // namespace whitney
