#include "whitney/degree.hpp"

#include "square_system.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace whitney {

std::string to_string(DegreeMethod m) {
  return m == DegreeMethod::preimage_count ? "preimage_count" : "kronecker_integral";
}

AuxiliaryMap build_auxiliary_map(const PolynomialMap& g, const Rational& t, int alpha) {
  const int comps = static_cast<int>(g.components.size());
  if (comps == 0 || comps % 4 != 0 || g.domain_dim != comps / 2 + 1)
    throw std::invalid_argument(
        "build_auxiliary_map: need 2n components over n+1 variables with n even");
  if (t.is_zero()) throw std::invalid_argument("build_auxiliary_map: t must be nonzero");
  if (alpha < 2 || alpha % 2 != 0)
    throw std::invalid_argument("build_auxiliary_map: alpha must be an even integer >= 2");

  const int v = g.domain_dim;  // n + 1
  const int m = 2 * v;         // 2n + 2

  Polynomial sum_x2(m), sum_y2(m), delta(m);
  for (int i = 0; i < v; ++i) {
    Polynomial xi = Polynomial::variable(m, i);
    Polynomial yi = Polynomial::variable(m, v + i);
    sum_x2 += xi * xi;
    sum_y2 += yi * yi;
    Polynomial di = xi - yi;
    delta += di * di;
  }
  Polynomial dist2 = sum_x2 + sum_y2;

  std::vector<Polynomial> components;
  components.reserve(m);
  components.push_back(sum_x2 - sum_y2);
  components.push_back(delta - dist2.pow(static_cast<unsigned>(alpha)).scaled(t));

  std::vector<Polynomial> ximg, yimg;
  for (int i = 0; i < v; ++i) ximg.push_back(Polynomial::variable(m, i));
  for (int i = 0; i < v; ++i) yimg.push_back(Polynomial::variable(m, v + i));
  for (const auto& gi : g.components)
    components.push_back(gi.substitute(ximg) - gi.substitute(yimg));

  AuxiliaryMap aux;
  aux.t = t;
  aux.alpha = alpha;
  aux.base = g;
  aux.assembled = PolynomialMap(m, std::move(components));
  aux.dim = m;
  return aux;
}

namespace {

using detail::NewtonOutcome;

constexpr int kMaxDim = detail::kMaxSystemDim;

// Halton bases for the two sphere blocks of the stratified rule (base 2 is
// reserved for the join coordinate).
constexpr std::uint32_t kStratBases[] = {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

// ---------------------------------------------------------------------------
// component-normalized square-map evaluators
//
// Scaling each component by a positive constant changes neither the zero set
// nor the sign of the Jacobian determinant, hence no degree; it keeps every
// residual and threshold dimensionless at the working radius.
// ---------------------------------------------------------------------------

using ScaledEval = detail::SquareSystemEval;

struct CompiledScaledEval final : ScaledEval {
  std::shared_ptr<const CompiledMap> cm;
  std::vector<double> inv_scale;

  void eval(const double* w, double* f) const override {
    cm->eval(w, f);
    for (int i = 0; i < m; ++i) f[i] *= inv_scale[i];
  }
  void eval_jac(const double* w, double* f, double* j) const override {
    cm->eval_jac(w, f, j);
    for (int i = 0; i < m; ++i) {
      f[i] *= inv_scale[i];
      for (int k = 0; k < m; ++k) j[i * m + k] *= inv_scale[i];
    }
  }
};

// Structural evaluator for the auxiliary map: the power |(x,y)|^(2 alpha) is
// evaluated by exponentiation instead of through its dense expansion.
struct AuxScaledEval final : ScaledEval {
  int v = 0;  // n + 1
  int ng = 0; // 2n
  double t = 0.0;
  int alpha = 2;
  std::shared_ptr<const CompiledMap> g;
  std::vector<double> inv_scale;

  void eval(const double* w, double* f) const override { evaluate(w, f, nullptr); }
  void eval_jac(const double* w, double* f, double* j) const override { evaluate(w, f, j); }

  void evaluate(const double* w, double* f, double* j) const {
    const double* x = w;
    const double* y = w + v;
    double sx2 = 0, sy2 = 0, delta = 0;
    for (int i = 0; i < v; ++i) {
      sx2 += x[i] * x[i];
      sy2 += y[i] * y[i];
      double d = x[i] - y[i];
      delta += d * d;
    }
    double d2 = sx2 + sy2;
    double dpow = 1.0;  // d2^(alpha-1)
    for (int k = 0; k + 1 < alpha; ++k) dpow *= d2;

    double gx[2 * kMaxDim], gy[2 * kMaxDim];
    double jx[2 * kMaxDim * kMaxDim], jy[2 * kMaxDim * kMaxDim];
    if (j) {
      g->eval_jac(x, gx, jx);
      g->eval_jac(y, gy, jy);
    } else {
      g->eval(x, gx);
      g->eval(y, gy);
    }

    f[0] = (sx2 - sy2) * inv_scale[0];
    f[1] = (delta - t * dpow * d2) * inv_scale[1];
    for (int i = 0; i < ng; ++i) f[2 + i] = (gx[i] - gy[i]) * inv_scale[2 + i];

    if (!j) return;
    const int m = this->m;
    double dfac = t * alpha * dpow;  // d/dw of t*d2^alpha = dfac * 2 w
    for (int i = 0; i < v; ++i) {
      j[0 * m + i] = 2 * x[i] * inv_scale[0];
      j[0 * m + v + i] = -2 * y[i] * inv_scale[0];
      double dd = 2 * (x[i] - y[i]);
      j[1 * m + i] = (dd - dfac * 2 * x[i]) * inv_scale[1];
      j[1 * m + v + i] = (-dd - dfac * 2 * y[i]) * inv_scale[1];
    }
    for (int i = 0; i < ng; ++i)
      for (int k = 0; k < v; ++k) {
        j[(2 + i) * m + k] = jx[i * v + k] * inv_scale[2 + i];
        j[(2 + i) * m + v + k] = -jy[i * v + k] * inv_scale[2 + i];
      }
  }
};

// Factory producing a normalized evaluator for each working radius (the
// normalization constants depend on the radius).
struct EvalFactory {
  int m = 0;
  std::vector<Polynomial> component_polys;  // for scales
  std::function<std::unique_ptr<ScaledEval>(const std::vector<double>& inv_scale)> instantiate;

  // auxiliary-map structure, when known: drives the stratified quadrature
  bool aux_structure = false;
  double t_abs = 0.0;
  int alpha = 0;

  std::unique_ptr<ScaledEval> make(double radius) const {
    std::vector<double> inv(component_polys.size());
    for (std::size_t i = 0; i < component_polys.size(); ++i) {
      double s = component_polys[i].coefficient_scale(radius);
      inv[i] = s > 0 ? 1.0 / s : 1.0;
    }
    return instantiate(inv);
  }
};

EvalFactory factory_from(const PolynomialMap& h) {
  const int m = static_cast<int>(h.components.size());
  if (h.domain_dim != m)
    throw std::invalid_argument("degree: map must be square (m components over m variables)");
  if (m < 2 || m > kMaxDim) throw std::invalid_argument("degree: unsupported dimension");
  EvalFactory fac;
  fac.m = m;
  fac.component_polys = h.components;
  auto cm = std::make_shared<CompiledMap>(CompiledMap::from(h));
  fac.instantiate = [m, cm](const std::vector<double>& inv) {
    auto ev = std::make_unique<CompiledScaledEval>();
    ev->m = m;
    ev->cm = cm;
    ev->inv_scale = inv;
    return ev;
  };
  return fac;
}

EvalFactory factory_from(const AuxiliaryMap& h) {
  EvalFactory fac;
  fac.m = h.dim;
  fac.component_polys = h.assembled.components;
  fac.aux_structure = true;
  fac.t_abs = std::abs(h.t.to_double());
  fac.alpha = h.alpha;
  auto cg = std::make_shared<CompiledMap>(CompiledMap::from(h.base));
  const int v = h.base.domain_dim;
  const int ng = static_cast<int>(h.base.components.size());
  const double t = h.t.to_double();
  const int alpha = h.alpha;
  const int m = h.dim;
  fac.instantiate = [=](const std::vector<double>& inv) {
    auto ev = std::make_unique<AuxScaledEval>();
    ev->m = m;
    ev->v = v;
    ev->ng = ng;
    ev->t = t;
    ev->alpha = alpha;
    ev->g = cg;
    ev->inv_scale = inv;
    return ev;
  };
  return fac;
}

// ---------------------------------------------------------------------------
// flat small-matrix helpers for the quadrature hot path
// ---------------------------------------------------------------------------

double det_inplace(double* a, int m) {
  double d = 1.0;
  for (int k = 0; k < m; ++k) {
    int piv = k;
    double best = std::abs(a[k * m + k]);
    for (int i = k + 1; i < m; ++i)
      if (std::abs(a[i * m + k]) > best) {
        best = std::abs(a[i * m + k]);
        piv = i;
      }
    if (best == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < m; ++j) std::swap(a[k * m + j], a[piv * m + j]);
      d = -d;
    }
    d *= a[k * m + k];
    for (int i = k + 1; i < m; ++i) {
      double l = a[i * m + k] / a[k * m + k];
      for (int j = k + 1; j < m; ++j) a[i * m + j] -= l * a[k * m + j];
    }
  }
  return d;
}

// orthonormal frame of u^perp with det[u, v_1 .. v_{m-1}] = +1, row-major into
// vs[(m-1) * m]
void tangent_frame_flat(const double* u, int m, double* vs) {
  if (u[0] > 1.0 - 1e-12) {
    for (int k = 0; k < m - 1; ++k)
      for (int i = 0; i < m; ++i) vs[k * m + i] = (i == k + 1) ? 1.0 : 0.0;
    return;
  }
  double w[kMaxDim];
  double nw2 = 0;
  for (int i = 0; i < m; ++i) {
    w[i] = u[i] - (i == 0 ? 1.0 : 0.0);
    nw2 += w[i] * w[i];
  }
  for (int k = 0; k < m - 1; ++k) {
    double f = 2.0 * w[k + 1] / nw2;
    for (int i = 0; i < m; ++i) vs[k * m + i] = (i == k + 1 ? 1.0 : 0.0) - f * w[i];
  }
  for (int i = 0; i < m; ++i) vs[(m - 2) * m + i] = -vs[(m - 2) * m + i];
}

// pullback density of the normalized-target volume under w -> F(w)/|F(w)|,
// with respect to the surface measure of the domain sphere
double kronecker_integrand(const ScaledEval& ev, const double* x, double radius) {
  const int m = ev.m;
  double f[kMaxDim], jac[kMaxDim * kMaxDim];
  ev.eval_jac(x, f, jac);
  double n2 = 0;
  for (int i = 0; i < m; ++i) n2 += f[i] * f[i];
  if (n2 == 0.0) return std::numeric_limits<double>::quiet_NaN();

  double u[kMaxDim];
  for (int i = 0; i < m; ++i) u[i] = x[i] / radius;
  double vs[kMaxDim * kMaxDim];
  tangent_frame_flat(u, m, vs);

  double col[kMaxDim * kMaxDim];  // row-major matrix whose columns are F, J v_k
  for (int i = 0; i < m; ++i) col[i * m + 0] = f[i];
  for (int k = 0; k < m - 1; ++k)
    for (int i = 0; i < m; ++i) {
      double acc = 0;
      for (int j = 0; j < m; ++j) acc += jac[i * m + j] * vs[k * m + j];
      col[i * m + k + 1] = acc;
    }
  double d = det_inplace(col, m);
  return d / std::pow(std::sqrt(n2), m);
}

double unit_sphere_area(int m) {  // area of S^{m-1}
  return 2.0 * std::pow(M_PI, m / 2.0) / std::tgamma(m / 2.0);
}

// ---------------------------------------------------------------------------
// sphere precheck: sampled-and-polished minimum of |F| on the sphere
// ---------------------------------------------------------------------------

struct SpherePrecheck {
  double min_norm = 0.0;
  double max_norm = 0.0;
  Vec argmin;
  std::vector<Vec> worst;  // ascending by |F|, up to n_worst points
};

double norm_at(const ScaledEval& ev, const double* x) {
  double f[kMaxDim];
  ev.eval(x, f);
  double n2 = 0;
  for (int i = 0; i < ev.m; ++i) n2 += f[i] * f[i];
  return std::sqrt(n2);
}

Vec polish_min_norm(const ScaledEval& ev, Vec x, double r, int iters) {
  const int m = ev.m;
  double f[kMaxDim], jac[kMaxDim * kMaxDim];
  Vec grad(m), trial(m);
  auto objective = [&](const Vec& p, Vec* g) {
    ev.eval_jac(p.data(), f, jac);
    double val = 0;
    for (int i = 0; i < m; ++i) val += f[i] * f[i];
    if (g) {
      g->assign(m, 0.0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) (*g)[j] += 2 * f[i] * jac[i * m + j];
    }
    return val;
  };
  double val = objective(x, &grad);
  double step = 0.05 * r;
  for (int it = 0; it < iters; ++it) {
    double proj = dot(grad, x) / (r * r);
    Vec t(m);
    double tn = 0;
    for (int i = 0; i < m; ++i) {
      t[i] = grad[i] - proj * x[i];
      tn += t[i] * t[i];
    }
    tn = std::sqrt(tn);
    if (tn < 1e-300) break;
    bool ok = false;
    for (int bt = 0; bt < 20; ++bt) {
      double n2 = 0;
      for (int i = 0; i < m; ++i) {
        trial[i] = x[i] - step * t[i] / tn;
        n2 += trial[i] * trial[i];
      }
      double sc = r / std::sqrt(n2);
      for (int i = 0; i < m; ++i) trial[i] *= sc;
      double vt = objective(trial, nullptr);
      if (vt < val) {
        x = trial;
        val = objective(x, &grad);
        step *= 1.6;
        ok = true;
        break;
      }
      step *= 0.4;
    }
    if (!ok && step < 1e-18 * r) break;
  }
  return x;
}

SpherePrecheck precheck_sphere(const ScaledEval& ev, double r, const DegreeConfig& cfg,
                               int threads, int n_polish, int n_worst) {
  const int m = ev.m;
  const std::uint64_t n = cfg.min_norm_samples;
  Vec shift = halton_shift(m, cfg.seed ^ 0xa5a5a5a5ull);
  std::vector<double> norms(n);
  parallel_chunks(n, 512, threads, [&](int, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i) {
      Vec p = sphere_point(m, i, shift);
      for (double& c : p) c *= r;
      norms[i] = norm_at(ev, p.data());
    }
  });
  std::vector<std::uint64_t> order(n);
  for (std::uint64_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return norms[a] != norms[b] ? norms[a] < norms[b] : a < b;
  });

  SpherePrecheck pc;
  pc.max_norm = norms[order[n - 1]];
  pc.min_norm = norms[order[0]];
  {
    Vec p = sphere_point(m, order[0], shift);
    for (double& c : p) c *= r;
    pc.argmin = p;
  }
  for (int k = 0; k < n_worst && k < static_cast<int>(n); ++k) {
    Vec p = sphere_point(m, order[k], shift);
    for (double& c : p) c *= r;
    pc.worst.push_back(std::move(p));
  }
  std::vector<Vec> polished(std::min<std::uint64_t>(n_polish, n));
  parallel_chunks(polished.size(), 2, threads, [&](int, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i) {
      Vec p = sphere_point(m, order[i], shift);
      for (double& c : p) c *= r;
      polished[i] = polish_min_norm(ev, std::move(p), r, 60);
    }
  });
  for (const auto& p : polished) {
    double v = norm_at(ev, p.data());
    if (v < pc.min_norm) {
      pc.min_norm = v;
      pc.argmin = p;
    }
  }
  return pc;
}

// ---------------------------------------------------------------------------
// preimage counting
// ---------------------------------------------------------------------------

struct Cluster {
  Vec x;
  double residual = 0.0;
  int sign = 0;
  double det = 0.0;
};

DegreeResult degree_preimage(const EvalFactory& fac, double r, const DegreeConfig& cfg) {
  DegreeResult res;
  res.method = DegreeMethod::preimage_count;
  res.radius = r;
  const int m = fac.m;
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  auto ev = fac.make(r);

  SpherePrecheck pc = precheck_sphere(*ev, r, cfg, threads, 8, 64);
  res.min_norm_on_sphere = pc.min_norm;
  if (pc.min_norm < cfg.zero_on_sphere_threshold) {
    res.error = "map has (numerically) a zero on the search sphere";
    return res;
  }

  SplitMix64 zrng(cfg.seed ^ 0x5eedf00dull);
  std::string last_error = "regular value draws exhausted";
  for (int draw = 0; draw <= cfg.max_value_redraws; ++draw) {
    Vec z(m);
    double n2 = 0;
    for (int i = 0; i < m; ++i) {
      z[i] = zrng.normal();
      n2 += z[i] * z[i];
    }
    double zf = cfg.regular_value_factor * pc.min_norm / std::sqrt(n2);
    for (double& c : z) c *= zf;

    // multi-start Newton; start set mixes ball coverage, shrinking scales and
    // the worst sphere samples
    Vec shift = halton_shift(m, cfg.seed ^ 0xbeefull);
    static const double kScaleTable[8] = {-1.0, 0.7, 0.45, -1.0, 0.25, 0.12, -1.0, 0.05};
    auto start_point = [&](std::uint64_t i) -> Vec {
      if (i < pc.worst.size()) return pc.worst[i];
      Vec dir = sphere_point(m, i, shift);
      double frac = kScaleTable[i % 8];
      if (frac < 0) {
        double u = halton(i + 1, 17);
        frac = 0.98 * std::pow(u, 1.0 / m);
      }
      for (double& c : dir) c *= frac * r;
      return dir;
    };

    std::vector<Cluster> clusters;
    bool degenerate_root = false, ambiguous = false;
    std::size_t prev_count = 0;
    int rounds_stable = 0;
    std::uint64_t next_start = 0;
    int round = 0;
    for (; round < 4; ++round) {
      std::uint64_t batch = static_cast<std::uint64_t>(cfg.newton_starts);
      std::vector<NewtonOutcome> outs(batch);
      parallel_chunks(batch, 16, threads, [&](int, std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t i = b; i < e; ++i)
          outs[i] = detail::newton_solve(*ev, start_point(next_start + i), z,
                                         cfg.newton_tol, cfg.newton_max_iters, 3.0 * r);
      });
      next_start += batch;
      res.starts_used = static_cast<int>(next_start);
      for (auto& o : outs) {
        if (!o.converged) continue;
        ++res.converged;
        if (norm(o.x) >= r * (1.0 - 1e-12)) continue;  // preimage outside the open ball
        bool merged = false;
        for (auto& c : clusters) {
          if (dist(c.x, o.x) < cfg.cluster_radius) {
            if (o.residual < c.residual) {
              c.x = o.x;
              c.residual = o.residual;
            }
            merged = true;
            break;
          }
        }
        if (!merged) clusters.push_back({o.x, o.residual, 0, 0.0});
      }
      if (clusters.size() == prev_count)
        ++rounds_stable;
      else
        rounds_stable = 0;
      prev_count = clusters.size();
      if (rounds_stable >= 1 && round >= 1) break;
    }
    if (rounds_stable < 1) {
      last_error = "root enumeration did not stabilize under start doubling";
      continue;
    }

    // classify clusters; the nondegeneracy test compares the determinant with
    // the Hadamard bound of the Jacobian rows, so it is invariant under row
    // and coordinate scaling
    double fbuf[kMaxDim], jbuf[kMaxDim * kMaxDim];
    for (auto& c : clusters) {
      ev->eval_jac(c.x.data(), fbuf, jbuf);
      double hadamard = 1.0;
      for (int i = 0; i < m; ++i) {
        double rn = 0;
        for (int j = 0; j < m; ++j) rn += jbuf[i * m + j] * jbuf[i * m + j];
        hadamard *= std::sqrt(rn);
      }
      Mat jm(m, m);
      for (int i = 0; i < m * m; ++i) jm.a[i] = jbuf[i];
      c.det = lu_det(lu_factor(std::move(jm)));
      if (std::abs(c.det) < cfg.min_det_threshold * hadamard) {
        degenerate_root = true;
        break;
      }
      c.sign = c.det > 0 ? 1 : -1;
    }
    if (degenerate_root) {
      last_error = "regular value hit a near-critical preimage";
      continue;
    }
    for (std::size_t a = 0; a < clusters.size() && !ambiguous; ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b)
        if (clusters[a].sign != clusters[b].sign &&
            dist(clusters[a].x, clusters[b].x) < 4.0 * cfg.cluster_radius) {
          ambiguous = true;
          break;
        }
    if (ambiguous) {
      res.error = "opposite-sign preimages within the cluster radius; refusing to guess";
      return res;
    }

    res.regular_value = z;
    int total = 0;
    for (const auto& c : clusters) {
      total += c.sign;
      res.preimages.push_back({c.x, c.sign, c.det, c.residual});
    }
    res.value = total;
    res.ok = true;
    return res;
  }
  res.error = last_error;
  return res;
}

// ---------------------------------------------------------------------------
// Kronecker integral
// ---------------------------------------------------------------------------

struct QuadratureSum {
  double integral = 0.0;  // integral of the pullback density over the sphere
};

QuadratureSum kronecker_sum_m2(const ScaledEval& ev, double r, int n, int threads) {
  std::vector<double> partial((n + 255) / 256, 0.0);
  parallel_chunks(n, 256, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
    double s = 0;
    for (std::uint64_t k = b; k < e; ++k) {
      double th = 2.0 * M_PI * static_cast<double>(k) / n;
      double x[2] = {r * std::cos(th), r * std::sin(th)};
      s += kronecker_integrand(ev, x, r);
    }
    partial[c] = s;
  });
  double acc = 0;
  for (double p : partial) acc += p;
  return {acc * (2.0 * M_PI / n) * r};
}

QuadratureSum kronecker_sum_m3(const ScaledEval& ev, double r, int nu, int threads) {
  Vec un, uw;
  gauss_legendre(nu, un, uw);
  const int nphi = 2 * nu;
  const std::uint64_t total = static_cast<std::uint64_t>(nu) * nphi;
  std::vector<double> partial((total + 255) / 256, 0.0);
  parallel_chunks(total, 256, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
    double s = 0;
    for (std::uint64_t k = b; k < e; ++k) {
      int iu = static_cast<int>(k / nphi);
      int ip = static_cast<int>(k % nphi);
      double u = un[iu], w = uw[iu];
      double rho = std::sqrt(std::max(0.0, 1.0 - u * u));
      double phi = 2.0 * M_PI * ip / nphi;
      double x[3] = {r * rho * std::cos(phi), r * rho * std::sin(phi), r * u};
      s += w * kronecker_integrand(ev, x, r);
    }
    partial[c] = s;
  });
  double acc = 0;
  for (double p : partial) acc += p;
  return {acc * (2.0 * M_PI / nphi) * r * r};
}

QuadratureSum kronecker_sum_m4(const ScaledEval& ev, double r, int nu, int threads) {
  Vec un, uw;
  gauss_legendre(nu, un, uw);
  const int nphi = 2 * nu;
  const std::uint64_t total = static_cast<std::uint64_t>(nu) * nu * nphi;
  std::vector<double> partial((total + 255) / 256, 0.0);
  parallel_chunks(total, 256, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
    double s = 0;
    for (std::uint64_t k = b; k < e; ++k) {
      int i1 = static_cast<int>(k / (static_cast<std::uint64_t>(nu) * nphi));
      int rem = static_cast<int>(k % (static_cast<std::uint64_t>(nu) * nphi));
      int i2 = rem / nphi;
      int ip = rem % nphi;
      double u1 = un[i1], w1 = uw[i1];
      double u2 = un[i2], w2 = uw[i2];
      double s1 = std::sqrt(std::max(0.0, 1.0 - u1 * u1));
      double s2 = std::sqrt(std::max(0.0, 1.0 - u2 * u2));
      double phi = 2.0 * M_PI * ip / nphi;
      double x[4] = {r * s1 * s2 * std::cos(phi), r * s1 * s2 * std::sin(phi), r * s1 * u2,
                     r * u1};
      s += w1 * w2 * s1 * kronecker_integrand(ev, x, r);
    }
    partial[c] = s;
  });
  double acc = 0;
  for (double p : partial) acc += p;
  return {acc * (2.0 * M_PI / nphi) * r * r * r};
}

QuadratureSum kronecker_sum_mc(const ScaledEval& ev, double r, std::uint64_t samples,
                               std::uint64_t seed, int threads) {
  const int m = ev.m;
  Vec shift = halton_shift(m, seed ^ 0xc0ffeeull);
  std::vector<double> partial((samples + 4095) / 4096, 0.0);
  parallel_chunks(samples, 4096, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
    double s = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      Vec p = sphere_point(m, i, shift);
      for (double& v : p) v *= r;
      s += kronecker_integrand(ev, p.data(), r);
    }
    partial[c] = s;
  });
  double acc = 0;
  for (double p : partial) acc += p;
  double area = unit_sphere_area(m) * std::pow(r, m - 1);
  return {acc / static_cast<double>(samples) * area};
}

// Stratified rule for auxiliary maps on S^{m-1}(r), m = 2v. Writing a point
// as (x, y) = (c + e, c - e), uniform measure on the sphere factors through
// the join coordinate u = |e|^2 / rho^2 (rho = r / sqrt(2)) as
//   dsigma = rho^{m-1} (u (1 - u))^{(v-2)/2} / 2 du dS(c-hat) dS(e-hat).
// The pullback density is singular along thin u-layers: around the
// delta = t d^alpha transition at u* = |t| r^(2 alpha - 2) / 2 and toward the
// antipodal end u = 1 where the self-intersection pairs live. Both layers are
// resolved by grading strata in u; within a layer the integrand is mild.
QuadratureSum kronecker_sum_aux(const ScaledEval& ev, int v, double r, double u_star,
                                std::uint64_t samples, std::uint64_t seed, int threads) {
  const int m = 2 * v;
  const double rho = r / std::sqrt(2.0);
  const double join_exp = 0.5 * (v - 2);
  // (c, e) coordinates live on the sphere of radius rho = r / sqrt(2); the
  // pullback of the S^{m-1}(r) area element carries the factor
  // (sqrt 2)^{m-1}, so the area prefactor is r^{m-1}, not rho^{m-1}.
  const double sphere_area = unit_sphere_area(v);
  const double prefactor = sphere_area * sphere_area * std::pow(r, m - 1);

  struct Stratum {
    double ulo = 0, uhi = 0;
    std::uint64_t n = 0;
    double contrib = 0, err = 0;
  };

  // contribution and interleaved-half error estimate of one stratum
  auto sample_stratum = [&](Stratum& st, std::uint64_t salt) {
    Vec shift = halton_shift(2 * v + 1, seed ^ (0x517a1ull * (salt + 1)));
    const std::uint64_t n = st.n;
    const std::size_t nchunk = (n + 4095) / 4096;
    std::vector<double> part_even(nchunk, 0.0), part_odd(nchunk, 0.0);
    parallel_chunks(n, 4096, threads, [&](int c, std::uint64_t b, std::uint64_t e) {
      Vec w(m);
      double acc_even = 0, acc_odd = 0;
      for (std::uint64_t i = b; i < e; ++i) {
        double uu = halton(i + 1, 2) + shift[2 * v];
        uu -= std::floor(uu);
        double u = st.ulo + (st.uhi - st.ulo) * uu;
        double nc = 0, ne = 0;
        double chat[kMaxDim], ehat[kMaxDim];
        for (int k = 0; k < v; ++k) {
          double a = halton(i + 1, kStratBases[k]) + shift[k];
          a -= std::floor(a);
          chat[k] = inv_normal_cdf(std::min(std::max(a, 1e-15), 1.0 - 1e-15));
          nc += chat[k] * chat[k];
          double bq = halton(i + 1, kStratBases[v + k]) + shift[v + k];
          bq -= std::floor(bq);
          ehat[k] = inv_normal_cdf(std::min(std::max(bq, 1e-15), 1.0 - 1e-15));
          ne += ehat[k] * ehat[k];
        }
        nc = std::sqrt(nc);
        ne = std::sqrt(ne);
        double cs = rho * std::sqrt(std::max(0.0, 1.0 - u)) / nc;
        double es = rho * std::sqrt(u) / ne;
        for (int k = 0; k < v; ++k) {
          double cc = cs * chat[k], ee = es * ehat[k];
          w[k] = cc + ee;
          w[v + k] = cc - ee;
        }
        double dens = 0.5 * std::pow(std::max(u * (1.0 - u), 0.0), join_exp);
        double val = dens * kronecker_integrand(ev, w.data(), r);
        if (i & 1ull)
          acc_odd += val;
        else
          acc_even += val;
      }
      part_even[c] = acc_even;
      part_odd[c] = acc_odd;
    });
    double se = 0, so = 0;
    for (std::size_t c = 0; c < nchunk; ++c) {
      se += part_even[c];
      so += part_odd[c];
    }
    const double span = st.uhi - st.ulo;
    double half_even = span * se / (static_cast<double>(n) / 2.0) * prefactor;
    double half_odd = span * so / (n - static_cast<double>(n) / 2.0) * prefactor;
    st.contrib = 0.5 * (half_even + half_odd);
    st.err = 0.5 * std::abs(half_even - half_odd);
  };

  // initial grading: geometric fan around the delta = |t| d^alpha transition
  // plus refinement toward the antipodal end
  std::vector<double> edges = {0.0};
  if (u_star > 1e-12 && u_star < 0.45) {
    static const double kFan[] = {0.125, 0.25, 0.5,  0.75, 0.875, 1.0, 1.125,
                                  1.25,  1.5,  2.0,  3.0,  5.0,   9.0};
    for (double f : kFan)
      if (u_star * f < 0.45) edges.push_back(u_star * f);
  }
  for (double u : {0.45, 0.6, 0.75, 0.85, 0.92, 0.96, 0.985, 1.0}) edges.push_back(u);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Stratum> strata;
  double wsum = 0;
  std::vector<double> weight;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    double w = 1.0;
    if (u_star > 1e-12 && edges[s + 1] > 0.4 * u_star && edges[s] < 2.5 * u_star) w = 6.0;
    if (s + 3 >= edges.size() - 1) w = 6.0;
    weight.push_back(w);
    wsum += w;
  }
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    Stratum st;
    st.ulo = edges[s];
    st.uhi = edges[s + 1];
    st.n = std::max<std::uint64_t>(
        512, static_cast<std::uint64_t>(samples * (weight[s] / wsum)) & ~1ull);
    strata.push_back(st);
  }

  std::uint64_t salt = 0;
  std::uint64_t spent = 0;
  for (auto& st : strata) {
    sample_stratum(st, salt++);
    spent += st.n;
  }

  // deterministic adaptive refinement: split the stratum with the largest
  // half-sample discrepancy until the aggregate estimate is trustworthy
  const std::uint64_t budget_cap = 4 * samples;
  for (int round = 0; round < 40; ++round) {
    double total_err = 0;
    std::size_t worst = 0;
    for (std::size_t s = 0; s < strata.size(); ++s) {
      total_err += strata[s].err;
      if (strata[s].err > strata[worst].err) worst = s;
    }
    // total_err is in integral units; 0.05 in degree units
    if (total_err < 0.05 * unit_sphere_area(m) || spent + 2 * strata[worst].n > budget_cap)
      break;
    Stratum lo = strata[worst], hi = strata[worst];
    double mid = 0.5 * (strata[worst].ulo + strata[worst].uhi);
    lo.uhi = mid;
    hi.ulo = mid;
    lo.n = hi.n = std::max<std::uint64_t>(512, strata[worst].n & ~1ull);
    sample_stratum(lo, salt++);
    sample_stratum(hi, salt++);
    spent += lo.n + hi.n;
    strata[worst] = lo;
    strata.push_back(hi);
  }

  double integral = 0;
  for (const auto& st : strata) integral += st.contrib;
  return {integral};
}

DegreeResult degree_kronecker(const EvalFactory& fac, double r, const DegreeConfig& cfg) {
  DegreeResult res;
  res.method = DegreeMethod::kronecker_integral;
  res.radius = r;
  const int m = fac.m;
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  auto ev = fac.make(r);

  SpherePrecheck pc = precheck_sphere(*ev, r, cfg, threads, 8, 0);
  res.min_norm_on_sphere = pc.min_norm;
  if (pc.min_norm < cfg.zero_on_sphere_threshold) {
    res.error = "map has (numerically) a zero on the search sphere";
    return res;
  }

  const double omega = unit_sphere_area(m);
  std::uint64_t samples = cfg.mc_samples;
  std::uint64_t strat_samples = cfg.stratified_mc_samples;
  for (int attempt = 0; attempt < 2; ++attempt) {
    QuadratureSum q;
    switch (m) {
      case 2:
        q = kronecker_sum_m2(*ev, r, std::max(1024, cfg.gauss_points * cfg.gauss_points),
                             threads);
        break;
      case 3:
        q = kronecker_sum_m3(*ev, r, cfg.gauss_points, threads);
        break;
      case 4:
        q = kronecker_sum_m4(*ev, r, cfg.gauss_points, threads);
        break;
      default:
        if (fac.aux_structure && m % 2 == 0) {
          double u_star = 0.5 * fac.t_abs * std::pow(r, 2 * fac.alpha - 2);
          q = kronecker_sum_aux(*ev, m / 2, r, std::min(u_star, 1.0), strat_samples,
                                cfg.seed, threads);
        } else {
          q = kronecker_sum_mc(*ev, r, samples, cfg.seed, threads);
        }
        break;
    }
    res.quadrature_estimate = q.integral / omega;
    res.samples = (m <= 4) ? 0 : samples;
    double nearest = std::round(res.quadrature_estimate);
    res.snap_distance = std::abs(res.quadrature_estimate - nearest);
    if (std::isfinite(res.quadrature_estimate) && res.snap_distance < cfg.snap_tolerance) {
      res.value = static_cast<int>(nearest);
      res.ok = true;
      return res;
    }
    if (m <= 4) break;  // product rules get no second chance at the same order
    samples *= 4;        // one escalation for the sampled estimators
    strat_samples *= 4;
  }
  std::ostringstream os;
  os << "quadrature estimate " << res.quadrature_estimate
     << " is not integer-consistent (snap distance " << res.snap_distance << ")";
  res.error = os.str();
  return res;
}

DegreeResult degree_dispatch(const EvalFactory& fac, double r, DegreeMethod method,
                             const DegreeConfig& cfg) {
  if (!(r > 0)) {
    DegreeResult res;
    res.method = method;
    res.error = "radius must be positive";
    return res;
  }
  return method == DegreeMethod::preimage_count ? degree_preimage(fac, r, cfg)
                                                : degree_kronecker(fac, r, cfg);
}

// conditioning scan: pick the sphere radius where min|F|/max|F| is largest
double choose_anchor(const EvalFactory& fac, const DegreeConfig& cfg, double hint) {
  std::vector<double> candidates;
  if (hint > 0) {
    for (double f : {1.6, 1.0, 0.6, 0.35, 0.2}) candidates.push_back(hint * f);
  } else {
    for (double r = 4.0; r > 1.2e-3; r *= 0.55) candidates.push_back(r);
  }
  const int m = fac.m;
  Vec shift = halton_shift(m, cfg.seed ^ 0x7777ull);
  double best_r = candidates.front();
  double best_kappa = -1.0;
  for (double r : candidates) {
    auto ev = fac.make(r);
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (std::uint64_t i = 0; i < 512; ++i) {
      Vec p = sphere_point(m, i, shift);
      for (double& c : p) c *= r;
      double v = norm_at(*ev, p.data());
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    double kappa = mx > 0 ? mn / mx : 0.0;
    if (kappa > best_kappa) {
      best_kappa = kappa;
      best_r = r;
    }
  }
  return best_r;
}

LocalDegreeResult local_degree_impl(const EvalFactory& fac, const DegreeConfig& cfg,
                                    double anchor_hint) {
  LocalDegreeResult out;
  double r = choose_anchor(fac, cfg, anchor_hint);
  out.anchor_radius = r;

  // The isolated-zero premise is probed by sampling each schedule sphere
  // (every degree_on_sphere call rejects spheres that come close to a zero);
  // a zero strictly between schedule spheres would surface as disagreement
  // between consecutive radii.
  bool have_prev = false;
  int prev_value = 0;
  for (int stage = 0; stage < cfg.max_schedule; ++stage) {
    LocalDegreeStage st;
    st.radius = r;
    st.preimage = degree_dispatch(fac, r, DegreeMethod::preimage_count, cfg);
    st.kronecker = degree_dispatch(fac, r, DegreeMethod::kronecker_integral, cfg);
    bool stage_ok = st.preimage.ok && st.kronecker.ok && st.preimage.value == st.kronecker.value;
    int v = st.preimage.value;
    out.stages.push_back(std::move(st));
    if (stage_ok) {
      if (have_prev && prev_value == v) {
        out.ok = true;
        out.value = v;
        return out;
      }
      have_prev = true;
      prev_value = v;
    } else {
      have_prev = false;
    }
    r *= cfg.radius_shrink;
  }
  out.error = "degree did not stabilize across the radius schedule";
  return out;
}

}  // namespace

DegreeResult degree_on_sphere(const PolynomialMap& h, double radius, DegreeMethod method,
                              const DegreeConfig& cfg) {
  return degree_dispatch(factory_from(h), radius, method, cfg);
}

DegreeResult degree_on_sphere(const AuxiliaryMap& h, double radius, DegreeMethod method,
                              const DegreeConfig& cfg) {
  return degree_dispatch(factory_from(h), radius, method, cfg);
}

LocalDegreeResult local_degree_at_origin(const PolynomialMap& h, const DegreeConfig& cfg,
                                         double anchor_hint) {
  return local_degree_impl(factory_from(h), cfg, anchor_hint);
}

LocalDegreeResult local_degree_at_origin(const AuxiliaryMap& h, const DegreeConfig& cfg) {
  // Transition scale where |x - y|^2 can balance |t| |(x,y)|^(2 alpha) on
  // self-intersection pairs; every nonzero zero of the auxiliary map has norm
  // at most (2/|t|)^(1/(2 alpha - 2)), and the conditioning scan explores
  // radii safely below it.
  double t = std::abs(h.t.to_double());
  double hint = 0.4 * std::pow(2.0 / t, 1.0 / (2.0 * h.alpha - 2.0));
  return local_degree_impl(factory_from(h), cfg, hint);
}

IntersectionViaDegree intersection_number_via_degree(const PolynomialMap& g,
                                                     const DegreeConfig& cfg) {
  IntersectionViaDegree out;
  bool have_prev = false;
  int prev = 0;
  std::string last_error = "t schedule exhausted";
  for (const Rational& t : cfg.t_schedule) {
    bool t_ok = true;
    int dpos = 0, dneg = 0;
    bool first_alpha = true;
    for (int alpha : cfg.alpha_schedule) {
      AuxiliaryMap hp = build_auxiliary_map(g, t, alpha);
      AuxiliaryMap hn = build_auxiliary_map(g, -t, alpha);
      LocalDegreeResult lp = local_degree_at_origin(hp, cfg);
      LocalDegreeResult ln = local_degree_at_origin(hn, cfg);
      if (!lp.ok || !ln.ok) {
        t_ok = false;
        last_error = !lp.ok ? lp.error : ln.error;
        break;
      }
      out.evidence.push_back({t.to_double(), alpha, lp.value, ln.value});
      if (first_alpha) {
        dpos = lp.value;
        dneg = ln.value;
        first_alpha = false;
      } else if (lp.value != dpos || ln.value != dneg) {
        t_ok = false;
        last_error = "local degree not constant across the alpha schedule";
        break;
      }
    }
    if (t_ok) {
      if ((dpos + dneg) % 2 != 0) {
        t_ok = false;
        last_error = "odd degree sum; auxiliary-map degrees are inconsistent";
      }
    }
    if (t_ok) {
      int cand = (dpos + dneg) / 2;
      if (have_prev && cand == prev) {
        out.ok = true;
        out.value = cand;
        return out;
      }
      have_prev = true;
      prev = cand;
    } else {
      have_prev = false;
    }
  }
  out.error = "intersection number unstable across the t schedule: " + last_error;
  return out;
}

}  // namespace whitney
