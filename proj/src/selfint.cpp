#include "whitney/selfint.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "square_system.hpp"

namespace whitney {

namespace {

constexpr int kMaxDim = detail::kMaxSystemDim;

void validate_sphere_map(const PolynomialMap& g) {
  const int comps = static_cast<int>(g.components.size());
  if (comps == 0 || comps % 4 != 0 || g.domain_dim != comps / 2 + 1)
    throw std::invalid_argument(
        "selfint: need 2n components over n+1 variables with n even");
}

// normalized square system {g(x) - g(y), |x|^2 - r^2, |y|^2 - r^2}
struct PairSystemEval final : detail::SquareSystemEval {
  int v = 0;   // n + 1
  int ng = 0;  // 2n
  double r2 = 0.0;
  std::shared_ptr<const CompiledMap> g;
  std::vector<double> inv_scale;  // for the ng image components

  void eval(const double* w, double* f) const override { evaluate(w, f, nullptr); }
  void eval_jac(const double* w, double* f, double* j) const override { evaluate(w, f, j); }

  void evaluate(const double* w, double* f, double* j) const {
    const double* x = w;
    const double* y = w + v;
    double gx[2 * kMaxDim], gy[2 * kMaxDim];
    double jx[2 * kMaxDim * kMaxDim], jy[2 * kMaxDim * kMaxDim];
    if (j) {
      g->eval_jac(x, gx, jx);
      g->eval_jac(y, gy, jy);
    } else {
      g->eval(x, gx);
      g->eval(y, gy);
    }
    double sx2 = 0, sy2 = 0;
    for (int i = 0; i < v; ++i) {
      sx2 += x[i] * x[i];
      sy2 += y[i] * y[i];
    }
    for (int i = 0; i < ng; ++i) f[i] = (gx[i] - gy[i]) * inv_scale[i];
    f[ng] = (sx2 - r2) / r2;
    f[ng + 1] = (sy2 - r2) / r2;
    if (!j) return;
    const int m = this->m;
    for (int i = 0; i < ng; ++i)
      for (int k = 0; k < v; ++k) {
        j[i * m + k] = jx[i * v + k] * inv_scale[i];
        j[i * m + v + k] = -jy[i * v + k] * inv_scale[i];
      }
    for (int k = 0; k < v; ++k) {
      j[ng * m + k] = 2 * x[k] / r2;
      j[ng * m + v + k] = 0.0;
      j[(ng + 1) * m + k] = 0.0;
      j[(ng + 1) * m + v + k] = 2 * y[k] / r2;
    }
  }
};

PairSystemEval make_system(const PolynomialMap& g, double r) {
  PairSystemEval sys;
  sys.v = g.domain_dim;
  sys.ng = static_cast<int>(g.components.size());
  sys.m = sys.ng + 2;
  sys.r2 = r * r;
  sys.g = std::make_shared<CompiledMap>(CompiledMap::from(g));
  for (const auto& c : g.components) {
    double s = c.coefficient_scale(r);
    sys.inv_scale.push_back(s > 0 ? 1.0 / s : 1.0);
  }
  return sys;
}

// lexicographic order with a tolerance band so that solver noise in the
// leading coordinates cannot flip the canonical orientation of a pair
bool lex_less(const Vec& a, const Vec& b, double tol = 0.0) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - tol) return true;
    if (a[i] > b[i] + tol) return false;
  }
  return false;
}

double pair_distance(const SelfIntersectionPair& a, const Vec& p, const Vec& q) {
  double d2 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double dp = a.p[i] - p[i], dq = a.q[i] - q[i];
    d2 += dp * dp + dq * dq;
  }
  return std::sqrt(d2);
}

}  // namespace

std::vector<Vec> tangent_basis(const Vec& p) {
  double n = norm(p);
  if (!(n > 0)) throw std::invalid_argument("tangent_basis: zero point");
  Vec u(p);
  for (double& c : u) c /= n;
  return tangent_frame(u);
}

PairClassification classify_pair_with_bases(const PolynomialMap& g, const Vec& p, const Vec& q,
                                            const std::vector<Vec>& basis_p,
                                            const std::vector<Vec>& basis_q,
                                            const SelfIntersectConfig& cfg) {
  validate_sphere_map(g);
  const int v = g.domain_dim;
  const int n = v - 1;
  const int m = 2 * n;  // image dimension
  if (static_cast<int>(basis_p.size()) != n || static_cast<int>(basis_q.size()) != n)
    throw std::invalid_argument("classify_pair_with_bases: need n tangent vectors per point");
  PolyMatrix jac_poly = jacobian(g);

  Mat dp(m, v), dq(m, v);
  std::vector<double> pv(p.begin(), p.end()), qv(q.begin(), q.end());
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < v; ++k) {
      dp.at(i, k) = jac_poly.at(i, k).eval_double(pv);
      dq.at(i, k) = jac_poly.at(i, k).eval_double(qv);
    }

  Mat pairing(m, m);
  for (int col = 0; col < n; ++col)
    for (int i = 0; i < m; ++i) {
      double a = 0, b = 0;
      for (int k = 0; k < v; ++k) {
        a += dp.at(i, k) * basis_p[col][k];
        b += dq.at(i, k) * basis_q[col][k];
      }
      pairing.at(i, col) = a;
      pairing.at(i, n + col) = b;
    }

  PairClassification out;
  out.det = det(pairing);
  Vec sv = singular_values(pairing);
  out.condition = sv.back();
  double rel = sv.front() > 0 ? sv.back() / sv.front() : 0.0;
  out.regular = rel > cfg.regularity_threshold;
  out.sign = out.regular ? (out.det > 0 ? 1 : -1) : 0;
  return out;
}

PairClassification classify_pair(const PolynomialMap& g, const Vec& p, const Vec& q,
                                 const SelfIntersectConfig& cfg) {
  return classify_pair_with_bases(g, p, q, tangent_basis(p), tangent_basis(q), cfg);
}

std::vector<SelfIntersectionPair> find_self_intersections(const PolynomialMap& g, double r,
                                                          const SelfIntersectConfig& cfg,
                                                          SolverStats* stats_out) {
  validate_sphere_map(g);
  if (!(r > 0)) throw std::invalid_argument("find_self_intersections: radius must be positive");
  const int v = g.domain_dim;
  PairSystemEval sys = make_system(g, r);
  const int m = sys.m;
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();

  // one low-discrepancy point on S^{2v-1} splits into two independent sphere
  // directions after per-block normalization
  Vec shift = halton_shift(2 * v, cfg.seed ^ 0x5e1f1ull);
  auto start_point = [&](std::uint64_t i) {
    Vec h = sphere_point(2 * v, i, shift);
    double nx = 0, ny = 0;
    for (int k = 0; k < v; ++k) {
      nx += h[k] * h[k];
      ny += h[v + k] * h[v + k];
    }
    Vec w(2 * v);
    for (int k = 0; k < v; ++k) {
      w[k] = r * h[k] / std::sqrt(nx);
      w[v + k] = r * h[v + k] / std::sqrt(ny);
    }
    return w;
  };

  const Vec zero_target(m, 0.0);
  SolverStats stats;
  std::vector<SelfIntersectionPair> pairs;
  std::size_t prev_pairs = 0;
  int stable_rounds = 0;
  std::uint64_t next_start = 0;
  for (int round = 0; round < 4; ++round) {
    const std::uint64_t batch = static_cast<std::uint64_t>(cfg.newton_starts);
    std::vector<detail::NewtonOutcome> outs(batch);
    parallel_chunks(batch, 16, threads, [&](int, std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t i = b; i < e; ++i)
        outs[i] = detail::newton_solve(sys, start_point(next_start + i), zero_target,
                                       cfg.newton_tol, cfg.newton_max_iters, 4.0 * r);
    });
    next_start += batch;
    stats.starts = static_cast<int>(next_start);

    for (const auto& o : outs) {
      if (!o.converged) continue;
      ++stats.converged;
      Vec x(o.x.begin(), o.x.begin() + v);
      Vec y(o.x.begin() + v, o.x.end());
      double sep = dist(x, y);
      if (sep < cfg.near_diagonal_floor * r) {
        ++stats.diagonal_hits;
        continue;
      }
      if (sep < cfg.separation_factor * r) {
        ++stats.near_diagonal_suspicious;
        continue;
      }
      if (lex_less(y, x, 0.5 * cfg.separation_factor * r)) std::swap(x, y);
      bool merged = false;
      for (auto& pr : pairs) {
        if (pair_distance(pr, x, y) < cfg.cluster_radius_factor * r) {
          if (o.residual < pr.residual) {
            pr.p = x;
            pr.q = y;
            pr.residual = o.residual;
          }
          merged = true;
          break;
        }
      }
      if (!merged) {
        SelfIntersectionPair pr;
        pr.p = std::move(x);
        pr.q = std::move(y);
        pr.residual = o.residual;
        pairs.push_back(std::move(pr));
      }
    }

    if (pairs.size() == prev_pairs)
      ++stable_rounds;
    else
      stable_rounds = 0;
    prev_pairs = pairs.size();
    if (stable_rounds >= 1 && round >= 1) break;
  }
  stats.complete = stable_rounds >= 1;
  stats.deduped = static_cast<int>(pairs.size());

  std::sort(pairs.begin(), pairs.end(),
            [](const SelfIntersectionPair& a, const SelfIntersectionPair& b) {
              return lex_less(a.p, b.p) || (!lex_less(b.p, a.p) && lex_less(a.q, b.q));
            });
  if (stats_out) *stats_out = stats;
  return pairs;
}

IntersectionReport assemble_intersection_report(const PolynomialMap& g, double r,
                                                std::vector<SelfIntersectionPair> pairs,
                                                SolverStats stats,
                                                const SelfIntersectConfig& cfg) {
  IntersectionReport rep;
  rep.radius = r;
  rep.stats = stats;

  bool all_regular = true;
  for (auto& pr : pairs) {
    PairClassification cl = classify_pair(g, pr.p, pr.q, cfg);
    pr.regular = cl.regular;
    pr.sign = cl.sign;
    pr.condition = cl.condition;
    pr.det = cl.det;
    all_regular &= cl.regular;
  }

  // triple-point scan: cluster all endpoint images; three or more distinct
  // domain points over one image value break complete regularity
  double image_scale = 0.0;
  for (const auto& c : g.components) image_scale = std::max(image_scale, c.coefficient_scale(r));
  const double image_eps = cfg.triple_point_factor * std::max(image_scale, 1e-300);
  const double domain_eps = 10.0 * cfg.cluster_radius_factor * r;
  struct ImageCluster {
    Vec image;
    std::vector<Vec> points;
  };
  std::vector<ImageCluster> clusters;
  bool triple = false;
  auto add_point = [&](const Vec& pt) {
    std::vector<double> xv(pt.begin(), pt.end());
    Vec img = g.eval_double(xv);
    for (auto& cl : clusters) {
      if (dist(cl.image, img) < image_eps) {
        for (const auto& known : cl.points)
          if (dist(known, pt) < domain_eps) return;
        cl.points.push_back(pt);
        if (cl.points.size() >= 3) triple = true;
        return;
      }
    }
    clusters.push_back({img, {pt}});
  };
  for (const auto& pr : pairs) {
    add_point(pr.p);
    add_point(pr.q);
  }

  rep.pairs = std::move(pairs);
  rep.complete_regular = all_regular && !triple && stats.complete;
  auto add_note = [&](const char* msg) {
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += msg;
  };
  if (triple) add_note("triple point detected");
  if (!all_regular) add_note("irregular pair present");
  if (!stats.complete) add_note("pair enumeration not stable under budget doubling");
  if (rep.complete_regular) {
    int sum = 0;
    for (const auto& pr : rep.pairs) sum += pr.sign;
    rep.intersection_number = sum;
    rep.intersection_number_valid = true;
  }
  return rep;
}

IntersectionReport intersection_number_via_pairs(const PolynomialMap& g, double r,
                                                 const SelfIntersectConfig& cfg) {
  SolverStats stats;
  auto pairs = find_self_intersections(g, r, cfg, &stats);
  return assemble_intersection_report(g, r, std::move(pairs), stats, cfg);
}

RadiusStability radius_stability_check(const PolynomialMap& g, const std::vector<double>& radii,
                                       const SelfIntersectConfig& cfg) {
  RadiusStability out;
  for (double r : radii) {
    IntersectionReport rep = intersection_number_via_pairs(g, r, cfg);
    out.valid.push_back(rep.intersection_number_valid);
    out.values.push_back(rep.intersection_number);
  }
  out.stable = !out.values.empty();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (!out.valid[i] || out.values[i] != out.values[0]) out.stable = false;
  return out;
}

}  // namespace whitney
