#include "whitney/family.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace whitney {

FamilySpec make_family(PolynomialMap map, int p, std::vector<std::string> lambda_names) {
  const int comps = static_cast<int>(map.components.size());
  if (comps == 0 || comps % 4 != 0)
    throw std::invalid_argument("make_family: need 2n components with n even");
  const int n = comps / 2;
  if (map.domain_dim != n + 1 + p)
    throw std::invalid_argument("make_family: variable count must be n+1+p");
  if (p < 0) throw std::invalid_argument("make_family: negative parameter count");
  FamilySpec f;
  f.n = n;
  f.p = p;
  f.map = std::move(map);
  f.lambda_names = std::move(lambda_names);
  return f;
}

FamilySpec scaled_component_family(const PolynomialMap& g, int component_index) {
  if (component_index < 0 || component_index >= static_cast<int>(g.components.size()))
    throw std::invalid_argument("scaled_component_family: component index out of range");
  const int v = g.domain_dim;
  // lift to v+1 variables, parameter last
  std::vector<Polynomial> images;
  for (int i = 0; i < v; ++i) images.push_back(Polynomial::variable(v + 1, i));
  std::vector<Polynomial> comps;
  for (const auto& c : g.components) comps.push_back(c.substitute(images));
  comps[component_index] = comps[component_index] * Polynomial::variable(v + 1, v);
  return make_family(PolynomialMap(v + 1, std::move(comps)), 1, {"s"});
}

LambdaGrid tensor_grid(const std::vector<std::vector<Rational>>& axes) {
  LambdaGrid grid;
  grid.p = static_cast<int>(axes.size());
  grid.shape.clear();
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.empty()) throw std::invalid_argument("tensor_grid: empty axis");
    grid.shape.push_back(static_cast<int>(a.size()));
    total *= a.size();
  }
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<Rational> pt;
    std::size_t rem = idx;
    for (int d = grid.p - 1; d >= 0; --d) {
      pt.push_back(axes[d][rem % axes[d].size()]);
      rem /= axes[d].size();
    }
    std::reverse(pt.begin(), pt.end());
    grid.points.push_back(std::move(pt));
  }
  return grid;
}

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok:
      return "ok";
    case PointStatus::immersion_failed:
      return "immersion-failed";
    default:
      return "solver-failed";
  }
}

namespace {

// union-find over grid indices
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<std::vector<int>> connected_strata(const LambdaGrid& grid,
                                               const std::vector<FamilyPointResult>& vals) {
  const int n = static_cast<int>(grid.points.size());
  UnionFind uf(n);
  // neighbors differ by one step along one grid axis
  std::vector<int> stride(grid.shape.size(), 1);
  for (int d = static_cast<int>(grid.shape.size()) - 2; d >= 0; --d)
    stride[d] = stride[d + 1] * grid.shape[d + 1];
  for (int i = 0; i < n; ++i) {
    if (vals[i].status != PointStatus::ok) continue;
    int rem = i;
    for (std::size_t d = 0; d < grid.shape.size(); ++d) {
      int coord = rem / stride[d];
      rem %= stride[d];
      if (coord + 1 < grid.shape[d]) {
        int j = i + stride[d];
        if (vals[j].status == PointStatus::ok && vals[j].value == vals[i].value)
          uf.unite(i, j);
      }
    }
  }
  std::vector<std::vector<int>> out;
  std::vector<int> root_slot(n, -1);
  for (int i = 0; i < n; ++i) {
    if (vals[i].status != PointStatus::ok) continue;
    int r = uf.find(i);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[root_slot[r]].push_back(i);
  }
  return out;
}

}  // namespace

Mod2Result check_mod2_generic(const std::vector<std::optional<int>>& values) {
  Mod2Result res;
  std::vector<int> odd, even;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    ((*values[i] % 2 + 2) % 2 == 1 ? odd : even).push_back(static_cast<int>(i));
  }
  if (odd.size() + even.size() < 2) return res;  // undefined
  res.defined = true;
  // minority parity forms the exceptional set; ties resolve to the odd side
  res.exceptional = (odd.size() <= even.size()) ? odd : even;
  if (odd.empty() || even.empty()) res.exceptional.clear();
  res.generic = res.exceptional.empty();
  return res;
}

namespace {

std::vector<Exponents> monomials_up_to(int p, int degree) {
  std::vector<Exponents> out;
  Exponents cur(p, 0);
  // lexicographic enumeration by total degree
  for (int total = 0; total <= degree; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == p - 1) {
        cur[pos] = static_cast<std::uint32_t>(left);
        out.push_back(cur);
        return;
      }
      for (int d = left; d >= 0; --d) {
        cur[pos] = static_cast<std::uint32_t>(d);
        rec(pos + 1, left - d);
      }
    };
    if (p == 0) {
      if (total == 0) out.push_back(cur);
    } else {
      rec(0, total);
    }
  }
  return out;
}

}  // namespace

std::optional<SignFit> fit_sign_representation(const LambdaGrid& grid,
                                               const std::vector<std::optional<int>>& values,
                                               int degree_bound, std::uint64_t seed) {
  const int p = grid.p;
  std::vector<int> defined;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) defined.push_back(static_cast<int>(i));
  if (defined.empty()) return std::nullopt;

  std::vector<int> distinct;
  for (int i : defined) {
    int v = *values[i];
    if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
  }
  std::sort(distinct.begin(), distinct.end());

  if (distinct.size() == 1) {
    SignFit fit;
    fit.h = Polynomial::constant(p, Rational(1));
    fit.c = distinct[0];
    return fit;
  }
  if (distinct.size() != 2 || distinct[0] != -distinct[1]) return std::nullopt;
  const int c = std::abs(distinct[0]);

  // target sign pattern
  std::vector<int> sign(defined.size());
  for (std::size_t k = 0; k < defined.size(); ++k) sign[k] = *values[defined[k]] > 0 ? 1 : -1;

  for (int degree = 1; degree <= degree_bound; ++degree) {
    auto mons = monomials_up_to(p, degree);
    const std::size_t nm = mons.size();
    if (defined.size() < nm) continue;  // underdetermined at this degree

    // signed feature rows, unit-normalized for the perceptron
    std::vector<std::vector<double>> phi(defined.size(), std::vector<double>(nm));
    for (std::size_t k = 0; k < defined.size(); ++k) {
      std::vector<double> lam;
      for (const auto& q : grid.points[defined[k]]) lam.push_back(q.to_double());
      double nrm = 0;
      for (std::size_t j = 0; j < nm; ++j) {
        double mv = 1.0;
        for (int d = 0; d < p; ++d)
          for (std::uint32_t e = 0; e < mons[j][d]; ++e) mv *= lam[d];
        phi[k][j] = sign[k] * mv;
        nrm += phi[k][j] * phi[k][j];
      }
      nrm = std::sqrt(nrm);
      if (nrm > 0)
        for (auto& x : phi[k]) x /= nrm;
    }

    SplitMix64 rng(seed ^ (0xf1ull + static_cast<std::uint64_t>(degree)));
    for (int restart = 0; restart < 5; ++restart) {
      std::vector<double> u(nm, 0.0);
      if (restart > 0)
        for (auto& x : u) x = rng.normal() * 1e-3;
      for (int it = 0; it < 20000; ++it) {
        bool violated = false;
        for (std::size_t k = 0; k < defined.size(); ++k) {
          double margin = 0;
          for (std::size_t j = 0; j < nm; ++j) margin += u[j] * phi[k][j];
          if (margin <= 1e-9) {
            for (std::size_t j = 0; j < nm; ++j) u[j] += phi[k][j];
            violated = true;
          }
        }
        if (!violated) break;
      }
      // exact verification of the rounded rational candidate
      double umax = 0;
      for (double x : u) umax = std::max(umax, std::abs(x));
      if (umax == 0) continue;
      Polynomial h(p);
      for (std::size_t j = 0; j < nm; ++j) {
        long num = std::lround(u[j] / umax * (1 << 20));
        if (num != 0) h.add_term(mons[j], Rational(num, 1 << 20));
      }
      bool exact_ok = !h.is_zero();
      for (std::size_t k = 0; exact_ok && k < defined.size(); ++k) {
        Rational hv = h.eval(grid.points[defined[k]]);
        exact_ok = hv.sign() == sign[k];
      }
      if (exact_ok) {
        SignFit fit;
        fit.h = std::move(h);
        fit.c = c;
        return fit;
      }
    }
  }
  return std::nullopt;
}

std::optional<SignFit> fit_sign_representation(const FamilyReport& report, int degree_bound) {
  std::vector<std::optional<int>> vals;
  for (const auto& v : report.values)
    vals.push_back(v.status == PointStatus::ok ? std::optional<int>(v.value) : std::nullopt);
  return fit_sign_representation(report.grid, vals, degree_bound);
}

FamilyReport scan_family(const FamilySpec& f, const LambdaGrid& grid, const FamilyConfig& cfg) {
  if (grid.p != f.p) throw std::invalid_argument("scan_family: grid dimension mismatch");
  FamilyReport rep;
  rep.n = f.n;
  rep.p = f.p;
  rep.grid = grid;

  for (const auto& lambda : grid.points) {
    FamilyPointResult pt;
    pt.lambda = lambda;
    PolynomialMap g = substitute_tail(f.map, lambda);

    ImmersionCertificate cert = certify_small_sphere_immersion(g, cfg.immersion);
    pt.immersion_verdict = cert.verdict;
    if (cert.verdict != Verdict::pass) {
      pt.status = PointStatus::immersion_failed;
      pt.note = cert.note;
      rep.values.push_back(std::move(pt));
      continue;
    }

    const double radius = 0.5 * cert.r0_estimate;
    pt.radius = radius;
    RadiusStability stability =
        radius_stability_check(g, {radius, 0.5 * radius}, cfg.selfint);
    if (!stability.stable) {
      pt.status = PointStatus::solver_failed;
      pt.note = "pair route unstable across validation radii";
      rep.values.push_back(std::move(pt));
      continue;
    }
    pt.pair_value = stability.values[0];

    if (cfg.cross_validate) {
      IntersectionViaDegree deg = intersection_number_via_degree(g, cfg.degree);
      if (!deg.ok) {
        pt.status = PointStatus::solver_failed;
        pt.note = "degree route failed: " + deg.error;
        rep.values.push_back(std::move(pt));
        continue;
      }
      pt.degree_value = deg.value;
      pt.methods_agree = deg.value == pt.pair_value;
      if (!pt.methods_agree) {
        pt.status = PointStatus::solver_failed;
        pt.note = "pair and degree routes disagree";
        rep.values.push_back(std::move(pt));
        continue;
      }
    } else {
      pt.methods_agree = true;
      pt.degree_value = pt.pair_value;
    }

    pt.status = PointStatus::ok;
    pt.value = pt.pair_value;
    rep.values.push_back(std::move(pt));
  }

  rep.strata = connected_strata(grid, rep.values);
  std::vector<std::optional<int>> vals;
  for (const auto& v : rep.values)
    vals.push_back(v.status == PointStatus::ok ? std::optional<int>(v.value) : std::nullopt);
  rep.mod2 = check_mod2_generic(vals);
  rep.sign_fit = fit_sign_representation(grid, vals, cfg.fit_degree_bound);
  return rep;
}

}  // namespace whitney
