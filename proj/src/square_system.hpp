#ifndef WHITNEY_SRC_SQUARE_SYSTEM_HPP
#define WHITNEY_SRC_SQUARE_SYSTEM_HPP

// Internal helpers shared by the degree and self-intersection solvers: a
// square-system evaluation interface and a damped multi-start Newton step.
// Not installed; include from src/ only.

#include <cmath>

#include "whitney/numeric.hpp"

namespace whitney::detail {

constexpr int kMaxSystemDim = 12;

struct SquareSystemEval {
  int m = 0;
  virtual void eval(const double* w, double* f) const = 0;
  virtual void eval_jac(const double* w, double* f, double* j) const = 0;
  virtual ~SquareSystemEval() = default;
};

struct NewtonOutcome {
  bool converged = false;
  Vec x;
  double residual = 0.0;
};

/// Damped Newton for F(x) = z, stopping at tol on the residual; abandons
/// diverging iterates beyond escape_radius from the origin.
inline NewtonOutcome newton_solve(const SquareSystemEval& ev, Vec x, const Vec& z, double tol,
                                  int max_iters, double escape_radius) {
  const int m = ev.m;
  double fbuf[kMaxSystemDim], jbuf[kMaxSystemDim * kMaxSystemDim];
  auto residual = [&](const Vec& p) {
    ev.eval(p.data(), fbuf);
    double n2 = 0;
    for (int i = 0; i < m; ++i) {
      double d = fbuf[i] - z[i];
      n2 += d * d;
    }
    return std::sqrt(n2);
  };
  NewtonOutcome out;
  double res = residual(x);
  for (int it = 0; it < max_iters; ++it) {
    if (res < tol) {
      out.converged = true;
      out.x = x;
      out.residual = res;
      return out;
    }
    ev.eval_jac(x.data(), fbuf, jbuf);
    Mat jm(m, m);
    for (int i = 0; i < m * m; ++i) jm.a[i] = jbuf[i];
    LU lu = lu_factor(std::move(jm));
    if (!lu.ok) return out;
    Vec rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = fbuf[i] - z[i];
    Vec dx = lu_solve(lu, rhs);
    double lam = 1.0;
    bool improved = false;
    Vec trial(m);
    for (int bt = 0; bt < 16; ++bt) {
      for (int i = 0; i < m; ++i) trial[i] = x[i] - lam * dx[i];
      double rt = residual(trial);
      if (rt < res * (1.0 - 0.2 * lam)) {
        x = trial;
        res = rt;
        improved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!improved) return out;
    if (norm(x) > escape_radius) return out;
  }
  return out;
}

}  // namespace whitney::detail

#endif
