#ifndef WHITNEY_NUMERIC_HPP
#define WHITNEY_NUMERIC_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "whitney/polynomial.hpp"

namespace whitney {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double dist(const Vec& a, const Vec& b);

/// Small dense row-major matrix of doubles.
struct Mat {
  int rows = 0, cols = 0;
  Vec a;
  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

/// LU factorization with partial pivoting; ok=false on an exactly zero pivot.
struct LU {
  Mat lu;
  std::vector<int> perm;
  int sign = 1;
  bool ok = false;
};
LU lu_factor(Mat m);
Vec lu_solve(const LU& f, const Vec& rhs);
double lu_det(const LU& f);
double det(const Mat& m);

/// All singular values, descending, via one-sided Jacobi orthogonalization.
Vec singular_values(Mat m);

/// Orthonormal basis (v_1..v_{m-1}) of the orthogonal complement of a unit
/// vector u, oriented so that det[u, v_1, ..., v_{m-1}] = +1.
std::vector<Vec> tangent_frame(const Vec& u);

/// Deterministic 64-bit PRNG (splitmix64).
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double uniform01();  // in [0,1)
  double normal();
};

/// Inverse of the standard normal CDF (Acklam's approximation, |err| < 1.2e-9,
/// sharpened by one Halley step).
double inv_normal_cdf(double p);

/// Radical-inverse (van der Corput) value of index in the given base.
double halton(std::uint64_t index, std::uint32_t base);

/// Per-dimension Cranley-Patterson rotation offsets derived from a seed.
Vec halton_shift(int dim, std::uint64_t seed);

/// Point `index` of a seeded low-discrepancy sequence on the unit sphere
/// S^{dim-1}: shifted Halton coordinates through the inverse normal CDF,
/// normalized.
Vec sphere_point(int dim, std::uint64_t index, const Vec& shift);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Vec& nodes, Vec& weights);

/// Compiled form of a polynomial for fast double evaluation through a shared
/// per-point power table.
struct CompiledPoly {
  struct Term {
    double c;
    std::vector<std::uint32_t> e;
  };
  int nv = 0;
  int max_deg = 0;
  std::vector<Term> terms;

  static CompiledPoly from(const Polynomial& p);
  double eval(const double* x) const;
};

/// Compiled map plus its Jacobian for Newton iterations and quadrature.
struct CompiledMap {
  int dim_in = 0, dim_out = 0;
  std::vector<CompiledPoly> f;
  std::vector<CompiledPoly> jac;  // row-major dim_out x dim_in

  static CompiledMap from(const PolynomialMap& m);
  void eval(const double* x, double* out) const;
  void eval_jac(const double* x, double* out, double* j) const;
};

/// Runs fn(chunk_index, begin, end) over [0, total) split into fixed chunks on
/// `threads` workers. Chunk boundaries depend only on (total, chunk), so
/// per-chunk results reduced in chunk order are reproducible for any thread
/// count.
void parallel_chunks(std::uint64_t total, std::uint64_t chunk, int threads,
                     const std::function<void(int, std::uint64_t, std::uint64_t)>& fn);

/// WHITNEY_THREADS environment override, else hardware concurrency.
int default_thread_count();

}  // namespace whitney

#endif
