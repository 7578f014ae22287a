#ifndef WHITNEY_SELFINT_HPP
#define WHITNEY_SELFINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "whitney/numeric.hpp"
#include "whitney/polynomial.hpp"

namespace whitney {

struct SelfIntersectConfig {
  int newton_starts = 512;
  int newton_max_iters = 200;
  double newton_tol = 1e-12;  // residual of the component-normalized system
  /// Pair deduplication radius, relative to the sphere radius.
  double cluster_radius_factor = 1e-6;
  /// Diagonal exclusion: solutions with |p - q| below this times the radius
  /// are not pairs. Solutions well below it count as diagonal hits; the band
  /// just under it is reported as suspicious.
  double separation_factor = 1e-4;
  double near_diagonal_floor = 1e-9;
  /// A pair is regular when smallest/largest singular value of its pairing
  /// matrix exceeds this.
  double regularity_threshold = 1e-6;
  /// Image-space clustering radius for triple-point detection, relative to
  /// the image coefficient scale.
  double triple_point_factor = 1e-8;
  std::uint64_t seed = 0x5eed;
  int threads = 0;
};

/// An unordered double point of g on the sphere: g(p) = g(q), p != q, stored
/// with the lexicographically smaller point first.
struct SelfIntersectionPair {
  Vec p, q;
  double residual = 0.0;
  bool regular = false;
  int sign = 0;            // +-1 when regular
  double condition = 0.0;  // smallest singular value of the pairing matrix
  double det = 0.0;        // determinant of the pairing matrix
};

struct SolverStats {
  int starts = 0;
  int converged = 0;
  int deduped = 0;
  int diagonal_hits = 0;
  int near_diagonal_suspicious = 0;
  bool complete = false;  // pair set stable under doubling the start budget
};

struct IntersectionReport {
  double radius = 0.0;
  std::vector<SelfIntersectionPair> pairs;
  bool complete_regular = false;
  bool intersection_number_valid = false;
  int intersection_number = 0;
  SolverStats stats;
  std::string note;
};

/// Orthonormal basis v_1..v_n of the tangent space of the sphere through p,
/// oriented outward-normal-first: det[p, v_1, ..., v_n] > 0.
std::vector<Vec> tangent_basis(const Vec& p);

struct PairClassification {
  bool regular = false;
  int sign = 0;
  double condition = 0.0;
  double det = 0.0;
};

/// Builds [Dg(p)v_1..Dg(p)v_n, Dg(q)w_1..Dg(q)w_n] with well-oriented bases
/// and reads off regularity (smallest relative singular value) and the
/// orientation sign of the double point.
PairClassification classify_pair(const PolynomialMap& g, const Vec& p, const Vec& q,
                                 const SelfIntersectConfig& cfg = {});

/// Same, with caller-supplied tangent bases (each must be well oriented).
PairClassification classify_pair_with_bases(const PolynomialMap& g, const Vec& p, const Vec& q,
                                            const std::vector<Vec>& basis_p,
                                            const std::vector<Vec>& basis_q,
                                            const SelfIntersectConfig& cfg = {});

/// Multi-start Newton on {g(x) = g(y), |x|^2 = r^2, |y|^2 = r^2} with
/// diagonal exclusion, clustering, and canonical ordering.
std::vector<SelfIntersectionPair> find_self_intersections(const PolynomialMap& g, double r,
                                                          const SelfIntersectConfig& cfg = {},
                                                          SolverStats* stats = nullptr);

/// Classifies a pair set and aggregates it into a report: complete regularity
/// requires every pair regular, no triple points, and a solver pass that was
/// stable under budget doubling.
IntersectionReport assemble_intersection_report(const PolynomialMap& g, double r,
                                                std::vector<SelfIntersectionPair> pairs,
                                                SolverStats stats,
                                                const SelfIntersectConfig& cfg = {});

IntersectionReport intersection_number_via_pairs(const PolynomialMap& g, double r,
                                                 const SelfIntersectConfig& cfg = {});

struct RadiusStability {
  bool stable = false;
  std::vector<int> values;
  std::vector<bool> valid;
};

/// True when the pair-route intersection number is defined and equal at every
/// radius.
RadiusStability radius_stability_check(const PolynomialMap& g, const std::vector<double>& radii,
                                       const SelfIntersectConfig& cfg = {});

}  // namespace whitney

#endif
