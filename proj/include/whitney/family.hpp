#ifndef WHITNEY_FAMILY_HPP
#define WHITNEY_FAMILY_HPP

#include <optional>
#include <string>
#include <vector>

#include "whitney/degree.hpp"
#include "whitney/immersion.hpp"
#include "whitney/polynomial.hpp"
#include "whitney/selfint.hpp"

namespace whitney {

/// A polynomial family g(x, lambda): the trailing p variables of the map are
/// the parameters.
struct FamilySpec {
  int n = 0;  // even; the map has 2n components over n+1+p variables
  int p = 0;
  PolynomialMap map;
  std::vector<std::string> lambda_names;
};

FamilySpec make_family(PolynomialMap map, int p,
                       std::vector<std::string> lambda_names = {});

/// One-parameter family multiplying the chosen component (0-based) by the new
/// trailing parameter.
FamilySpec scaled_component_family(const PolynomialMap& g, int component_index);

/// Finite evaluation grid; `shape` gives per-dimension sizes when the points
/// form a tensor grid (adjacency for strata), and is {N} for a 1-D list.
struct LambdaGrid {
  int p = 0;
  std::vector<std::vector<Rational>> points;
  std::vector<int> shape;
};

/// Tensor grid from per-dimension value lists, points in row-major order.
LambdaGrid tensor_grid(const std::vector<std::vector<Rational>>& axes);

enum class PointStatus { ok, immersion_failed, solver_failed };

std::string to_string(PointStatus s);

struct FamilyPointResult {
  std::vector<Rational> lambda;
  PointStatus status = PointStatus::solver_failed;
  int value = 0;  // intersection number when status == ok
  double radius = 0.0;
  Verdict immersion_verdict = Verdict::inconclusive;
  bool methods_agree = false;
  int pair_value = 0;
  int degree_value = 0;
  std::string note;
};

struct SignFit {
  Polynomial h;  // polynomial in the p parameters, exact coefficients
  int c = 0;
  int mismatches = 0;  // always 0 for a returned fit
};

struct Mod2Result {
  bool defined = false;
  bool generic = false;
  std::vector<int> exceptional;  // grid indices off the majority parity
};

struct FamilyReport {
  int n = 0, p = 0;
  LambdaGrid grid;
  std::vector<FamilyPointResult> values;
  /// Maximal grid-connected runs of equal defined intersection number,
  /// as lists of grid indices.
  std::vector<std::vector<int>> strata;
  Mod2Result mod2;
  std::optional<SignFit> sign_fit;
};

struct FamilyConfig {
  ImmersionConfig immersion;
  SelfIntersectConfig selfint;
  DegreeConfig degree;
  /// Cross-validate the pair route against the degree route at every point.
  bool cross_validate = true;
  int fit_degree_bound = 3;

  FamilyConfig() {
    // the per-point degree route is cross-validated against the pair route at
    // every grid point, so the sweep defaults to a lighter (still
    // snap-guarded) sampling budget
    degree.stratified_mc_samples = 250000;
    degree.min_norm_samples = 2048;
    degree.newton_starts = 256;
  }
};

/// Per-point immersion check and intersection number (both routes when
/// cross_validate), strata, mod-2 genericity, and an optional sign fit.
/// Failures are recorded per point, never interpolated.
FamilyReport scan_family(const FamilySpec& f, const LambdaGrid& grid,
                         const FamilyConfig& cfg = {});

/// Parity analysis of a value table; entries without a value are std::nullopt.
Mod2Result check_mod2_generic(const std::vector<std::optional<int>>& values);

/// Searches for exact rational h (degree <= bound) and integer c with
/// value(lambda) = c * sgn(h(lambda)) at every defined point; the sign match
/// is verified in exact arithmetic. Lowest feasible degree wins.
std::optional<SignFit> fit_sign_representation(const LambdaGrid& grid,
                                               const std::vector<std::optional<int>>& values,
                                               int degree_bound, std::uint64_t seed = 0x5eed);

std::optional<SignFit> fit_sign_representation(const FamilyReport& report, int degree_bound);

}  // namespace whitney

#endif
