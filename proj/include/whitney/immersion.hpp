#ifndef WHITNEY_IMMERSION_HPP
#define WHITNEY_IMMERSION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whitney/numeric.hpp"
#include "whitney/polynomial.hpp"

namespace whitney {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

struct ImmersionConfig {
  /// Radius schedule: radius_scale * 10^{-k} for k = 1..num_radii.
  double radius_scale = 1.0;
  int num_radii = 4;
  int samples_per_sphere = 4096;
  int local_minimizations = 32;
  int minimizer_iterations = 120;
  /// Normalized thresholds: each minor is divided by its coefficient scale at
  /// the working radius, so both are dimensionless.
  double degeneracy_threshold = 1e-10;
  double certification_threshold = 1e-6;
  /// Extra decay power allowed on top of the maximal minor degree before the
  /// per-radius minimum profile is considered suspicious.
  double decay_exponent_margin = 1.0;
  std::uint64_t seed = 0x5eed;
  int threads = 0;  // 0: use default_thread_count()
};

/// Outcome of the small-sphere immersion test. `pass` certifies that on every
/// checked radius the sampled-and-minimized normalized minor maximum stayed
/// above the certification threshold with an admissible decay profile; `fail`
/// carries a witness point where every maximal minor is below the degeneracy
/// threshold.
struct ImmersionCertificate {
  Verdict verdict = Verdict::inconclusive;
  double r0_estimate = 0.0;
  std::optional<Vec> witness;
  double witness_sigma = 0.0;
  std::vector<double> radii_checked;
  std::vector<double> min_minor_norm_profile;
  std::string note;
};

/// The Jacobian of g: R^{n+1} -> R^{2n} stacked over the gradient of the
/// sphere function sum x_i^2; its maximal minors test whether g restricted to
/// origin-centered spheres is an immersion. Requires 2n components (n even)
/// over n+1 variables.
PolyMatrix augmented_jacobian(const PolynomialMap& g);

ImmersionCertificate certify_small_sphere_immersion(const PolynomialMap& g,
                                                    const ImmersionConfig& cfg = {});

/// Fixes the trailing parameter variables to lambda, then certifies.
ImmersionCertificate certify_family_member(const PolynomialMap& g_family,
                                           const std::vector<Rational>& lambda,
                                           const ImmersionConfig& cfg = {});

}  // namespace whitney

#endif
