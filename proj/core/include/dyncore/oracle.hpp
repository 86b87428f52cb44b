#pragma once

// Brute-force ground truth: exact costs, enumeration of candidate solutions,
// coreset certification and tiny-instance optima.

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dyncore/metric.hpp"

namespace dyncore {

/// Largest number of candidate solutions exhaustive enumeration accepts.
inline constexpr std::uint64_t kExhaustiveGuard = 1'000'000;

enum class CertifyMode { Exhaustive, Sampled };

struct CertificationReport {
  CertifyMode mode = CertifyMode::Exhaustive;
  std::uint64_t solutions_tested = 0;
  double eps = 0.0;
  /// max_S |c(S,X) - c(S,C)| / c(S,X); infinite when c(S,X) = 0 < c(S,C).
  double worst_deviation = 0.0;
  bool passed = true;
  Solution witness;

  [[nodiscard]] std::string to_json() const;
};

/// sum_{j=1..min(k,n)} C(n, j), saturating at UINT64_MAX.
std::uint64_t count_solutions(std::size_t n, int k);
/// C(n, k), saturating.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// |cx - cc| / cx, with 0/0 = 0 and x/0 = infinity.
double relative_deviation(double cost_input, double cost_coreset);

/// Whether a deviation passes at eps (1e-9 relative slack for floating-point noise).
bool deviation_within(double deviation, double eps);

/// Exhaustive: every 1..k subset of the distinct input locations. Sampled:
/// `sample_count` random k-subsets, D^z-seeded solutions and degenerate ones
/// (single centers at far points, the farthest pair). Throws InvalidArgument
/// in exhaustive mode when count_solutions exceeds kExhaustiveGuard.
CertificationReport certify_coreset(std::span<const WeightedPoint> coreset, std::span<const WeightedPoint> input,
                                    double eps, int k, int z, const Metric& metric,
                                    CertifyMode mode = CertifyMode::Exhaustive, std::size_t sample_count = 0,
                                    std::uint64_t seed = 0);

struct OptimalSolution {
  double cost = 0.0;
  Solution solution;
};

/// Minimum cost over all k-subsets of the input locations (all points when k >= n).
OptimalSolution optimal_cost(std::span<const WeightedPoint> input, int k, int z, const Metric& metric);

/// Every weight multiplied by `factor`.
std::vector<WeightedPoint> scale_weights(std::span<const WeightedPoint> points, const mpq_class& factor);

using CoresetBuilder = std::function<std::vector<WeightedPoint>(std::span<const WeightedPoint>)>;

struct CompositionReport {
  CertificationReport inner;     // C certified on X at eps
  CertificationReport outer;     // C'' certified on C at delta
  CertificationReport composed;  // C'' certified on X at eps + delta + eps*delta
  CertificationReport unioned;   // C1 u C2 certified on X1 u X2 at eps
  bool passed = false;
};

/// Builds C = build_eps(X) and C'' = build_delta(C), certifies each level
/// and the composition, and checks the union property on an even/odd split.
CompositionReport certify_composition(std::span<const WeightedPoint> input, double eps, double delta,
                                      const CoresetBuilder& build_eps, const CoresetBuilder& build_delta, int k,
                                      int z, const Metric& metric);

}  // namespace dyncore
