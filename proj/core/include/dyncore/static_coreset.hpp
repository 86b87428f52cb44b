#pragma once

// Static coreset constructors used at tree nodes, in merge-and-reduce buckets
// and as the outer instance.
//
// A constructor receives integer numerators (the caller has already rebased a
// weighted set to one denominator) and returns entries whose weights are
// expressed relative to those numerators: output weight = numerator / scale.
// Integer constructors return scale 1; the fractional sensitivity constructor
// returns scale s' * ceil(log2(n_p)/eps).

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyncore/metric.hpp"
#include "dyncore/node_set.hpp"
#include "dyncore/weights.hpp"

namespace dyncore {

inline constexpr std::uint64_t kUnboundedSize = std::numeric_limits<std::uint64_t>::max();

struct ClusterSpec {
  int k = 2;
  int z = 2;
  Metric metric = Metric::euclidean(2);
  /// a in a * k * ceil(log2(1/lambda_s)) bicriteria centers.
  unsigned bicriteria_factor = 2;
};

enum class WeightDiscipline { Integer, Fractional };

struct StaticCallParams {
  double eps_s = 0.5;
  double lambda_s = 0.1;
  /// Maximum output cardinality s' for this call.
  std::uint64_t target_size = kUnboundedSize;
  /// Phase base, used for the fractional rounding grid ceil(log2(n_p)/eps).
  std::uint64_t n_p = 8;
  /// Overall accuracy eps of the enclosing structure.
  double eps = 0.5;
  std::uint64_t seed = 0;
};

struct StaticOutput {
  std::vector<IntEntry> entries;
  DenomTag scale;
};

struct BicriteriaResult {
  std::vector<std::size_t> center_index;  // positions in the input
  std::vector<Point> centers;
  std::vector<std::size_t> assignment;    // input position -> slot in centers
  std::vector<double> power_distance;     // d(x, B)^z per input position
  std::vector<double> cluster_cost;
  std::vector<double> cluster_weight;
  double total_cost = 0.0;
};

/// Adaptive D^z seeding: a*k*ceil(log2(1/lambda_s)) centers (fewer when the
/// input has fewer distinct locations), the first drawn by weight and each
/// next one proportional to w(x) d(x, chosen)^z. Throws on empty input.
BicriteriaResult d2_sample_bicriteria(std::span<const IntEntry> input, const ClusterSpec& spec, double lambda_s,
                                      std::uint64_t seed);

/// Merges entries at the same location (weights summed) and drops zero weights.
std::vector<IntEntry> merge_duplicates(std::span<const IntEntry> input, const Metric& metric);

StaticOutput passthrough(std::span<const IntEntry> input);

/// m draws by weight with replacement; each draw carries W/m. Output scale is
/// m (Threshold factor), so the numerators are count * W and the total is exact.
StaticOutput uniform_sample(std::span<const IntEntry> input, std::uint64_t m, std::uint64_t seed);

/// Ring sampling around bicriteria centers with integer largest-remainder
/// apportionment per ring; total weight is conserved exactly.
StaticOutput ring_sample(std::span<const IntEntry> input, const ClusterSpec& spec, const StaticCallParams& params);

/// Sensitivity sampling on weights scaled by s' = target_size, rounded to the
/// grid 1/ceil(log2(n_p)/eps) and re-tagged with scale s' * ceil(log2(n_p)/eps).
StaticOutput sensitivity_sample(std::span<const IntEntry> input, const ClusterSpec& spec,
                                const StaticCallParams& params);

/// One raw sensitivity draw before rounding and total-weight capping. Weights
/// are in units of the input numerators. Exposed for the unbiasedness check.
std::vector<std::pair<PointRef, double>> sensitivity_draw(std::span<const IntEntry> input, const ClusterSpec& spec,
                                                          const StaticCallParams& params);

// ---------------------------------------------------------------------------

enum class SizeKind { Unbounded, Rings, Sensitivity, Fixed };

/// Declared size bound s(eps_s, lambda_s, W_s).
struct SizeFunction {
  SizeKind kind = SizeKind::Unbounded;
  double c_s = 1.0;
  int k = 2;
  std::uint64_t fixed = kUnboundedSize;

  /// Saturates at kUnboundedSize. `log2_w` is log2 of the total weight W_s.
  [[nodiscard]] std::uint64_t operator()(double eps_s, double lambda_s, double log2_w, std::uint64_t n_s) const;
};

class StaticConstructor {
 public:
  virtual ~StaticConstructor() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual WeightDiscipline discipline() const = 0;
  /// delta in the total-weight contract total(out) <= (1 + delta) total(in).
  [[nodiscard]] virtual double weight_inflation(const StaticCallParams& params) const = 0;
  [[nodiscard]] virtual const SizeFunction& size_function() const = 0;
  [[nodiscard]] virtual const ClusterSpec& cluster() const = 0;
  [[nodiscard]] virtual StaticOutput build(std::span<const IntEntry> input, const StaticCallParams& params) const = 0;
};

/// "passthrough", "uniform", "rings" or "sensitivity". `c_s` scales the size
/// function of the sampling constructors.
std::unique_ptr<StaticConstructor> make_constructor(std::string_view name, ClusterSpec spec, double c_s = 1.0);

struct CallRecord {
  std::string_view constructor;
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  mpq_class input_total;
  mpq_class output_total;  // in units of the input numerators
  double delta = 0.0;
  bool outer = false;
};

using CallObserver = std::function<void(const CallRecord&)>;

/// Runs the constructor and enforces |out| <= target_size and
/// total(out) <= (1 + delta) total(in); throws ContractViolation otherwise.
StaticOutput run_checked(const StaticConstructor& ctor, std::span<const IntEntry> input,
                         const StaticCallParams& params, const CallObserver* observer = nullptr,
                         bool outer = false);

/// splitmix64 finalizer, used to derive per-call seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace dyncore
