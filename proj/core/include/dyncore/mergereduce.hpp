#pragma once

// Insertion-only merge-and-reduce. Bucket i (0-based) is full or empty and,
// when full, holds a coreset standing in for 2^i inserted points; the
// full/empty pattern is the binary representation of the insert count.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyncore/dyntree.hpp"
#include "dyncore/metric.hpp"
#include "dyncore/node_set.hpp"
#include "dyncore/static_coreset.hpp"

namespace dyncore {

struct MergeReduceConfig {
  int k = 2;
  int z = 2;
  Metric metric = Metric::euclidean(2);
  double eps = 0.5;
  double lambda = 0.1;
  unsigned c_exp = 2;
  std::string constructor = "passthrough";
  double size_scale = 1.0;
  unsigned bicriteria_factor = 2;
  std::optional<std::uint64_t> threshold_override;
  /// Capacity N_max, fixed upfront; sets eps_s = eps / (2 ceil(log2 N_max)).
  std::uint64_t n_max = 1 << 16;
  std::uint64_t seed = 1;
  CallObserver observer;
};

class MergeReduce {
 public:
  explicit MergeReduce(MergeReduceConfig config);

  UpdateReport insert(const Point& p, const mpq_class& weight);
  /// Always throws UnsupportedOperation.
  [[noreturn]] void erase(PointId id);
  /// Always throws UnsupportedOperation.
  [[noreturn]] void update_weight(PointId id, const mpq_class& delta);

  /// Union of all full buckets.
  [[nodiscard]] NodeSet::Ptr query() const;
  [[nodiscard]] std::vector<WeightedPoint> query_points() const { return query()->to_weighted_points(); }

  /// Full/empty state of buckets 0, 1, ..., highest full bucket.
  [[nodiscard]] std::vector<bool> pattern() const;
  /// Merge levels behind bucket i (equals i when full).
  [[nodiscard]] unsigned reduce_depth(std::size_t bucket) const;
  [[nodiscard]] std::uint64_t inserts() const { return inserts_; }
  [[nodiscard]] std::uint64_t threshold() const { return s_; }
  [[nodiscard]] double eps_s() const { return eps_s_; }
  [[nodiscard]] double lambda_s() const { return lambda_s_; }

 private:
  struct Bucket {
    NodeSet::Ptr set;
    unsigned depth = 0;
  };

  MergeReduceConfig config_;
  std::unique_ptr<StaticConstructor> ctor_;
  std::vector<Bucket> buckets_;
  std::uint64_t inserts_ = 0;
  double eps_s_ = 0.0;
  double lambda_s_ = 0.0;
  std::uint64_t s_ = kUnboundedSize;
  DenomTag leaf_tag_;
  mpz_class leaf_denominator_;
};

}  // namespace dyncore
