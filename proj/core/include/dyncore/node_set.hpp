#pragma once

#include <gmpxx.h>

#include <array>
#include <memory>
#include <vector>

#include "dyncore/metric.hpp"
#include "dyncore/weights.hpp"

namespace dyncore {

/// A point with an integer weight numerator; the denominator is carried by
/// the enclosing set.
struct IntEntry {
  PointRef point;
  mpz_class weight;
};

/// Immutable weighted set with one shared denominator tag.
///
/// A set is either materialized (an entry list) or the weighted union of two
/// other sets. Unions are O(1): they keep the operands alive and record the
/// factor that lifts each operand's numerators to the union's tag, so a
/// pass-through node never copies its children's points. flatten() expands
/// the union when a consumer needs the actual entries.
class NodeSet {
 public:
  using Ptr = std::shared_ptr<const NodeSet>;

  static Ptr empty();
  static Ptr materialized(DenomTag tag, std::vector<IntEntry> entries);
  static Ptr join(Ptr left, Ptr right);

  [[nodiscard]] const DenomTag& tag() const { return tag_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool is_composite() const { return composite_; }
  /// Sum of all numerators over tag().
  [[nodiscard]] const mpz_class& numerator_sum() const { return numerator_sum_; }
  [[nodiscard]] mpq_class total_weight() const;

  /// All entries, numerators expressed over tag().
  [[nodiscard]] std::vector<IntEntry> flatten() const;
  void append_to(std::vector<IntEntry>& out, const mpz_class& factor) const;

  [[nodiscard]] std::vector<WeightedPoint> to_weighted_points() const;

 private:
  NodeSet() = default;

  DenomTag tag_;
  std::size_t size_ = 0;
  mpz_class numerator_sum_{0};
  bool composite_ = false;
  std::vector<IntEntry> entries_;
  std::array<Ptr, 2> parts_;
  std::array<mpz_class, 2> lift_;
};

}  // namespace dyncore
