#pragma once

// Fully-dynamic coreset: a complete binary tree in heap layout whose leaves
// hold the input points and whose internal nodes cache static-coreset outputs
// of their children, plus an outer instance on top of the root.
//
// Heap layout with m leaves: nodes 1..2m-1, leaves m..2m-1, children of v are
// 2v and 2v+1. Inserting turns leaf m into an internal node (its content moves
// to 2m, the new leaf is 2m+1); deleting leaf l moves the last leaf v = 2m-1
// into l and its sibling v' = 2m-2 into the parent m-1.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyncore/metric.hpp"
#include "dyncore/node_set.hpp"
#include "dyncore/static_coreset.hpp"
#include "dyncore/weights.hpp"

namespace dyncore {

enum class OuterMode { Eager, Lazy };

struct TreeConfig {
  int k = 2;
  int z = 2;
  Metric metric = Metric::euclidean(2);
  double eps = 0.5;
  double lambda = 0.1;
  /// Input weights must have numerator and denominator at most n_p^c.
  unsigned c_exp = 2;
  std::string constructor = "passthrough";
  /// Constant c_s of the size function.
  double size_scale = 1.0;
  unsigned bicriteria_factor = 2;
  /// Replaces s' of the tree nodes (and bucket capacity) when set.
  std::optional<std::uint64_t> threshold_override;
  /// Replaces the outer instance's target s(eps/3, lambda/2, W_p) when set.
  std::optional<std::uint64_t> outer_target_override;
  bool bucketed = false;
  /// Bucket capacity in bucketed mode; defaults to the node threshold s'.
  std::optional<std::uint64_t> bucket_capacity;
  OuterMode outer = OuterMode::Eager;
  std::uint64_t seed = 1;
  /// Verify at every phase end that all stamps carry the ending phase's n_p.
  bool audit_phase_sweep = false;
  CallObserver observer;
};

/// Parameters a node was last computed with.
struct Stamp {
  std::uint64_t n_p = 0;
  std::uint64_t phase_id = 0;
  double eps_s = 0.0;
  double lambda_s = 0.0;
  std::uint64_t threshold = 0;
  std::uint64_t seed = 0;
};

struct PhaseState {
  std::uint64_t phase_id = 0;
  std::uint64_t n0 = 0;
  std::uint64_t n_p = 8;
  std::uint64_t n_pp = 8;
  std::uint64_t length = 2;
  std::uint64_t updates_left = 2;
  double eps_s = 0.0;
  double lambda_s = 0.0;
  std::uint64_t s_p = kUnboundedSize;
  std::uint64_t s_pp = kUnboundedSize;
  std::uint64_t log_eps_p = 1;   // ceil(log2(n_p)/eps)
  std::uint64_t log_eps_pp = 1;
  mpz_class w_p;
  std::uint64_t outer_target = kUnboundedSize;
  /// Heap index of the next refresh position; past 2m-1 means stopped.
  std::uint64_t cursor = 0;
};

struct PhaseSchedule {
  std::uint64_t n_p;
  std::uint64_t length;
  double eps_s;
  double lambda_s;
};

/// n_p = 4 max(n0, 2), length ceil(n0/2) (at least 1), eps_s = eps/(6 ceil(log2 n_p)),
/// lambda_s = lambda/(2 n_p). n0 = 0 gives the initial schedule (n_p = 8, length 2).
PhaseSchedule phase_schedule(std::uint64_t n0, double eps, double lambda);

struct UpdateReport {
  std::uint64_t update_index = 0;
  std::size_t n = 0;
  std::uint64_t static_calls_nonouter = 0;
  std::uint64_t static_calls_outer = 0;
  std::uint64_t reduced_calls = 0;  // node calls that actually sampled
  std::uint64_t wall_nanos = 0;
  std::size_t coreset_size = 0;
  std::uint64_t phase_id = 0;
  bool phase_rolled = false;
};

struct InvariantReport {
  bool ok = true;
  std::vector<std::string> failures;
};

class DynamicCoresetTree {
 public:
  explicit DynamicCoresetTree(TreeConfig config);

  UpdateReport insert(const Point& p, const mpq_class& weight);
  UpdateReport erase(PointId id);
  UpdateReport update_weight(PointId id, const mpq_class& delta);

  /// The outer instance's output (computed now in lazy mode).
  NodeSet::Ptr query();
  [[nodiscard]] std::vector<WeightedPoint> query_points();
  /// Outer calls made by the last query() (0 in eager mode).
  [[nodiscard]] std::uint64_t last_query_calls() const { return last_query_calls_; }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t leaf_count() const { return m_; }
  [[nodiscard]] std::size_t node_count() const { return m_ == 0 ? 0 : 2 * m_ - 1; }
  [[nodiscard]] bool contains(PointId id) const { return where_.count(id) != 0; }
  [[nodiscard]] const PhaseState& phase() const { return phase_; }
  [[nodiscard]] const TreeConfig& config() const { return config_; }
  [[nodiscard]] NodeSet::Ptr root_set() const;
  [[nodiscard]] NodeSet::Ptr node_set(std::size_t index) const;
  [[nodiscard]] const Stamp& stamp(std::size_t index) const;
  [[nodiscard]] bool is_leaf(std::size_t index) const { return index >= m_ && index < 2 * m_; }
  /// Heap index of the leaf holding `id`.
  [[nodiscard]] std::size_t leaf_of(PointId id) const;
  /// Ids stored in leaf `index`, in bucket order.
  [[nodiscard]] std::vector<PointId> leaf_ids(std::size_t index) const;
  /// Exact current (unrounded) weight of a live point.
  [[nodiscard]] const mpq_class& true_weight(PointId id) const;
  /// Current rounded input, one entry per live point.
  [[nodiscard]] std::vector<WeightedPoint> rounded_input() const;
  /// Bucketed mode: heap index of the deficient leaf, 0 when null.
  [[nodiscard]] std::size_t deficient_leaf() const { return p_s_; }
  /// D(level) for the current phase.
  [[nodiscard]] DenomTag level_denominator(unsigned level) const;

  [[nodiscard]] std::uint64_t updates() const { return update_counter_; }
  [[nodiscard]] std::uint64_t total_nonouter_calls() const { return total_nonouter_; }
  [[nodiscard]] std::uint64_t total_outer_calls() const { return total_outer_; }

  /// Completeness, leaf count, stamp freshness, denominator divisibility,
  /// per-level numerator cap and cached-set sizes.
  [[nodiscard]] InvariantReport check_invariants() const;
  /// Failures recorded by the phase-end sweep audit.
  [[nodiscard]] const std::vector<std::string>& audit_failures() const { return audit_failures_; }

 private:
  struct LeafItem {
    PointId id;
    PointRef point;
    mpq_class weight;
  };
  struct Node {
    NodeSet::Ptr set;
    Stamp stamp;
    std::vector<LeafItem> bucket;  // leaves only
  };

  void begin_update();
  UpdateReport finish_update(std::vector<std::size_t> dirty, std::uint64_t start_nanos);
  void refresh_step(std::vector<std::size_t>& dirty);
  void round_leaf(std::size_t index);
  void run_internal_node(std::size_t index);
  void run_outer();
  void roll_phase();
  void reset_cursor();
  void compute_phase_constants(bool initial);
  [[nodiscard]] StaticCallParams node_params(std::size_t index) const;

  std::size_t heap_insert(std::vector<LeafItem> bucket, std::vector<std::size_t>& dirty);
  void heap_remove_leaf(std::size_t leaf, std::vector<std::size_t>& dirty);
  void reindex(std::size_t index);
  void check_weight_bound(const mpq_class& w) const;
  [[nodiscard]] std::uint64_t bucket_capacity() const;

  TreeConfig config_;
  std::unique_ptr<StaticConstructor> ctor_;
  std::vector<Node> nodes_;  // index 0 unused
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::unordered_map<PointId, std::size_t> where_;
  std::size_t p_s_ = 0;
  PhaseState phase_;
  std::uint64_t inv_eps_ = 2;
  mpz_class leaf_denominator_;
  DenomTag leaf_tag_;
  NodeSet::Ptr outer_set_;
  bool outer_valid_ = false;
  std::uint64_t update_counter_ = 0;
  std::uint64_t total_nonouter_ = 0;
  std::uint64_t total_outer_ = 0;
  std::uint64_t last_query_calls_ = 0;
  std::uint64_t pending_reduced_ = 0;
  std::vector<std::string> audit_failures_;
};

}  // namespace dyncore
