#pragma once

// Stream replay harness behind the dyncoreset tool.
//
// Stream grammar, one event per line (blank lines and '#' comments skipped):
//   I <id> <num>[/<den>] <x1> ... <xd>
//   D <id>
//   U <id> <+-num>[/<den>]
//   Q

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dyncore/dyntree.hpp"
#include "dyncore/mergereduce.hpp"
#include "dyncore/oracle.hpp"

namespace dyncore::tools {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Op : char { Insert = 'I', Delete = 'D', Update = 'U', Query = 'Q' };

struct StreamEvent {
  Op op = Op::Query;
  PointId id = 0;
  mpq_class weight;  // insert weight or signed update delta
  std::vector<double> coords;
  std::size_t line = 0;
};

std::vector<StreamEvent> parse_stream(std::istream& in);
StreamEvent parse_event(std::string_view text, std::size_t line);
std::string format_event(const StreamEvent& ev);
void write_stream(std::ostream& out, const std::vector<StreamEvent>& events);
/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// "num" or "num/den", canonical.
std::string format_rational(const mpq_class& q);

// ---------------------------------------------------------------------------

enum class StructureKind { DynTree, MergeReduce, Recompute };
enum class VerifyMode { None, Sampled, Exhaustive };

StructureKind parse_structure(std::string_view name);
VerifyMode parse_verify(std::string_view name);
std::string_view structure_name(StructureKind kind);

struct HarnessConfig {
  TreeConfig tree;
  StructureKind structure = StructureKind::DynTree;
  VerifyMode verify = VerifyMode::None;
  std::size_t sample_count = 200;
  /// Capacity for merge-and-reduce.
  std::uint64_t n_max = 1 << 16;
  /// When false, wall_nanos is written as 0 so output is byte-deterministic.
  bool timing = true;
};

/// Common face of the dynamic tree, merge-and-reduce and the recompute baseline.
class Structure {
 public:
  virtual ~Structure() = default;
  [[nodiscard]] virtual std::string_view name() const = 0;
  virtual UpdateReport insert(const Point& p, const mpq_class& w) = 0;
  virtual UpdateReport erase(PointId id) = 0;
  virtual UpdateReport update_weight(PointId id, const mpq_class& delta) = 0;
  /// Returns the current coreset; `calls` receives the static calls made.
  virtual NodeSet::Ptr query(std::uint64_t& calls) = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  /// Bulk insert before measurement; the recompute baseline rebuilds once at the end.
  virtual void preload(const std::vector<std::pair<Point, mpq_class>>& points) {
    for (const auto& [p, w] : points) insert(p, w);
  }
  [[nodiscard]] virtual std::uint64_t phase_id() const { return 0; }
  [[nodiscard]] virtual std::size_t node_count() const { return 0; }
  /// Ids whose points form the root without any reduction (dyntree only).
  [[nodiscard]] virtual std::optional<std::vector<PointId>> passthrough_root_ids() const { return std::nullopt; }
};

std::unique_ptr<Structure> make_structure(const HarnessConfig& config);

// ---------------------------------------------------------------------------

struct MetricsRow {
  std::uint64_t update_index = 0;
  char op = 'Q';
  std::size_t n = 0;
  std::uint64_t static_calls_nonouter = 0;
  std::uint64_t static_calls_outer = 0;
  std::uint64_t wall_nanos = 0;
  std::size_t coreset_size = 0;
  std::optional<double> certified_deviation;
  std::uint64_t phase_id = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "update_index,op,n,static_calls_nonouter,static_calls_outer,wall_nanos,coreset_size,certified_deviation,phase_id";

std::string format_row(const MetricsRow& row);

struct ReplaySummary {
  std::vector<MetricsRow> rows;
  std::size_t queries = 0;
  std::size_t certified = 0;
  std::size_t certification_failures = 0;
  std::size_t root_mismatches = 0;
  std::size_t bound_violations = 0;  // rows with static_calls_nonouter > 4 ceil(log2 n)
  double worst_deviation = 0.0;
  std::vector<WeightedPoint> final_coreset;
  std::size_t final_n = 0;
  std::size_t node_count = 0;
};

/// Error raised while replaying, with the failing event for context.
class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::string what, bool contract) : std::runtime_error(std::move(what)), contract_(contract) {}
  [[nodiscard]] bool contract() const { return contract_; }

 private:
  bool contract_;
};

/// Replays events through the configured structure. Metrics rows are written
/// to `metrics` (with header) and one JSON snapshot line per Q to `snapshots`
/// when the streams are given.
ReplaySummary replay(const std::vector<StreamEvent>& events, const HarnessConfig& config,
                     std::ostream* metrics = nullptr, std::ostream* snapshots = nullptr);

/// JSON object {"update_index", "size", "points": [{"id","weight","coords"|"index"}]}.
std::string coreset_json(const std::vector<WeightedPoint>& points, std::uint64_t update_index);

// ---------------------------------------------------------------------------

enum class StreamKind { RandomMix, InsertionOnly, AdversarialDeleteCoreset, ClusterDrift };

StreamKind parse_stream_kind(std::string_view name);

struct GeneratorParams {
  StreamKind kind = StreamKind::RandomMix;
  /// Points (insertion-only, adversarial, drift window) or target events (random-mix).
  std::size_t n = 1000;
  std::size_t events = 0;  // random-mix and drift: total events; 0 means n
  double delete_fraction = 0.3;
  double update_fraction = 0.0;
  std::size_t query_every = 0;  // 0: only a final Q
  std::size_t dim = 2;
  std::size_t clusters = 3;
  double spread = 2.0;
  double extent = 100.0;
  std::uint64_t seed = 1;
};

/// Reproducible stream. The adversarial kind runs a tree built from `tree`
/// and deletes every point each query returns until the structure is empty.
std::vector<StreamEvent> generate_stream(const GeneratorParams& params, const TreeConfig& tree = {});

// ---------------------------------------------------------------------------

struct CompareRow {
  std::string structure;
  std::size_t events = 0;
  double mean_update_nanos = 0.0;
  std::uint64_t max_update_nanos = 0;
  std::size_t queries = 0;
  std::size_t certified = 0;
  std::size_t passed = 0;
  double mean_coreset_size = 0.0;
  std::size_t final_coreset_size = 0;
  std::size_t node_count = 0;
  std::string note;
};

/// Runs dyntree, merge-and-reduce (on the insertion-only prefix) and the
/// recompute baseline on the same stream.
std::vector<CompareRow> compare(const std::vector<StreamEvent>& events, const HarnessConfig& config);
std::string format_compare(const std::vector<CompareRow>& rows);

}  // namespace dyncore::tools
