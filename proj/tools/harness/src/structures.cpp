#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "dyncore/errors.hpp"
#include "dyncore_tools/harness.hpp"

namespace dyncore::tools {

namespace {

class TreeStructure final : public Structure {
 public:
  explicit TreeStructure(const TreeConfig& config) : tree_(config) {}
  std::string_view name() const override { return "dyntree"; }
  UpdateReport insert(const Point& p, const mpq_class& w) override { return tree_.insert(p, w); }
  UpdateReport erase(PointId id) override { return tree_.erase(id); }
  UpdateReport update_weight(PointId id, const mpq_class& d) override { return tree_.update_weight(id, d); }
  NodeSet::Ptr query(std::uint64_t& calls) override {
    auto set = tree_.query();
    calls = tree_.last_query_calls();
    return set;
  }
  std::size_t size() const override { return tree_.size(); }
  std::uint64_t phase_id() const override { return tree_.phase().phase_id; }
  std::size_t node_count() const override { return tree_.node_count(); }
  std::optional<std::vector<PointId>> passthrough_root_ids() const override {
    if (tree_.config().constructor != "passthrough") return std::nullopt;
    std::vector<PointId> ids;
    for (const auto& e : tree_.root_set()->flatten()) ids.push_back(e.point->id);
    return ids;
  }

 private:
  DynamicCoresetTree tree_;
};

class MergeReduceStructure final : public Structure {
 public:
  explicit MergeReduceStructure(const MergeReduceConfig& config) : mr_(config) {}
  std::string_view name() const override { return "mergereduce"; }
  UpdateReport insert(const Point& p, const mpq_class& w) override { return mr_.insert(p, w); }
  UpdateReport erase(PointId id) override { mr_.erase(id); }
  UpdateReport update_weight(PointId id, const mpq_class& d) override { mr_.update_weight(id, d); }
  NodeSet::Ptr query(std::uint64_t& calls) override {
    calls = 0;
    return mr_.query();
  }
  std::size_t size() const override { return mr_.inserts(); }
  std::size_t node_count() const override { return mr_.pattern().size(); }

 private:
  MergeReduce mr_;
};

// Runs the static constructor on the whole rounded input after every update.
class RecomputeStructure final : public Structure {
 public:
  explicit RecomputeStructure(const TreeConfig& config) : config_(config) {
    ClusterSpec spec{config.k, config.z, config.metric, config.bicriteria_factor};
    ctor_ = make_constructor(config.constructor, spec, config.size_scale);
    inv_eps_ = inverse_eps_ceil(config.eps);
    set_ = NodeSet::empty();
  }
  std::string_view name() const override { return "recompute"; }

  UpdateReport insert(const Point& p, const mpq_class& w) override {
    if (live_.count(p.id) != 0) throw InvalidArgument("point " + std::to_string(p.id) + " is already live");
    config_.metric.validate(p);
    if (w < 0) throw InvalidArgument("weight must be nonnegative");
    live_.emplace(p.id, Item{std::make_shared<const Point>(p), w});
    return rebuild();
  }
  UpdateReport erase(PointId id) override {
    if (live_.erase(id) == 0) throw InvalidArgument("point " + std::to_string(id) + " is not live");
    return rebuild();
  }
  UpdateReport update_weight(PointId id, const mpq_class& d) override {
    auto it = live_.find(id);
    if (it == live_.end()) throw InvalidArgument("point " + std::to_string(id) + " is not live");
    mpq_class next = it->second.weight + d;
    if (next < 0) throw InvalidArgument("weight of point " + std::to_string(id) + " would become negative");
    it->second.weight = next;
    return rebuild();
  }
  NodeSet::Ptr query(std::uint64_t& calls) override {
    calls = 0;
    return set_;
  }
  void preload(const std::vector<std::pair<Point, mpq_class>>& points) override {
    for (const auto& [p, w] : points) {
      if (live_.count(p.id) != 0) throw InvalidArgument("point " + std::to_string(p.id) + " is already live");
      config_.metric.validate(p);
      if (w < 0) throw InvalidArgument("weight must be nonnegative");
      live_.emplace(p.id, Item{std::make_shared<const Point>(p), w});
    }
    rebuild();
  }
  std::size_t size() const override { return live_.size(); }

 private:
  struct Item {
    PointRef point;
    mpq_class weight;
  };

  UpdateReport rebuild() {
    const auto start = std::chrono::steady_clock::now();
    ++updates_;
    const std::uint64_t n_p = 4 * std::max<std::uint64_t>(live_.size(), 2);
    const DenomTag tag = DenomTag::leaf(n_p, config_.c_exp, inv_eps_);
    const mpz_class d = tag.value();
    std::vector<IntEntry> entries;
    entries.reserve(live_.size());
    for (const auto& [id, item] : live_) {
      mpz_class f = item.weight.get_num() * d;
      mpz_cdiv_q(f.get_mpz_t(), f.get_mpz_t(), item.weight.get_den_mpz_t());
      entries.push_back(IntEntry{item.point, std::move(f)});
    }
    std::uint64_t target = kUnboundedSize;
    if (config_.outer_target_override) {
      target = *config_.outer_target_override;
    } else {
      const double log2_w = (2.0 * config_.c_exp + 2.0) * std::log2(static_cast<double>(n_p)) +
                            std::log2(static_cast<double>(inv_eps_));
      target = ctor_->size_function()(config_.eps / 3.0, config_.lambda / 2.0, log2_w, n_p);
    }
    UpdateReport report;
    report.update_index = updates_;
    report.static_calls_outer = 1;
    if (entries.size() <= target) {
      set_ = NodeSet::materialized(tag, std::move(entries));
    } else {
      StaticCallParams p;
      p.eps_s = config_.eps / 3.0;
      p.lambda_s = config_.lambda / 2.0;
      p.target_size = target;
      p.n_p = n_p;
      p.eps = config_.eps;
      p.seed = mix_seed(config_.seed, 0, updates_);
      StaticOutput out = run_checked(*ctor_, entries, p, &config_.observer, true);
      set_ = NodeSet::materialized(tag.times(out.scale), std::move(out.entries));
      report.reduced_calls = 1;
    }
    report.n = live_.size();
    report.coreset_size = set_->size();
    report.wall_nanos = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
    return report;
  }

  TreeConfig config_;
  std::unique_ptr<StaticConstructor> ctor_;
  std::uint64_t inv_eps_ = 2;
  std::map<PointId, Item> live_;
  NodeSet::Ptr set_;
  std::uint64_t updates_ = 0;
};

}  // namespace

StructureKind parse_structure(std::string_view name) {
  if (name == "dyntree") return StructureKind::DynTree;
  if (name == "mergereduce") return StructureKind::MergeReduce;
  if (name == "recompute") return StructureKind::Recompute;
  throw InvalidArgument("unknown structure '" + std::string(name) + "'");
}

std::string_view structure_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::DynTree:
      return "dyntree";
    case StructureKind::MergeReduce:
      return "mergereduce";
    case StructureKind::Recompute:
      return "recompute";
  }
  return "?";
}

VerifyMode parse_verify(std::string_view name) {
  if (name == "none") return VerifyMode::None;
  if (name == "sampled") return VerifyMode::Sampled;
  if (name == "exhaustive") return VerifyMode::Exhaustive;
  throw InvalidArgument("unknown verification mode '" + std::string(name) + "'");
}

std::unique_ptr<Structure> make_structure(const HarnessConfig& config) {
  switch (config.structure) {
    case StructureKind::DynTree:
      return std::make_unique<TreeStructure>(config.tree);
    case StructureKind::MergeReduce: {
      const TreeConfig& t = config.tree;
      MergeReduceConfig m;
      m.k = t.k;
      m.z = t.z;
      m.metric = t.metric;
      m.eps = t.eps;
      m.lambda = t.lambda;
      m.c_exp = t.c_exp;
      m.constructor = t.constructor;
      m.size_scale = t.size_scale;
      m.bicriteria_factor = t.bicriteria_factor;
      m.threshold_override = t.threshold_override;
      m.n_max = config.n_max;
      m.seed = t.seed;
      m.observer = t.observer;
      return std::make_unique<MergeReduceStructure>(m);
    }
    case StructureKind::Recompute:
      return std::make_unique<RecomputeStructure>(config.tree);
  }
  throw InvalidArgument("unknown structure");
}

}  // namespace dyncore::tools
