#include "dyncore/dyntree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "dyncore/errors.hpp"

namespace dyncore {

namespace {

std::uint64_t now_nanos() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

unsigned floor_log2(std::uint64_t x) {
  unsigned r = 0;
  while (x > 1) {
    x >>= 1;
    ++r;
  }
  return r;
}

double log2_u64(std::uint64_t x) { return std::log2(static_cast<double>(x)); }

mpz_class pow_mpz(const mpz_class& base, unsigned long exponent) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
  return r;
}

mpz_class from_u64(std::uint64_t v) {
  mpz_class r;
  mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return r;
}

}  // namespace

PhaseSchedule phase_schedule(std::uint64_t n0, double eps, double lambda) {
  PhaseSchedule s{};
  if (n0 == 0) {
    s.n_p = 8;
    s.length = 2;
  } else {
    s.n_p = 4 * std::max<std::uint64_t>(n0, 2);
    s.length = std::max<std::uint64_t>(1, (n0 + 1) / 2);
  }
  s.eps_s = eps / (6.0 * ceil_log2(s.n_p));
  s.lambda_s = lambda / (2.0 * static_cast<double>(s.n_p));
  return s;
}

DynamicCoresetTree::DynamicCoresetTree(TreeConfig config) : config_(std::move(config)) {
  validate_power(config_.z);
  if (config_.k < 1) throw InvalidArgument("k must be at least 1");
  if (!(config_.eps > 0.0 && config_.eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(config_.lambda > 0.0 && config_.lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (config_.c_exp < 1) throw InvalidArgument("c must be at least 1");
  ClusterSpec spec{config_.k, config_.z, config_.metric, config_.bicriteria_factor};
  ctor_ = make_constructor(config_.constructor, spec, config_.size_scale);
  if (config_.threshold_override) {
    if (*config_.threshold_override < 1) throw InvalidArgument("threshold must be at least 1");
    if (ctor_->size_function().kind == SizeKind::Unbounded) {
      throw InvalidArgument("a threshold override needs a sampling constructor");
    }
  }
  if (config_.bucket_capacity && *config_.bucket_capacity < 2) throw InvalidArgument("bucket capacity must be at least 2");
  if (config_.outer_target_override && *config_.outer_target_override < 1) {
    throw InvalidArgument("outer target must be at least 1");
  }
  inv_eps_ = inverse_eps_ceil(config_.eps);
  nodes_.resize(1);
  const auto sched = phase_schedule(0, config_.eps, config_.lambda);
  phase_.n_p = sched.n_p;
  phase_.n_pp = sched.n_p;
  phase_.length = sched.length;
  phase_.updates_left = sched.length;
  phase_.eps_s = sched.eps_s;
  phase_.lambda_s = sched.lambda_s;
  compute_phase_constants(true);
  reset_cursor();
  outer_set_ = NodeSet::empty();
  outer_valid_ = true;
}

void DynamicCoresetTree::compute_phase_constants(bool initial) {
  const bool fractional = ctor_->discipline() == WeightDiscipline::Fractional;
  const unsigned h = ceil_log2(phase_.n_p);
  StaticCallParams probe;
  probe.eps = config_.eps;
  const double delta = ctor_->weight_inflation(probe);
  phase_.log_eps_p = log_eps_ceil(phase_.n_p, config_.eps);
  if (initial) phase_.log_eps_pp = phase_.log_eps_p;

  // ceil(n_p (1+delta)^h) * (n_p n_pp)^(2c+1) * ceil(1/eps)
  mpq_class growth = 1;
  const mpq_class one_plus(1.0 + delta);
  for (unsigned i = 0; i < h; ++i) growth *= one_plus;
  growth *= from_u64(phase_.n_p);
  mpz_class head;
  mpz_cdiv_q(head.get_mpz_t(), growth.get_num_mpz_t(), growth.get_den_mpz_t());
  head *= pow_mpz(from_u64(phase_.n_p) * from_u64(phase_.n_pp), 2 * config_.c_exp + 1);
  head *= from_u64(inv_eps_);
  const double head_log2 = log2_mpz(head);

  const SizeFunction& size = ctor_->size_function();
  auto fractional_log2 = [&](std::uint64_t s, std::uint64_t s_pp) {
    return head_log2 + h * (log2_u64(s) + log2_u64(s_pp) + log2_u64(phase_.log_eps_p) + log2_u64(phase_.log_eps_pp));
  };

  std::uint64_t s = kUnboundedSize;
  if (config_.threshold_override) {
    s = *config_.threshold_override;
  } else if (!fractional) {
    s = size(phase_.eps_s, phase_.lambda_s, head_log2, phase_.n_p);
  } else {
    s = 1;
    for (int it = 0; it < 64; ++it) {
      const std::uint64_t next =
          size(phase_.eps_s, phase_.lambda_s, fractional_log2(s, initial ? s : phase_.s_pp), phase_.n_p);
      if (next == s) break;
      s = next;
    }
  }
  phase_.s_p = s;
  if (initial) phase_.s_pp = s;

  mpz_class w = head;
  if (fractional) {
    w *= pow_mpz(from_u64(phase_.s_p) * from_u64(phase_.s_pp) * from_u64(phase_.log_eps_p) *
                     from_u64(phase_.log_eps_pp),
                 h);
  }
  phase_.w_p = w;
  phase_.outer_target = config_.outer_target_override
                            ? *config_.outer_target_override
                            : size(config_.eps / 3.0, config_.lambda / 2.0, log2_mpz(w), phase_.n_p);

  leaf_tag_ = DenomTag::leaf(phase_.n_p, config_.c_exp, inv_eps_);
  leaf_denominator_ = leaf_tag_.value();
}

void DynamicCoresetTree::reset_cursor() {
  if (m_ == 0) {
    phase_.cursor = 1;
    return;
  }
  phase_.cursor = is_power_of_two(m_) ? m_ : (std::uint64_t{1} << (ceil_log2(m_) - 1));
}

void DynamicCoresetTree::roll_phase() {
  if (config_.audit_phase_sweep && n_ > 0) {
    for (std::size_t v = 1; v < 2 * m_; ++v) {
      if (nodes_[v].stamp.phase_id != phase_.phase_id) {
        audit_failures_.push_back("phase " + std::to_string(phase_.phase_id) + ": node " + std::to_string(v) +
                                  " last computed in phase " + std::to_string(nodes_[v].stamp.phase_id));
      }
    }
  }
  const auto sched = phase_schedule(n_, config_.eps, config_.lambda);
  const bool reset = n_ == 0;
  phase_.phase_id += 1;
  phase_.n0 = n_;
  phase_.n_pp = reset ? sched.n_p : phase_.n_p;
  phase_.n_p = sched.n_p;
  phase_.length = sched.length;
  phase_.updates_left = sched.length;
  phase_.eps_s = sched.eps_s;
  phase_.lambda_s = sched.lambda_s;
  phase_.s_pp = phase_.s_p;
  phase_.log_eps_pp = phase_.log_eps_p;
  compute_phase_constants(reset);
  reset_cursor();
}

DenomTag DynamicCoresetTree::level_denominator(unsigned level) const {
  DenomTag d = DenomTag::leaf(phase_.n_p, config_.c_exp, inv_eps_)
                   .common_multiple(DenomTag::leaf(phase_.n_pp, config_.c_exp, inv_eps_));
  if (ctor_->discipline() == WeightDiscipline::Fractional && level > 0) {
    d.multiply(FactorKind::Threshold, phase_.s_p, level);
    d.multiply(FactorKind::Threshold, phase_.s_pp, level);
    d.multiply(FactorKind::LogEps, phase_.log_eps_p, level);
    d.multiply(FactorKind::LogEps, phase_.log_eps_pp, level);
  }
  return d;
}

std::uint64_t DynamicCoresetTree::bucket_capacity() const {
  if (config_.bucket_capacity) return *config_.bucket_capacity;
  return config_.threshold_override ? *config_.threshold_override : phase_.s_p;
}

void DynamicCoresetTree::check_weight_bound(const mpq_class& w) const {
  if (w < 0) throw InvalidArgument("weight must be nonnegative");
  if (!within_input_bound(w, phase_.n_p, config_.c_exp)) {
    throw InvalidArgument("weight " + w.get_str() + " exceeds the bound n_p^c with n_p = " +
                          std::to_string(phase_.n_p));
  }
}

StaticCallParams DynamicCoresetTree::node_params(std::size_t index) const {
  StaticCallParams p;
  p.eps_s = phase_.eps_s;
  p.lambda_s = phase_.lambda_s;
  p.target_size = phase_.s_p;
  p.n_p = phase_.n_p;
  p.eps = config_.eps;
  p.seed = mix_seed(config_.seed, index, update_counter_);
  return p;
}

void DynamicCoresetTree::round_leaf(std::size_t index) {
  Node& node = nodes_[index];
  std::vector<IntEntry> entries;
  entries.reserve(node.bucket.size());
  for (const auto& item : node.bucket) {
    mpz_class f = item.weight.get_num() * leaf_denominator_;
    mpz_cdiv_q(f.get_mpz_t(), f.get_mpz_t(), item.weight.get_den_mpz_t());
    entries.push_back(IntEntry{item.point, std::move(f)});
  }
  node.set = NodeSet::materialized(leaf_tag_, std::move(entries));
  node.stamp = Stamp{phase_.n_p, phase_.phase_id, phase_.eps_s, phase_.lambda_s, bucket_capacity(), 0};
}

void DynamicCoresetTree::run_internal_node(std::size_t index) {
  const auto& left = nodes_[2 * index].set;
  const auto& right = nodes_[2 * index + 1].set;
  NodeSet::Ptr joined = NodeSet::join(left, right);
  const StaticCallParams params = node_params(index);
  if (joined->size() > phase_.s_p) {
    const auto entries = joined->flatten();
    StaticOutput out = run_checked(*ctor_, entries, params, &config_.observer, false);
    joined = NodeSet::materialized(joined->tag().times(out.scale), std::move(out.entries));
    ++pending_reduced_;
  }
  Node& node = nodes_[index];
  node.set = std::move(joined);
  node.stamp = Stamp{phase_.n_p, phase_.phase_id, phase_.eps_s, phase_.lambda_s, phase_.s_p, params.seed};
}

void DynamicCoresetTree::run_outer() {
  NodeSet::Ptr root = root_set();
  if (root->size() <= phase_.outer_target) {
    outer_set_ = root;
    return;
  }
  StaticCallParams p;
  p.eps_s = config_.eps / 3.0;
  p.lambda_s = config_.lambda / 2.0;
  p.target_size = phase_.outer_target;
  p.n_p = phase_.n_p;
  p.eps = config_.eps;
  p.seed = mix_seed(config_.seed, 0, update_counter_);
  const auto entries = root->flatten();
  StaticOutput out = run_checked(*ctor_, entries, p, &config_.observer, true);
  outer_set_ = NodeSet::materialized(root->tag().times(out.scale), std::move(out.entries));
}

void DynamicCoresetTree::reindex(std::size_t index) {
  for (const auto& item : nodes_[index].bucket) where_[item.id] = index;
}

void DynamicCoresetTree::refresh_step(std::vector<std::size_t>& dirty) {
  const std::uint64_t last = m_ == 0 ? 0 : 2 * m_ - 1;
  for (std::uint64_t pos : {phase_.cursor, phase_.cursor + 1}) {
    if (pos < 1 || pos > last) continue;
    if (is_leaf(pos)) {
      round_leaf(pos);
    } else {
      for (std::uint64_t c : {2 * pos, 2 * pos + 1}) {
        if (is_leaf(c)) round_leaf(c);
      }
    }
    dirty.push_back(pos);
  }
  if (phase_.cursor <= last) phase_.cursor += 2;
}

std::size_t DynamicCoresetTree::heap_insert(std::vector<LeafItem> bucket, std::vector<std::size_t>& dirty) {
  if (m_ == 0) {
    nodes_.assign(2, Node{});
    nodes_[1].bucket = std::move(bucket);
    m_ = 1;
    reindex(1);
    round_leaf(1);
    dirty.push_back(1);
    return 1;
  }
  const std::size_t old = m_;
  nodes_.resize(2 * old + 2);
  nodes_[2 * old].bucket = std::move(nodes_[old].bucket);
  nodes_[old].bucket.clear();
  nodes_[2 * old + 1].bucket = std::move(bucket);
  m_ = old + 1;
  if (p_s_ == old) p_s_ = 2 * old;
  for (std::size_t v : {2 * old, 2 * old + 1}) {
    reindex(v);
    round_leaf(v);
    dirty.push_back(v);
  }
  return 2 * old + 1;
}

void DynamicCoresetTree::heap_remove_leaf(std::size_t leaf, std::vector<std::size_t>& dirty) {
  if (p_s_ == leaf) p_s_ = 0;
  if (m_ == 1) {
    nodes_.assign(1, Node{});
    m_ = 0;
    p_s_ = 0;
    return;
  }
  const std::size_t v = 2 * m_ - 1;
  const std::size_t sib = 2 * m_ - 2;
  const std::size_t parent = m_ - 1;
  std::vector<std::size_t> written;
  auto relocate = [&](std::size_t from, std::size_t to) {
    nodes_[to].bucket = std::move(nodes_[from].bucket);
    if (p_s_ == from) p_s_ = to;
    written.push_back(to);
  };
  if (leaf == v) {
    relocate(sib, parent);
  } else if (leaf == sib) {
    relocate(v, parent);
  } else {
    relocate(v, leaf);
    relocate(sib, parent);
  }
  nodes_.resize(2 * m_ - 2);
  m_ -= 1;
  for (std::size_t w : written) {
    reindex(w);
    round_leaf(w);
    dirty.push_back(w);
  }
}

void DynamicCoresetTree::begin_update() {
  ++update_counter_;
  pending_reduced_ = 0;
}

UpdateReport DynamicCoresetTree::finish_update(std::vector<std::size_t> dirty, std::uint64_t start_nanos) {
  std::vector<std::size_t> internal;
  for (std::size_t d : dirty) {
    if (d == 0 || d >= 2 * m_) continue;
    for (std::size_t v = is_leaf(d) ? d / 2 : d; v >= 1; v /= 2) internal.push_back(v);
  }
  std::sort(internal.begin(), internal.end(), std::greater<>());
  internal.erase(std::unique(internal.begin(), internal.end()), internal.end());
  for (std::size_t v : internal) run_internal_node(v);

  UpdateReport report;
  report.update_index = update_counter_;
  report.static_calls_nonouter = internal.size();
  report.reduced_calls = pending_reduced_;

  if (phase_.updates_left > 0) phase_.updates_left -= 1;
  if (phase_.updates_left == 0 || n_ == 0) {
    roll_phase();
    report.phase_rolled = true;
  }

  if (config_.outer == OuterMode::Eager) {
    run_outer();
    outer_valid_ = true;
    report.static_calls_outer = 1;
    report.coreset_size = outer_set_->size();
  } else {
    outer_valid_ = false;
  }
  total_nonouter_ += report.static_calls_nonouter;
  total_outer_ += report.static_calls_outer;
  report.n = n_;
  report.phase_id = phase_.phase_id;
  report.wall_nanos = now_nanos() - start_nanos;
  return report;
}

UpdateReport DynamicCoresetTree::insert(const Point& p, const mpq_class& weight) {
  if (where_.count(p.id) != 0) throw InvalidArgument("point " + std::to_string(p.id) + " is already live");
  config_.metric.validate(p);
  mpq_class w = weight;
  w.canonicalize();
  check_weight_bound(w);
  const std::uint64_t start = now_nanos();
  begin_update();
  std::vector<std::size_t> dirty;
  refresh_step(dirty);

  LeafItem item{p.id, std::make_shared<const Point>(p), w};
  n_ += 1;
  if (!config_.bucketed) {
    heap_insert({std::move(item)}, dirty);
  } else {
    const std::uint64_t cap = bucket_capacity();
    const std::uint64_t half = cap / 2 + cap % 2;  // 2 * size >= cap  <=>  size >= half
    if (p_s_ != 0) {
      nodes_[p_s_].bucket.push_back(std::move(item));
      where_[p.id] = p_s_;
      round_leaf(p_s_);
      dirty.push_back(p_s_);
      if (nodes_[p_s_].bucket.size() >= half) p_s_ = 0;
    } else {
      const std::size_t leaf = heap_insert({std::move(item)}, dirty);
      if (1 < half) p_s_ = leaf;
    }
  }
  return finish_update(std::move(dirty), start);
}

UpdateReport DynamicCoresetTree::erase(PointId id) {
  const auto it = where_.find(id);
  if (it == where_.end()) throw InvalidArgument("point " + std::to_string(id) + " is not live");
  const std::size_t leaf = it->second;
  const std::uint64_t start = now_nanos();
  begin_update();
  std::vector<std::size_t> dirty;
  refresh_step(dirty);

  auto& bucket = nodes_[leaf].bucket;
  bucket.erase(std::find_if(bucket.begin(), bucket.end(), [&](const LeafItem& x) { return x.id == id; }));
  where_.erase(id);
  n_ -= 1;
  if (bucket.empty()) {
    heap_remove_leaf(leaf, dirty);
  } else {
    round_leaf(leaf);
    dirty.push_back(leaf);
    const std::uint64_t cap = bucket_capacity();
    const std::uint64_t half = cap / 2 + cap % 2;
    if (bucket.size() < half) {
      if (p_s_ == 0) {
        p_s_ = leaf;
      } else if (p_s_ != leaf) {
        auto& target = nodes_[p_s_].bucket;
        for (auto& x : nodes_[leaf].bucket) target.push_back(std::move(x));
        nodes_[leaf].bucket.clear();
        const std::size_t keep = p_s_;
        reindex(keep);
        round_leaf(keep);
        dirty.push_back(keep);
        heap_remove_leaf(leaf, dirty);
        if (p_s_ != 0 && nodes_[p_s_].bucket.size() >= half) p_s_ = 0;
      }
    }
  }
  return finish_update(std::move(dirty), start);
}

UpdateReport DynamicCoresetTree::update_weight(PointId id, const mpq_class& delta) {
  const auto it = where_.find(id);
  if (it == where_.end()) throw InvalidArgument("point " + std::to_string(id) + " is not live");
  const std::size_t leaf = it->second;
  auto& bucket = nodes_[leaf].bucket;
  auto item = std::find_if(bucket.begin(), bucket.end(), [&](const LeafItem& x) { return x.id == id; });
  mpq_class next = item->weight + delta;
  next.canonicalize();
  if (next < 0) throw InvalidArgument("weight of point " + std::to_string(id) + " would become negative");
  check_weight_bound(next);
  const std::uint64_t start = now_nanos();
  begin_update();
  std::vector<std::size_t> dirty;
  refresh_step(dirty);
  // The refresh step does not move buckets, so `leaf` is still valid.
  auto& live = nodes_[leaf].bucket;
  std::find_if(live.begin(), live.end(), [&](const LeafItem& x) { return x.id == id; })->weight = next;
  round_leaf(leaf);
  dirty.push_back(leaf);
  return finish_update(std::move(dirty), start);
}

NodeSet::Ptr DynamicCoresetTree::query() {
  last_query_calls_ = 0;
  if (!outer_valid_) {
    run_outer();
    outer_valid_ = true;
    last_query_calls_ = 1;
    total_outer_ += 1;
  }
  return outer_set_;
}

std::vector<WeightedPoint> DynamicCoresetTree::query_points() { return query()->to_weighted_points(); }

NodeSet::Ptr DynamicCoresetTree::root_set() const { return m_ == 0 ? NodeSet::empty() : nodes_[1].set; }

NodeSet::Ptr DynamicCoresetTree::node_set(std::size_t index) const {
  if (index < 1 || index >= 2 * m_) throw InvalidArgument("node index out of range");
  return nodes_[index].set;
}

const Stamp& DynamicCoresetTree::stamp(std::size_t index) const {
  if (index < 1 || index >= 2 * m_) throw InvalidArgument("node index out of range");
  return nodes_[index].stamp;
}

std::size_t DynamicCoresetTree::leaf_of(PointId id) const {
  const auto it = where_.find(id);
  if (it == where_.end()) throw InvalidArgument("point " + std::to_string(id) + " is not live");
  return it->second;
}

std::vector<PointId> DynamicCoresetTree::leaf_ids(std::size_t index) const {
  if (!is_leaf(index)) throw InvalidArgument("node " + std::to_string(index) + " is not a leaf");
  std::vector<PointId> ids;
  for (const auto& item : nodes_[index].bucket) ids.push_back(item.id);
  return ids;
}

const mpq_class& DynamicCoresetTree::true_weight(PointId id) const {
  const auto& bucket = nodes_[leaf_of(id)].bucket;
  return std::find_if(bucket.begin(), bucket.end(), [&](const LeafItem& x) { return x.id == id; })->weight;
}

std::vector<WeightedPoint> DynamicCoresetTree::rounded_input() const {
  std::vector<WeightedPoint> out;
  for (std::size_t v = m_; v < 2 * m_; ++v) {
    auto pts = nodes_[v].set->to_weighted_points();
    out.insert(out.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
  }
  return out;
}

InvariantReport DynamicCoresetTree::check_invariants() const {
  InvariantReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    if (r.failures.size() < 20) r.failures.push_back(std::move(msg));
  };

  if (m_ == 0) {
    if (n_ != 0) fail("empty tree with n = " + std::to_string(n_));
    if (nodes_.size() != 1) fail("empty tree keeps node storage");
    if (!where_.empty()) fail("empty tree keeps id entries");
    return r;
  }
  if (nodes_.size() != 2 * m_) fail("node storage does not match the leaf count");
  if (where_.size() != n_) fail("id map size differs from n");
  if (!config_.bucketed && m_ != n_) fail("leaf count " + std::to_string(m_) + " differs from n = " + std::to_string(n_));

  const unsigned depth_max = floor_log2(2 * m_ - 1);
  std::vector<DenomTag> d_level(depth_max + 1);
  for (unsigned l = 0; l <= depth_max; ++l) d_level[l] = level_denominator(l);
  struct Group {
    DenomTag tag;
    mpz_class sum;
  };
  std::vector<std::vector<Group>> level_groups(depth_max + 1);

  std::size_t points = 0;
  for (std::size_t v = 1; v < 2 * m_; ++v) {
    const Node& node = nodes_[v];
    const std::string at = "node " + std::to_string(v) + ": ";
    const bool leaf = is_leaf(v);
    if (!node.set) {
      fail(at + "missing set");
      continue;
    }
    if (leaf) {
      if (node.bucket.empty()) fail(at + "empty leaf");
      if (!config_.bucketed && node.bucket.size() != 1) fail(at + "leaf holds more than one point");
      if (node.set->size() != node.bucket.size()) fail(at + "leaf set differs from its bucket");
      for (const auto& item : node.bucket) {
        const auto it = where_.find(item.id);
        if (it == where_.end() || it->second != v) fail(at + "id map out of date for " + std::to_string(item.id));
      }
      points += node.bucket.size();
    } else {
      if (!node.bucket.empty()) fail(at + "internal node holds points");
      if (2 * v + 1 >= 2 * m_) fail(at + "internal node lacks two children");
      if (node.set->size() > node.stamp.threshold) fail(at + "cached set exceeds its threshold");
    }
    if (node.stamp.n_p != phase_.n_p && node.stamp.n_p != phase_.n_pp) {
      fail(at + "stale stamp n_p = " + std::to_string(node.stamp.n_p));
    }
    const unsigned level = depth_max - floor_log2(v);
    if (!node.set->tag().divides_structurally(d_level[level])) {
      fail(at + "denominator " + node.set->tag().to_string() + " does not divide D(" + std::to_string(level) + ")");
      continue;
    }
    auto& groups = level_groups[level];
    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) { return x.tag == node.set->tag(); });
    if (g == groups.end()) {
      groups.push_back(Group{node.set->tag(), node.set->numerator_sum()});
    } else {
      g->sum += node.set->numerator_sum();
    }
  }
  if (points != n_) fail("leaves hold " + std::to_string(points) + " points, n = " + std::to_string(n_));

  for (unsigned l = 0; l <= depth_max; ++l) {
    mpz_class total = 0;
    for (const auto& g : level_groups[l]) total += g.sum * g.tag.quotient_into(d_level[l]);
    if (total > phase_.w_p) fail("level " + std::to_string(l) + " numerator sum exceeds W_p");
  }
  return r;
}

}  // namespace dyncore
