#include "dyncore/mergereduce.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "dyncore/errors.hpp"

namespace dyncore {

MergeReduce::MergeReduce(MergeReduceConfig config) : config_(std::move(config)) {
  validate_power(config_.z);
  if (config_.k < 1) throw InvalidArgument("k must be at least 1");
  if (!(config_.eps > 0.0 && config_.eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(config_.lambda > 0.0 && config_.lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (config_.n_max < 2) throw InvalidArgument("capacity must be at least 2");
  ClusterSpec spec{config_.k, config_.z, config_.metric, config_.bicriteria_factor};
  ctor_ = make_constructor(config_.constructor, spec, config_.size_scale);
  if (config_.threshold_override && ctor_->size_function().kind == SizeKind::Unbounded) {
    throw InvalidArgument("a threshold override needs a sampling constructor");
  }

  const unsigned levels = std::max(1U, ceil_log2(config_.n_max));
  eps_s_ = config_.eps / (2.0 * levels);
  lambda_s_ = config_.lambda / (2.0 * static_cast<double>(config_.n_max));
  const std::uint64_t inv_eps = inverse_eps_ceil(config_.eps);
  leaf_tag_ = DenomTag::leaf(config_.n_max, config_.c_exp, inv_eps);
  leaf_denominator_ = leaf_tag_.value();

  if (config_.threshold_override) {
    s_ = *config_.threshold_override;
  } else {
    // Total numerator mass is at most N_max^(2c+2) ceil(1/eps), times
    // (s' * grid) per level for fractional constructors.
    const double n_log = std::log2(static_cast<double>(config_.n_max));
    const double head = (2.0 * config_.c_exp + 2.0) * n_log + std::log2(static_cast<double>(inv_eps));
    const bool fractional = ctor_->discipline() == WeightDiscipline::Fractional;
    const double grid = std::log2(static_cast<double>(log_eps_ceil(config_.n_max, config_.eps)));
    const SizeFunction& size = ctor_->size_function();
    std::uint64_t s = size(eps_s_, lambda_s_, head, config_.n_max);
    if (fractional) {
      for (int it = 0; it < 64; ++it) {
        const std::uint64_t next =
            size(eps_s_, lambda_s_, head + levels * (std::log2(static_cast<double>(s)) + grid), config_.n_max);
        if (next == s) break;
        s = next;
      }
    }
    s_ = s;
  }
}

UpdateReport MergeReduce::insert(const Point& p, const mpq_class& weight) {
  config_.metric.validate(p);
  if (inserts_ >= config_.n_max) throw InvalidArgument("merge-and-reduce capacity exhausted");
  mpq_class w = weight;
  w.canonicalize();
  if (w < 0) throw InvalidArgument("weight must be nonnegative");
  if (!within_input_bound(w, config_.n_max, config_.c_exp)) throw InvalidArgument("weight exceeds N_max^c");
  const auto start = std::chrono::steady_clock::now();

  mpz_class f = w.get_num() * leaf_denominator_;
  mpz_cdiv_q(f.get_mpz_t(), f.get_mpz_t(), w.get_den_mpz_t());
  std::vector<IntEntry> entry;
  entry.push_back(IntEntry{std::make_shared<const Point>(p), std::move(f)});
  NodeSet::Ptr carry = NodeSet::materialized(leaf_tag_, std::move(entry));

  std::size_t i = 0;
  while (i < buckets_.size() && buckets_[i].set) {
    carry = NodeSet::join(buckets_[i].set, carry);
    buckets_[i].set.reset();
    ++i;
  }
  if (i == buckets_.size()) buckets_.push_back(Bucket{});
  ++inserts_;

  UpdateReport report;
  report.update_index = inserts_;
  if (i >= 1 && carry->size() > s_) {
    StaticCallParams params;
    params.eps_s = eps_s_;
    params.lambda_s = lambda_s_;
    params.target_size = s_;
    params.n_p = config_.n_max;
    params.eps = config_.eps;
    params.seed = mix_seed(config_.seed, i, inserts_);
    const auto entries = carry->flatten();
    StaticOutput out = run_checked(*ctor_, entries, params, &config_.observer, false);
    carry = NodeSet::materialized(carry->tag().times(out.scale), std::move(out.entries));
    report.static_calls_nonouter = 1;
    report.reduced_calls = 1;
  }
  buckets_[i] = Bucket{std::move(carry), static_cast<unsigned>(i)};

  report.n = inserts_;
  report.coreset_size = query()->size();
  report.wall_nanos = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
  return report;
}

void MergeReduce::erase(PointId id) {
  throw UnsupportedOperation("merge-and-reduce is insertion-only; cannot delete point " + std::to_string(id));
}

void MergeReduce::update_weight(PointId id, const mpq_class&) {
  throw UnsupportedOperation("merge-and-reduce is insertion-only; cannot update point " + std::to_string(id));
}

NodeSet::Ptr MergeReduce::query() const {
  NodeSet::Ptr out = NodeSet::empty();
  for (const auto& b : buckets_) {
    if (b.set) out = NodeSet::join(out, b.set);
  }
  return out;
}

std::vector<bool> MergeReduce::pattern() const {
  std::vector<bool> bits;
  for (const auto& b : buckets_) bits.push_back(static_cast<bool>(b.set));
  while (!bits.empty() && !bits.back()) bits.pop_back();
  return bits;
}

unsigned MergeReduce::reduce_depth(std::size_t bucket) const {
  if (bucket >= buckets_.size() || !buckets_[bucket].set) throw InvalidArgument("bucket is empty");
  return buckets_[bucket].depth;
}

}  // namespace dyncore
