#include "dyncore/static_coreset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "dyncore/errors.hpp"

namespace dyncore {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index i with probability cumulative-share; cumulative is an inclusive prefix sum.
std::size_t draw_index(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  const double total = cumulative.back();
  const double u = uniform01(rng) * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
  // Skip zero-width slots that upper_bound can land on at the boundary.
  while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
  return i;
}

std::vector<double> prefix_sums(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  std::partial_sum(values.begin(), values.end(), out.begin());
  return out;
}

std::vector<double> to_doubles(std::span<const IntEntry> input) {
  std::vector<double> w(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) w[i] = input[i].weight.get_d();
  return w;
}

mpz_class total_of(std::span<const IntEntry> input) {
  mpz_class t = 0;
  for (const auto& e : input) t += e.weight;
  return t;
}

// Splits `total` over the keys proportionally to `counts` (sum m), exactly.
std::vector<mpz_class> apportion(const mpz_class& total, const std::vector<std::uint64_t>& counts) {
  std::uint64_t m = 0;
  for (auto c : counts) m += c;
  std::vector<mpz_class> shares(counts.size());
  std::vector<std::pair<mpz_class, std::size_t>> remainders(counts.size());
  mpz_class assigned = 0;
  const mpz_class mz(static_cast<unsigned long>(m));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const mpz_class scaled = total * static_cast<unsigned long>(counts[i]);
    mpz_fdiv_qr(shares[i].get_mpz_t(), remainders[i].first.get_mpz_t(), scaled.get_mpz_t(), mz.get_mpz_t());
    remainders[i].second = i;
    assigned += shares[i];
  }
  mpz_class left = total - assigned;
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; left > 0 && r < remainders.size(); ++r, --left) shares[remainders[r].second] += 1;
  return shares;
}

// Draws m times by weight from `members` (positions into input); returns
// (position, count) sorted by position.
std::vector<std::pair<std::size_t, std::uint64_t>> draw_counts(const std::vector<std::size_t>& members,
                                                               const std::vector<double>& weight,
                                                               std::uint64_t m, std::mt19937_64& rng) {
  std::vector<double> w(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) w[i] = weight[members[i]];
  const auto cumulative = prefix_sums(w);
  std::map<std::size_t, std::uint64_t> counts;
  for (std::uint64_t t = 0; t < m; ++t) ++counts[members[draw_index(cumulative, rng)]];
  return {counts.begin(), counts.end()};
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = a;
  for (std::uint64_t v : {b, c}) {
    x += 0x9E3779B97F4A7C15ULL + v * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x ^= x >> 31;
  }
  return x;
}

std::vector<IntEntry> merge_duplicates(std::span<const IntEntry> input, const Metric& metric) {
  const bool matrix = metric.is_matrix();
  auto less = [&](std::size_t a, std::size_t b) {
    const Point& p = *input[a].point;
    const Point& q = *input[b].point;
    if (matrix) return p.metric_index < q.metric_index;
    return p.coords < q.coords;
  };
  std::vector<std::size_t> order;
  order.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i].weight != 0) order.push_back(i);
  }
  // stable: each run of equal locations starts with its first occurrence
  std::stable_sort(order.begin(), order.end(), less);
  std::vector<std::size_t> head(input.size(), input.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    const bool starts = j == 0 || less(order[j - 1], order[j]);
    head[order[j]] = starts ? order[j] : head[order[j - 1]];
  }
  std::vector<std::size_t> slot(input.size());
  std::vector<IntEntry> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (head[i] == input.size()) continue;
    if (head[i] == i) {
      slot[i] = out.size();
      out.push_back(input[i]);
    } else {
      out[slot[head[i]]].weight += input[i].weight;
    }
  }
  return out;
}

BicriteriaResult d2_sample_bicriteria(std::span<const IntEntry> input, const ClusterSpec& spec, double lambda_s,
                                      std::uint64_t seed) {
  if (input.empty()) throw InvalidArgument("bicriteria on an empty set");
  if (spec.k < 1) throw InvalidArgument("k must be at least 1");
  if (!(lambda_s > 0.0 && lambda_s < 1.0)) throw InvalidArgument("lambda_s must lie in (0, 1)");
  const std::size_t n = input.size();
  const auto log_term = static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::log2(1.0 / lambda_s))));
  const std::uint64_t want = std::min<std::uint64_t>(
      static_cast<std::uint64_t>(std::max(1U, spec.bicriteria_factor)) * static_cast<std::uint64_t>(spec.k) * log_term,
      n);

  const auto weight = to_doubles(input);
  std::mt19937_64 rng(seed);
  BicriteriaResult r;
  r.assignment.assign(n, 0);
  r.power_distance.assign(n, std::numeric_limits<double>::infinity());

  auto add_center = [&](std::size_t pos) {
    const std::size_t slot = r.centers.size();
    r.center_index.push_back(pos);
    r.centers.push_back(*input[pos].point);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = spec.metric.power_distance(*input[i].point, *input[pos].point, spec.z);
      if (d < r.power_distance[i]) {
        r.power_distance[i] = d;
        r.assignment[i] = slot;
      }
    }
  };

  add_center(draw_index(prefix_sums(weight), rng));
  std::vector<double> mass(n);
  while (r.centers.size() < want) {
    for (std::size_t i = 0; i < n; ++i) mass[i] = weight[i] * r.power_distance[i];
    auto cumulative = prefix_sums(mass);
    if (!(cumulative.back() > 0.0)) break;
    add_center(draw_index(cumulative, rng));
  }

  r.cluster_cost.assign(r.centers.size(), 0.0);
  r.cluster_weight.assign(r.centers.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.cluster_cost[r.assignment[i]] += weight[i] * r.power_distance[i];
    r.cluster_weight[r.assignment[i]] += weight[i];
    r.total_cost += weight[i] * r.power_distance[i];
  }
  return r;
}

StaticOutput passthrough(std::span<const IntEntry> input) {
  return StaticOutput{std::vector<IntEntry>(input.begin(), input.end()), DenomTag{}};
}

StaticOutput uniform_sample(std::span<const IntEntry> input, std::uint64_t m, std::uint64_t seed) {
  if (input.empty()) throw InvalidArgument("uniform sample of an empty set");
  if (m == 0) throw InvalidArgument("uniform sample size must be at least 1");
  if (m >= input.size()) return passthrough(input);
  std::vector<std::size_t> members(input.size());
  std::iota(members.begin(), members.end(), 0);
  std::mt19937_64 rng(seed);
  const auto counts = draw_counts(members, to_doubles(input), m, rng);
  const mpz_class total = total_of(input);
  StaticOutput out;
  out.scale = DenomTag{}.multiply(FactorKind::Threshold, m);
  for (const auto& [pos, c] : counts) {
    out.entries.push_back(IntEntry{input[pos].point, total * static_cast<unsigned long>(c)});
  }
  return out;
}

StaticOutput ring_sample(std::span<const IntEntry> input, const ClusterSpec& spec, const StaticCallParams& params) {
  if (input.empty()) return StaticOutput{};
  const std::uint64_t target = params.target_size;
  if (target == 0) throw InvalidArgument("ring sample target must be at least 1");
  if (input.size() <= target) return passthrough(input);

  const auto b = d2_sample_bicriteria(input, spec, params.lambda_s, mix_seed(params.seed, 1));
  const auto weight = to_doubles(input);
  double total_w = 0.0;
  for (double w : weight) total_w += w;
  const double r0 = std::pow(b.total_cost / total_w, 1.0 / spec.z);

  // (center slot, ring) -> members; ring -1 is the inner ball [0, r0).
  std::map<std::pair<std::size_t, int>, std::vector<std::size_t>> rings;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double d = std::pow(b.power_distance[i], 1.0 / spec.z);
    int ring = -1;
    if (r0 > 0.0 && d >= r0) ring = static_cast<int>(std::floor(std::log2(d / r0)));
    rings[{b.assignment[i], ring}].push_back(i);
  }

  std::vector<std::vector<std::size_t>> groups;
  for (auto& [key, members] : rings) groups.push_back(std::move(members));
  if (target / groups.size() == 0) {
    std::map<std::size_t, std::vector<std::size_t>> per_center;
    for (std::size_t i = 0; i < input.size(); ++i) per_center[b.assignment[i]].push_back(i);
    groups.clear();
    for (auto& [slot, members] : per_center) groups.push_back(std::move(members));
  }
  if (target / groups.size() == 0) {
    groups.assign(1, std::vector<std::size_t>(input.size()));
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }
  const std::uint64_t per_group = target / groups.size();

  std::mt19937_64 rng(mix_seed(params.seed, 2));
  StaticOutput out;
  for (const auto& members : groups) {
    if (members.size() <= per_group) {
      for (auto i : members) out.entries.push_back(input[i]);
      continue;
    }
    const auto counts = draw_counts(members, weight, per_group, rng);
    mpz_class group_total = 0;
    for (auto i : members) group_total += input[i].weight;
    std::vector<std::uint64_t> c(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) c[j] = counts[j].second;
    const auto shares = apportion(group_total, c);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (shares[j] > 0) out.entries.push_back(IntEntry{input[counts[j].first].point, shares[j]});
    }
  }
  return out;
}

namespace {

struct SensitivityPlan {
  std::vector<IntEntry> points;
  std::vector<double> sigma;
  std::vector<double> per_draw;  // S / sigma * w, in units of s' * input numerators / m
  std::vector<double> cumulative;
};

SensitivityPlan plan_sensitivity(std::vector<IntEntry> merged, const ClusterSpec& spec,
                                 const StaticCallParams& params) {
  SensitivityPlan plan;
  plan.points = std::move(merged);
  const auto b = d2_sample_bicriteria(plan.points, spec, params.lambda_s, mix_seed(params.seed, 1));
  const std::size_t n = plan.points.size();
  const auto weight = to_doubles(plan.points);
  plan.sigma.resize(n);
  double s_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = b.total_cost > 0.0 ? b.power_distance[i] / b.total_cost : 0.0;
    plan.sigma[i] = weight[i] * share + weight[i] / b.cluster_weight[b.assignment[i]];
    s_total += plan.sigma[i];
  }
  plan.per_draw.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.per_draw[i] = weight[i] * s_total / plan.sigma[i];
  plan.cumulative = prefix_sums(plan.sigma);
  return plan;
}

// One i.i.d. draw of m samples; returns (position, count).
std::vector<std::pair<std::size_t, std::uint64_t>> draw_plan(const SensitivityPlan& plan, std::uint64_t m,
                                                             std::mt19937_64& rng) {
  std::map<std::size_t, std::uint64_t> counts;
  for (std::uint64_t t = 0; t < m; ++t) ++counts[draw_index(plan.cumulative, rng)];
  return {counts.begin(), counts.end()};
}

}  // namespace

std::vector<std::pair<PointRef, double>> sensitivity_draw(std::span<const IntEntry> input, const ClusterSpec& spec,
                                                          const StaticCallParams& params) {
  const std::uint64_t m = params.target_size;
  if (m == 0 || m == kUnboundedSize) throw InvalidArgument("sensitivity draw needs a finite sample size");
  auto merged = merge_duplicates(input, spec.metric);
  if (merged.empty()) return {};
  const auto plan = plan_sensitivity(std::move(merged), spec, params);
  std::mt19937_64 rng(mix_seed(params.seed, 3));
  std::vector<std::pair<PointRef, double>> out;
  for (const auto& [pos, c] : draw_plan(plan, m, rng)) {
    out.emplace_back(plan.points[pos].point, static_cast<double>(c) * plan.per_draw[pos] / static_cast<double>(m));
  }
  return out;
}

StaticOutput sensitivity_sample(std::span<const IntEntry> input, const ClusterSpec& spec,
                                const StaticCallParams& params) {
  const std::uint64_t target = params.target_size;
  if (target == 0) throw InvalidArgument("sensitivity sample target must be at least 1");
  auto merged = merge_duplicates(input, spec.metric);
  if (merged.size() <= target) return StaticOutput{std::move(merged), DenomTag{}};

  const std::uint64_t grid = log_eps_ceil(params.n_p, params.eps);
  const mpz_class grid_z(static_cast<unsigned long>(grid));
  const auto plan = plan_sensitivity(std::move(merged), spec, params);
  // Scaled weights are s' * w; with m = s' draws each draw carries w * S / sigma.
  const mpq_class cap =
      mpq_class(1.0 + params.eps) * mpq_class(total_of(plan.points)) * static_cast<unsigned long>(target) * grid_z;

  StaticOutput out;
  out.scale = DenomTag{}.multiply(FactorKind::Threshold, target).multiply(FactorKind::LogEps, grid);
  constexpr int kAttempts = 32;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::mt19937_64 rng(mix_seed(params.seed, 4, static_cast<std::uint64_t>(attempt)));
    out.entries.clear();
    mpz_class sum = 0;
    for (const auto& [pos, c] : draw_plan(plan, target, rng)) {
      // floor(r * grid), same as rounding the fractional part to 1/grid
      const mpq_class r = mpq_class(static_cast<double>(c) * plan.per_draw[pos]);
      mpz_class scaled = r.get_num() * grid_z;
      mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), r.get_den_mpz_t());
      if (scaled == 0) continue;
      sum += scaled;
      out.entries.push_back(IntEntry{plan.points[pos].point, std::move(scaled)});
    }
    if (mpq_class(sum) <= cap) return out;
    if (attempt + 1 == kAttempts) {
      // Last resort: shrink proportionally onto the cap.
      mpz_class cap_floor;
      mpz_fdiv_q(cap_floor.get_mpz_t(), cap.get_num_mpz_t(), cap.get_den_mpz_t());
      std::vector<IntEntry> kept;
      for (auto& e : out.entries) {
        mpz_class w = e.weight * cap_floor / sum;
        if (w > 0) kept.push_back(IntEntry{e.point, std::move(w)});
      }
      out.entries = std::move(kept);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t SizeFunction::operator()(double eps_s, double lambda_s, double log2_w, std::uint64_t n_s) const {
  if (kind == SizeKind::Unbounded) return kUnboundedSize;
  if (kind == SizeKind::Fixed) return fixed;
  if (!(eps_s > 0.0) || !(lambda_s > 0.0 && lambda_s < 1.0)) throw InvalidArgument("size function parameters out of range");
  const double lw = std::max(1.0, log2_w);
  const double ll = std::log2(1.0 / lambda_s);
  const double kk = static_cast<double>(k);
  double v = 0.0;
  if (kind == SizeKind::Rings) {
    const double ln = std::log2(static_cast<double>(std::max<std::uint64_t>(n_s, 1)));
    v = c_s / (eps_s * eps_s) * kk * (kk * ln + ll) * lw * lw;
  } else {
    v = c_s / (eps_s * eps_s) * kk * (std::log2(kk) * lw + ll);
  }
  if (!(v < 1.8e19)) return kUnboundedSize;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(v)));
}

namespace {

class PassthroughConstructor final : public StaticConstructor {
 public:
  explicit PassthroughConstructor(ClusterSpec spec) : spec_(std::move(spec)) {}
  std::string_view name() const override { return "passthrough"; }
  WeightDiscipline discipline() const override { return WeightDiscipline::Integer; }
  double weight_inflation(const StaticCallParams&) const override { return 0.0; }
  const SizeFunction& size_function() const override { return size_; }
  const ClusterSpec& cluster() const override { return spec_; }
  StaticOutput build(std::span<const IntEntry> input, const StaticCallParams&) const override {
    return passthrough(input);
  }

 private:
  ClusterSpec spec_;
  SizeFunction size_{};
};

class UniformConstructor final : public StaticConstructor {
 public:
  UniformConstructor(ClusterSpec spec, double c_s)
      : spec_(std::move(spec)), size_{SizeKind::Sensitivity, c_s, spec_.k, kUnboundedSize} {}
  std::string_view name() const override { return "uniform"; }
  WeightDiscipline discipline() const override { return WeightDiscipline::Fractional; }
  double weight_inflation(const StaticCallParams&) const override { return 0.0; }
  const SizeFunction& size_function() const override { return size_; }
  const ClusterSpec& cluster() const override { return spec_; }
  StaticOutput build(std::span<const IntEntry> input, const StaticCallParams& p) const override {
    if (input.empty()) return StaticOutput{};
    return uniform_sample(input, p.target_size, p.seed);
  }

 private:
  ClusterSpec spec_;
  SizeFunction size_;
};

class RingConstructor final : public StaticConstructor {
 public:
  RingConstructor(ClusterSpec spec, double c_s)
      : spec_(std::move(spec)), size_{SizeKind::Rings, c_s, spec_.k, kUnboundedSize} {}
  std::string_view name() const override { return "rings"; }
  WeightDiscipline discipline() const override { return WeightDiscipline::Integer; }
  double weight_inflation(const StaticCallParams&) const override { return 0.0; }
  const SizeFunction& size_function() const override { return size_; }
  const ClusterSpec& cluster() const override { return spec_; }
  StaticOutput build(std::span<const IntEntry> input, const StaticCallParams& p) const override {
    return ring_sample(input, spec_, p);
  }

 private:
  ClusterSpec spec_;
  SizeFunction size_;
};

class SensitivityConstructor final : public StaticConstructor {
 public:
  SensitivityConstructor(ClusterSpec spec, double c_s)
      : spec_(std::move(spec)), size_{SizeKind::Sensitivity, c_s, spec_.k, kUnboundedSize} {}
  std::string_view name() const override { return "sensitivity"; }
  WeightDiscipline discipline() const override { return WeightDiscipline::Fractional; }
  double weight_inflation(const StaticCallParams& p) const override { return p.eps; }
  const SizeFunction& size_function() const override { return size_; }
  const ClusterSpec& cluster() const override { return spec_; }
  StaticOutput build(std::span<const IntEntry> input, const StaticCallParams& p) const override {
    return sensitivity_sample(input, spec_, p);
  }

 private:
  ClusterSpec spec_;
  SizeFunction size_;
};

}  // namespace

std::unique_ptr<StaticConstructor> make_constructor(std::string_view name, ClusterSpec spec, double c_s) {
  validate_power(spec.z);
  if (spec.k < 1) throw InvalidArgument("k must be at least 1");
  if (!(c_s > 0.0)) throw InvalidArgument("size constant must be positive");
  if (name == "passthrough") return std::make_unique<PassthroughConstructor>(std::move(spec));
  if (name == "uniform") return std::make_unique<UniformConstructor>(std::move(spec), c_s);
  if (name == "rings") return std::make_unique<RingConstructor>(std::move(spec), c_s);
  if (name == "sensitivity") return std::make_unique<SensitivityConstructor>(std::move(spec), c_s);
  throw InvalidArgument("unknown constructor '" + std::string(name) + "'");
}

StaticOutput run_checked(const StaticConstructor& ctor, std::span<const IntEntry> input,
                         const StaticCallParams& params, const CallObserver* observer, bool outer) {
  StaticOutput out = ctor.build(input, params);
  if (out.entries.size() > params.target_size) {
    throw ContractViolation(std::string(ctor.name()) + ": output size " + std::to_string(out.entries.size()) +
                            " exceeds bound " + std::to_string(params.target_size));
  }
  const mpz_class in_total = total_of(input);
  const mpz_class out_total = total_of(out.entries);
  const double delta = ctor.weight_inflation(params);
  const mpz_class scale = out.scale.value();
  if (mpq_class(out_total) > mpq_class(1.0 + delta) * mpq_class(in_total * scale)) {
    throw ContractViolation(std::string(ctor.name()) + ": output weight exceeds (1 + delta) times input weight");
  }
  if (observer != nullptr && *observer) {
    CallRecord rec;
    rec.constructor = ctor.name();
    rec.input_size = input.size();
    rec.output_size = out.entries.size();
    rec.input_total = mpq_class(in_total);
    rec.output_total = mpq_class(out_total, scale);
    rec.output_total.canonicalize();
    rec.delta = delta;
    rec.outer = outer;
    (*observer)(rec);
  }
  return out;
}

}  // namespace dyncore
