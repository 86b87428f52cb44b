#include "dyncore/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include "dyncore/errors.hpp"
#include "dyncore/weights.hpp"
#include "json.hpp"

namespace dyncore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Point> distinct_locations(std::span<const WeightedPoint> points, const Metric& metric) {
  std::map<std::tuple<std::size_t, std::vector<double>>, std::size_t> seen;
  std::vector<Point> out;
  for (const auto& wp : points) {
    auto key = metric.is_matrix() ? std::make_tuple(wp.point.metric_index, std::vector<double>{})
                                  : std::make_tuple(std::size_t{0}, wp.point.coords);
    if (seen.emplace(std::move(key), out.size()).second) out.push_back(wp.point);
  }
  return out;
}

struct Evaluator {
  // Row c holds d(candidate c, target i)^z for every target.
  std::vector<std::vector<double>> dist;
  std::vector<long double> weight;
  std::size_t n_input = 0;  // targets [0, n_input) belong to X, the rest to C

  Evaluator(const std::vector<Point>& candidates, std::span<const WeightedPoint> input,
            std::span<const WeightedPoint> coreset, int z, const Metric& metric)
      : n_input(input.size()) {
    for (const auto& wp : input) weight.push_back(static_cast<long double>(wp.weight.to_double()));
    for (const auto& wp : coreset) weight.push_back(static_cast<long double>(wp.weight.to_double()));
    dist.resize(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      dist[c].reserve(weight.size());
      for (const auto& wp : input) dist[c].push_back(metric.power_distance(candidates[c], wp.point, z));
      for (const auto& wp : coreset) dist[c].push_back(metric.power_distance(candidates[c], wp.point, z));
    }
  }

  std::pair<double, double> costs(const std::vector<double>& mins) const {
    long double cx = 0.0L;
    long double cc = 0.0L;
    for (std::size_t i = 0; i < n_input; ++i) cx += weight[i] * mins[i];
    for (std::size_t i = n_input; i < mins.size(); ++i) cc += weight[i] * mins[i];
    return {static_cast<double>(cx), static_cast<double>(cc)};
  }
};

void record(CertificationReport& r, double cx, double cc, const std::vector<Point>& candidates,
            const std::vector<std::size_t>& chosen) {
  ++r.solutions_tested;
  const double dev = relative_deviation(cx, cc);
  if (dev > r.worst_deviation || r.witness.centers.empty()) {
    r.worst_deviation = std::max(r.worst_deviation, dev);
    r.witness.centers.clear();
    for (auto c : chosen) r.witness.centers.push_back(candidates[c]);
  }
}

void enumerate(const Evaluator& ev, const std::vector<Point>& candidates, int k, std::size_t start,
               std::vector<std::size_t>& chosen, const std::vector<double>& mins, CertificationReport& r) {
  for (std::size_t c = start; c < candidates.size(); ++c) {
    std::vector<double> next(mins.size());
    const auto& row = ev.dist[c];
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(mins[i], row[i]);
    chosen.push_back(c);
    const auto [cx, cc] = ev.costs(next);
    record(r, cx, cc, candidates, chosen);
    if (static_cast<int>(chosen.size()) < k) enumerate(ev, candidates, k, c + 1, chosen, next, r);
    chosen.pop_back();
  }
}

std::size_t draw_weighted(const std::vector<double>& mass, std::mt19937_64& rng) {
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) return rng() % mass.size();
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (u < mass[i]) return i;
    u -= mass[i];
  }
  return mass.size() - 1;
}

}  // namespace

std::string CertificationReport::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == CertifyMode::Exhaustive ? "exhaustive" : "sampled";
  j["solutions_tested"] = solutions_tested;
  j["eps"] = eps;
  j["worst_deviation"] = std::isfinite(worst_deviation) ? nlohmann::json(worst_deviation) : nlohmann::json("inf");
  j["passed"] = passed;
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : witness.centers) {
    nlohmann::json cj;
    cj["id"] = c.id;
    if (c.coords.empty()) {
      cj["index"] = c.metric_index;
    } else {
      cj["coords"] = c.coords;
    }
    centers.push_back(cj);
  }
  j["witness"] = centers;
  return j.dump();
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  if (!r.fits_ulong_p()) return std::numeric_limits<std::uint64_t>::max();
  return r.get_ui();
}

std::uint64_t count_solutions(std::size_t n, int k) {
  std::uint64_t total = 0;
  for (int j = 1; j <= k && static_cast<std::size_t>(j) <= n; ++j) {
    const std::uint64_t b = binomial(n, static_cast<std::size_t>(j));
    if (b > std::numeric_limits<std::uint64_t>::max() - total) return std::numeric_limits<std::uint64_t>::max();
    total += b;
  }
  return total;
}

double relative_deviation(double cost_input, double cost_coreset) {
  if (cost_input == 0.0) return cost_coreset == 0.0 ? 0.0 : kInf;
  return std::abs(cost_input - cost_coreset) / cost_input;
}

bool deviation_within(double deviation, double eps) { return deviation <= eps * (1.0 + 1e-9) + 1e-12; }

CertificationReport certify_coreset(std::span<const WeightedPoint> coreset, std::span<const WeightedPoint> input,
                                    double eps, int k, int z, const Metric& metric, CertifyMode mode,
                                    std::size_t sample_count, std::uint64_t seed) {
  validate_power(z);
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (eps < 0.0) throw InvalidArgument("eps must be nonnegative");
  CertificationReport r;
  r.mode = mode;
  r.eps = eps;
  if (input.empty()) {
    // Every solution costs 0 on the empty set; the coreset must be weightless.
    mpq_class total = 0;
    for (const auto& wp : coreset) total += wp.weight.value();
    r.passed = total == 0;
    r.worst_deviation = r.passed ? 0.0 : kInf;
    return r;
  }
  const auto candidates = distinct_locations(input, metric);
  if (mode == CertifyMode::Exhaustive && count_solutions(candidates.size(), k) > kExhaustiveGuard) {
    throw InvalidArgument("exhaustive certification needs " + std::to_string(count_solutions(candidates.size(), k)) +
                          " solutions, above the guard of " + std::to_string(kExhaustiveGuard));
  }
  const Evaluator ev(candidates, input, coreset, z, metric);
  const std::vector<double> start(ev.weight.size(), kInf);

  if (mode == CertifyMode::Exhaustive) {
    std::vector<std::size_t> chosen;
    enumerate(ev, candidates, k, 0, chosen, start, r);
  } else {
    std::mt19937_64 rng(seed);
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
    auto evaluate = [&](std::vector<std::size_t> chosen) {
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      std::vector<double> mins = start;
      for (auto c : chosen) {
        for (std::size_t i = 0; i < mins.size(); ++i) mins[i] = std::min(mins[i], ev.dist[c][i]);
      }
      const auto [cx, cc] = ev.costs(mins);
      record(r, cx, cc, candidates, chosen);
    };
    for (std::size_t t = 0; t < sample_count; ++t) {
      std::vector<std::size_t> chosen;
      for (std::size_t j = 0; j < kk; ++j) chosen.push_back(rng() % candidates.size());
      evaluate(chosen);
    }
    // D^z seeding over the candidates, weighted by the input weight at each location.
    std::vector<double> loc_weight(candidates.size(), 0.0);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      for (std::size_t i = 0; i < ev.n_input; ++i) {
        if (ev.dist[c][i] == 0.0) loc_weight[c] += static_cast<double>(ev.weight[i]);
      }
    }
    const std::size_t seeded = std::max<std::size_t>(8, sample_count / 4);
    for (std::size_t t = 0; t < seeded; ++t) {
      std::vector<std::size_t> chosen{draw_weighted(loc_weight, rng)};
      while (chosen.size() < kk) {
        std::vector<double> mass(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          double d = kInf;
          for (auto s : chosen) d = std::min(d, metric.power_distance(candidates[c], candidates[s], z));
          mass[c] = loc_weight[c] * d;
        }
        chosen.push_back(draw_weighted(mass, rng));
      }
      evaluate(chosen);
    }
    // Degenerate solutions: single centers at the points farthest from the
    // first location, and the farthest pair found by two sweeps.
    std::vector<std::pair<double, std::size_t>> far;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      far.emplace_back(metric.distance(candidates[0], candidates[c]), c);
    }
    std::sort(far.begin(), far.end(), std::greater<>());
    for (std::size_t t = 0; t < std::min<std::size_t>(8, far.size()); ++t) evaluate({far[t].second});
    const std::size_t a = far.front().second;
    std::size_t b = a;
    double best = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = metric.distance(candidates[a], candidates[c]);
      if (d > best) {
        best = d;
        b = c;
      }
    }
    if (kk >= 2) evaluate({a, b});
    evaluate({0});
  }
  r.passed = deviation_within(r.worst_deviation, eps);
  return r;
}

OptimalSolution optimal_cost(std::span<const WeightedPoint> input, int k, int z, const Metric& metric) {
  validate_power(z);
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (input.empty()) throw InvalidArgument("optimal cost of an empty set");
  const auto candidates = distinct_locations(input, metric);
  OptimalSolution best;
  if (static_cast<std::size_t>(k) >= candidates.size()) {
    best.solution.centers = candidates;
    best.cost = cost(best.solution, input, z, metric);
    return best;
  }
  if (binomial(candidates.size(), static_cast<std::size_t>(k)) > kExhaustiveGuard) {
    throw InvalidArgument("optimal cost enumeration exceeds the guard");
  }
  const Evaluator ev(candidates, input, {}, z, metric);
  best.cost = kInf;
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t, const std::vector<double>&)> rec = [&](std::size_t from,
                                                                      const std::vector<double>& mins) {
    for (std::size_t c = from; c < candidates.size(); ++c) {
      std::vector<double> next(mins.size());
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(mins[i], ev.dist[c][i]);
      chosen.push_back(c);
      if (static_cast<int>(chosen.size()) == k) {
        const double cx = ev.costs(next).first;
        if (cx < best.cost) {
          best.cost = cx;
          best.solution.centers.clear();
          for (auto s : chosen) best.solution.centers.push_back(candidates[s]);
        }
      } else {
        rec(c + 1, next);
      }
      chosen.pop_back();
    }
  };
  rec(0, std::vector<double>(input.size(), kInf));
  return best;
}

std::vector<WeightedPoint> scale_weights(std::span<const WeightedPoint> points, const mpq_class& factor) {
  std::vector<WeightedPoint> out;
  out.reserve(points.size());
  for (const auto& wp : points) {
    out.push_back(WeightedPoint{wp.point, BoundedRational::from_rational(wp.weight.value() * factor)});
  }
  return out;
}

CompositionReport certify_composition(std::span<const WeightedPoint> input, double eps, double delta,
                                      const CoresetBuilder& build_eps, const CoresetBuilder& build_delta, int k,
                                      int z, const Metric& metric) {
  CompositionReport rep;
  const auto c1 = build_eps(input);
  const auto c2 = build_delta(c1);
  rep.inner = certify_coreset(c1, input, eps, k, z, metric);
  rep.outer = certify_coreset(c2, c1, delta, k, z, metric);
  rep.composed = certify_coreset(c2, input, compose_quality(eps, delta), k, z, metric);

  std::vector<WeightedPoint> even;
  std::vector<WeightedPoint> odd;
  for (std::size_t i = 0; i < input.size(); ++i) (i % 2 == 0 ? even : odd).push_back(input[i]);
  auto u = build_eps(even);
  const auto u2 = build_eps(odd);
  u.insert(u.end(), u2.begin(), u2.end());
  rep.unioned = certify_coreset(u, input, eps, k, z, metric);
  rep.passed = rep.inner.passed && rep.outer.passed && rep.composed.passed && rep.unioned.passed;
  return rep;
}

}  // namespace dyncore
