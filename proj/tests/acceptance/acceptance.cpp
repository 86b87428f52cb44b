// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyncore/dyntree.hpp"
#include "dyncore/errors.hpp"
#include "dyncore/mergereduce.hpp"
#include "dyncore/oracle.hpp"
#include "dyncore/weights.hpp"
#include "dyncore_tools/harness.hpp"
#include "test_support.hpp"

using namespace dyncore;
using testsupport::Gen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

int g_failed = 0;

void report(int id, const std::string& name, const Verdict& v, double secs) {
  std::printf("criterion %2d %s  %-24s %s (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(),
              secs);
  std::fflush(stdout);
  if (!v.pass) ++g_failed;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

mpq_class canon(const mpz_class& a, const mpz_class& b) {
  mpq_class q(a, b);
  q.canonicalize();
  return q;
}

mpz_class upow(std::uint64_t b, unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), b, e);
  return r;
}

unsigned clog2(std::uint64_t n) {
  unsigned r = 0;
  while ((std::uint64_t{1} << r) < n) ++r;
  return r;
}

unsigned flog2(std::uint64_t v) {
  unsigned r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

std::vector<WeightedPoint> as_input(const std::map<PointId, std::pair<Point, mpq_class>>& live) {
  std::vector<WeightedPoint> out;
  out.reserve(live.size());
  for (const auto& [id, pw] : live) out.push_back(WeightedPoint{pw.first, BoundedRational::from_rational(pw.second)});
  return out;
}

// ---------------------------------------------------------------------------
// 1. exact arithmetic

mpq_class pascal_series(unsigned l, const mpq_class& a) {
  std::vector<mpz_class> row{1};
  for (unsigned r = 1; r <= l; ++r) {
    std::vector<mpz_class> next(r + 1, 1);
    for (unsigned i = 1; i < r; ++i) next[i] = row[i - 1] + row[i];
    row = std::move(next);
  }
  mpq_class sum = 0, p = 1;
  for (unsigned i = 1; i <= l; ++i) {
    p *= a;
    sum += mpq_class(row[i]) * p;
  }
  return sum;
}

Verdict exact_math() {
  Gen g(101);
  std::size_t bad = 0, checked = 0;
  for (unsigned l = 1; l <= 20; ++l) {
    for (int t = 0; t < 100; ++t) {
      const mpq_class a = g.rational(1000, 1000);
      ++checked;
      if (!binom_recurrence_check(l, a) || binomial_series(l, a) != pascal_series(l, a)) ++bad;
    }
  }
  for (unsigned l = 1; l <= 64; ++l) {
    for (unsigned i = 0; i <= 16; ++i) {
      const mpq_class a(i, 16);
      mpq_class per = a / (2 * l);
      per.canonicalize();
      mpq_class grown = 1;
      for (unsigned j = 0; j < l; ++j) grown *= 1 + per;
      ++checked;
      if (!budget_bound_check(l, mpq_class(canon(i, 16))) || grown - 1 > a || level_error_budget(l, per) != grown - 1) {
        ++bad;
      }
    }
  }
  for (int t = 0; t < 10000; ++t) {
    const mpz_class a = g.range(1, 1'000'000), b = g.range(1, 1'000'000), d = g.range(1, 1'000'000);
    const mpz_class c = floor_round(a, b, d);
    ++checked;
    if (!(canon(a, b) - canon(a, d) <= canon(c, d) && canon(c, d) <= canon(a, b))) ++bad;
  }
  for (int t = 0; t < 10000; ++t) {
    const mpq_class r = g.rational(100000, 997) + 1;
    const mpz_class d = g.range(1, 5000);
    const mpq_class out = round_fractional_part(r, d);
    const mpq_class scaled = out * d;
    ++checked;
    if (!(out <= r && out >= (1 - canon(1, d)) * r && scaled.get_den() == 1)) ++bad;
  }
  for (int t = 0; t < 10000; ++t) {
    const std::uint64_t n_p = g.range(2, 300);
    const unsigned c = static_cast<unsigned>(g.range(1, 3));
    const double eps = std::vector<double>{0.5, 0.25, 0.2, 0.1, 0.3}[g.range(0, 4)];
    const mpz_class cap = upow(n_p, c);
    const mpz_class a = mpz_class(g.range(1, 1'000'000'000)) % cap + 1;
    const mpz_class b = mpz_class(g.range(1, 1'000'000'000)) % cap + 1;
    const auto r = round_input_weight(a, b, n_p, c, eps);
    const auto inv = static_cast<unsigned long>(std::ceil(1.0 / eps - 1e-9));
    const mpq_class w = canon(a, b), got = canon(r.numerator, r.denominator);
    ++checked;
    const bool ok = r.denominator == upow(n_p, c + 1) * inv && got >= w &&
                    (got - w) * mpq_class(static_cast<unsigned long>(n_p * inv)) <= w &&
                    r.numerator <= upow(n_p, 2 * c + 1) * inv;
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("%zu of %zu exact checks failed", bad, checked)};
}

// ---------------------------------------------------------------------------
// 2 and 3. structure and work bound on one passthrough run

struct StructureRun {
  Verdict structure;
  Verdict work;
};

StructureRun structure_and_work() {
  TreeConfig cfg;
  cfg.audit_phase_sweep = true;
  DynamicCoresetTree t(cfg);
  Gen g(202);
  std::map<PointId, mpq_class> live;
  std::vector<PointId> ids;
  PointId next = 1;
  bool growing = true;
  std::size_t peak = 0, invariant_failures = 0, sweep_failures = 0, sweeps = 0;
  std::size_t call_violations = 0, outer_violations = 0;
  std::uint64_t worst_ratio_calls = 0;
  std::string first;
  const std::vector<mpq_class> weights{1, 2, mpq_class(1, 2), mpq_class(3, 4), mpq_class(5, 3)};

  auto sweep = [&]() {
    ++sweeps;
    const std::size_t m = t.leaf_count();
    bool ok = m == live.size() && t.size() == live.size() && t.node_count() == (m == 0 ? 0 : 2 * m - 1);
    std::set<PointId> seen;
    for (std::size_t v = m; ok && v < 2 * m; ++v) {
      const auto in_leaf = t.leaf_ids(v);
      ok = t.is_leaf(v) && in_leaf.size() == 1 && t.leaf_of(in_leaf[0]) == v && seen.insert(in_leaf[0]).second;
    }
    ok = ok && seen.size() == live.size();
    for (const auto& [id, w] : live) ok = ok && seen.count(id) == 1 && t.true_weight(id) == w;
    const auto& ph = t.phase();
    const unsigned c = cfg.c_exp;
    const mpz_class base = upow(ph.n_p, c + 1) * upow(ph.n_pp, c + 1) * inverse_eps_ceil(cfg.eps);
    std::map<unsigned, mpq_class> level_sum;
    const unsigned top = m == 0 ? 0 : flog2(2 * m - 1);
    for (std::size_t v = 1; ok && v < 2 * m; ++v) {
      const Stamp& s = t.stamp(v);
      const auto set = t.node_set(v);
      const unsigned level = top - flog2(v);
      ok = (s.n_p == ph.n_p || s.n_p == ph.n_pp) && t.is_leaf(v) == (v >= m) &&
           mpz_divisible_p(base.get_mpz_t(), set->tag().value().get_mpz_t()) != 0;
      if (!t.is_leaf(v)) ok = ok && set->size() == t.node_set(2 * v)->size() + t.node_set(2 * v + 1)->size();
      level_sum[level] += set->total_weight() * mpq_class(base);
    }
    for (const auto& [level, sum] : level_sum) ok = ok && sum <= mpq_class(ph.w_p);
    if (!ok) {
      ++sweep_failures;
      if (first.empty()) first = fmt("independent sweep failed at update %llu", (unsigned long long)t.updates());
    }
  };

  for (int step = 0; step < 100000; ++step) {
    if (live.size() >= 5000) growing = false;
    if (live.size() <= 1000) growing = true;
    const double u = g.real(0, 1);
    const double p_ins = growing ? 0.6 : 0.3;
    UpdateReport rep;
    if (ids.empty() || u < p_ins) {
      const mpq_class w = weights[g.range(0, weights.size() - 1)];
      rep = t.insert(testsupport::point(next, {g.real(0, 1000), g.real(0, 1000)}), w);
      live[next] = w;
      ids.push_back(next++);
    } else if (u < 0.9) {
      const std::size_t j = g.range(0, ids.size() - 1);
      rep = t.erase(ids[j]);
      live.erase(ids[j]);
      ids[j] = ids.back();
      ids.pop_back();
    } else {
      const PointId id = ids[g.range(0, ids.size() - 1)];
      const mpq_class delta = live[id] > 1 ? mpq_class(-1, 3) : mpq_class(1, 3);
      rep = t.update_weight(id, delta);
      live[id] += delta;
    }
    peak = std::max(peak, live.size());
    const auto inv = t.check_invariants();
    if (!inv.ok) {
      ++invariant_failures;
      if (first.empty()) first = inv.failures.front();
    }
    if (step % 100 == 0) sweep();
    const std::uint64_t bound = 4ULL * clog2(std::max<std::size_t>(live.size(), 1));
    if (rep.static_calls_nonouter > bound) ++call_violations;
    if (rep.static_calls_outer != 1) ++outer_violations;
    worst_ratio_calls = std::max(worst_ratio_calls, rep.static_calls_nonouter);
  }
  sweep();
  const std::size_t audit = t.audit_failures().size();
  StructureRun out;
  out.structure.pass = invariant_failures == 0 && sweep_failures == 0 && audit == 0 && peak >= 4500;
  out.structure.detail = fmt("1e5 updates, peak n %zu, %zu invariant / %zu of %zu sweep / %zu audit failures", peak,
                             invariant_failures, sweep_failures, sweeps, audit);
  if (!first.empty()) out.structure.detail += "; first: " + first;
  out.work.pass = call_violations == 0 && outer_violations == 0;
  out.work.detail = fmt("%zu updates over 4 ceil(log2 n), %zu with outer calls != 1, max calls %llu", call_violations,
                        outer_violations, (unsigned long long)worst_ratio_calls);
  return out;
}

// ---------------------------------------------------------------------------
// 4. rounding fidelity

Verdict rounding_fidelity() {
  struct Run {
    int k;
    int z;
    std::size_t peak;
  };
  const std::vector<Run> runs{{1, 2, 300}, {2, 1, 300}, {2, 2, 300}, {3, 2, 80}};
  std::size_t checks = 0, failures = 0;
  double worst = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    TreeConfig cfg;
    cfg.k = runs[r].k;
    cfg.z = runs[r].z;
    cfg.eps = 0.2;
    DynamicCoresetTree t(cfg);
    Gen g(400 + r);
    std::map<PointId, std::pair<Point, mpq_class>> live;
    std::vector<PointId> ids;
    PointId next = 1;
    const std::size_t steps = runs[r].peak * 3;
    for (std::size_t step = 1; step <= steps; ++step) {
      const double u = g.real(0, 1);
      const bool grow = live.size() < runs[r].peak && step < 2 * runs[r].peak;
      if (ids.empty() || (grow ? u < 0.7 : u < 0.25)) {
        // multiples of 1/12 up to 5 stay within n_p^c = 64 from the first phase on
        const mpq_class w = canon(g.range(1, 60), 12);
        const Point p = testsupport::point(next, {g.real(0, 50), g.real(0, 50)});
        t.insert(p, w);
        live[next] = {p, w};
        ids.push_back(next++);
      } else if (u < 0.8) {
        const std::size_t j = g.range(0, ids.size() - 1);
        t.erase(ids[j]);
        live.erase(ids[j]);
        ids[j] = ids.back();
        ids.pop_back();
      } else {
        const PointId id = ids[g.range(0, ids.size() - 1)];
        mpq_class delta = canon(g.range(1, 6), 12);
        if (live[id].second + delta > 5) delta = -delta;
        t.update_weight(id, delta);
        live[id].second += delta;
      }
      if (step % 10 != 0) continue;
      const auto input = as_input(live);
      const auto rep = certify_coreset(t.query_points(), input, 0.2, cfg.k, cfg.z, cfg.metric);
      ++checks;
      worst = std::max(worst, rep.worst_deviation);
      if (!rep.passed) ++failures;
    }
  }
  return {failures == 0, fmt("%zu of %zu exhaustive checks failed, worst deviation %.3g", failures, checks, worst)};
}

// ---------------------------------------------------------------------------
// 5, 6 and 7. quality, size and weight conservation on the sampling constructors

// Independent copy of the configured size function s(eps, lambda, log2 W).
double size_bound(const std::string& ctor, double c_s, int k, double eps, double lambda, double log2_w,
                  std::uint64_t n) {
  const double lw = std::max(1.0, log2_w);
  const double kk = k;
  if (ctor == "rings") {
    return std::ceil(c_s / (eps * eps) * kk * (kk * std::log2(double(n)) + std::log2(1 / lambda)) * lw * lw);
  }
  return std::ceil(c_s / (eps * eps) * kk * (std::log2(kk) * lw + std::log2(1 / lambda)));
}

double log2_of(const mpz_class& v) {
  long e = 0;
  const double m = mpz_get_d_2exp(&e, v.get_mpz_t());
  return std::log2(m) + static_cast<double>(e);
}

double scale_for(const std::string& ctor) { return ctor == "rings" ? 5e-6 : 0.003; }

struct ConservationTally {
  std::size_t calls = 0;
  std::size_t violations = 0;
  std::size_t reducing = 0;
};

CallObserver conservation_observer(ConservationTally& tally, double eps) {
  return [&tally, eps](const CallRecord& rec) {
    ++tally.calls;
    if (rec.output_size < rec.input_size) ++tally.reducing;
    bool ok = true;
    if (rec.constructor == "rings") ok = rec.output_total == rec.input_total;
    if (rec.constructor == "sensitivity") ok = rec.output_total <= (1 + mpq_class(eps)) * rec.input_total;
    if (!ok) ++tally.violations;
  };
}

struct QualityRun {
  Verdict quality;
  Verdict size;
  Verdict conservation;
};

QualityRun quality_size_conservation() {
  QualityRun out;
  std::size_t size_checks = 0, size_violations = 0;
  std::size_t contract_errors = 0;
  std::map<std::string, ConservationTally> tally;
  std::ostringstream quality_detail;
  bool quality_ok = true;
  for (const std::string ctor : {"sensitivity", "rings"}) {
    for (int z : {1, 2}) {
      std::size_t failed_seeds = 0, queries = 0;
      double size_sum = 0;
      for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        TreeConfig cfg;
        cfg.k = 2;
        cfg.z = z;
        cfg.eps = 0.5;
        cfg.lambda = 0.1;
        cfg.constructor = ctor;
        cfg.size_scale = scale_for(ctor);
        cfg.seed = seed;
        cfg.observer = conservation_observer(tally[ctor], cfg.eps);
        Gen g(seed * 7919 + z);
        const auto pts = testsupport::planar_mixture(g, 200, g.range(2, 4), 2.0);
        bool seed_failed = false;
        try {
          DynamicCoresetTree t(cfg);
          std::map<PointId, std::pair<Point, mpq_class>> live;
          auto check_query = [&]() {
            const auto q = t.query_points();
            const auto& ph = t.phase();
            const double bound = size_bound(ctor, cfg.size_scale, cfg.k, cfg.eps / 3, cfg.lambda / 2, log2_of(ph.w_p),
                                            ph.n_p);
            ++size_checks;
            if (static_cast<double>(q.size()) > bound) ++size_violations;
            ++queries;
            size_sum += static_cast<double>(q.size());
            if (!certify_coreset(q, as_input(live), cfg.eps, cfg.k, cfg.z, cfg.metric).passed) seed_failed = true;
          };
          for (std::size_t i = 0; i < pts.size(); ++i) {
            t.insert(pts[i], 1);
            live[pts[i].id] = {pts[i], 1};
            if ((i + 1) % 50 == 0) check_query();
          }
          for (int d = 0; d < 50; ++d) {
            auto it = std::next(live.begin(), static_cast<long>(g.range(0, live.size() - 1)));
            t.erase(it->first);
            live.erase(it);
          }
          check_query();
        } catch (const ContractViolation&) {
          ++contract_errors;
          seed_failed = true;
        }
        if (seed_failed) ++failed_seeds;
      }
      const bool ok = failed_seeds <= 13;
      quality_ok = quality_ok && ok;
      quality_detail << ctor << " z=" << z << ": " << failed_seeds << "/200 failed seeds, mean size "
                     << fmt("%.1f", size_sum / std::max<double>(1, queries)) << "; ";
    }
  }
  out.quality = {quality_ok && contract_errors == 0, quality_detail.str() + fmt("%zu contract errors", contract_errors)};
  out.size = {size_violations == 0, fmt("%zu of %zu queries above s(eps/3, lambda/2, W_p)", size_violations, size_checks)};

  // Weighted dynamic runs where the inner nodes also reduce.
  for (const std::string ctor : {"sensitivity", "rings"}) {
    TreeConfig cfg;
    cfg.constructor = ctor;
    cfg.threshold_override = 16;
    cfg.outer_target_override = 24;
    cfg.observer = conservation_observer(tally[ctor], cfg.eps);
    DynamicCoresetTree t(cfg);
    Gen g(707);
    std::vector<PointId> ids;
    PointId next = 1;
    try {
      for (int step = 0; step < 3000; ++step) {
        if (ids.empty() || g.real(0, 1) < 0.6) {
          t.insert(testsupport::point(next, {g.real(0, 100), g.real(0, 100)}), canon(g.range(1, 30), g.range(1, 30)));
          ids.push_back(next++);
        } else {
          const std::size_t j = g.range(0, ids.size() - 1);
          t.erase(ids[j]);
          ids[j] = ids.back();
          ids.pop_back();
        }
      }
    } catch (const ContractViolation&) {
      ++contract_errors;
    }
  }
  const auto& r = tally["rings"];
  const auto& s = tally["sensitivity"];
  out.conservation = {r.violations == 0 && s.violations == 0 && contract_errors == 0 && r.reducing > 0 && s.reducing > 0,
                      fmt("rings %zu/%zu calls inexact (%zu reducing), sensitivity %zu/%zu calls over (1+eps) (%zu "
                          "reducing), %zu contract errors",
                          r.violations, r.calls, r.reducing, s.violations, s.calls, s.reducing, contract_errors)};
  return out;
}

// ---------------------------------------------------------------------------
// 8. merge-and-reduce cross-check

Verdict merge_reduce_check() {
  MergeReduceConfig mc;
  mc.constructor = "sensitivity";
  mc.threshold_override = 16;
  mc.n_max = 1 << 12;
  MergeReduce counter(mc);
  Gen g(808);
  std::size_t pattern_mismatches = 0;
  for (std::uint64_t t = 1; t <= (1U << 12); ++t) {
    counter.insert(testsupport::point(t, {g.real(0, 100), g.real(0, 100)}), 1);
    std::vector<bool> bits;
    for (std::uint64_t v = t; v != 0; v >>= 1) bits.push_back((v & 1U) != 0);
    if (counter.pattern() != bits) ++pattern_mismatches;
  }

  std::size_t tree_failures = 0, mr_failures = 0;
  double tree_size = 0, mr_size = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Gen h(seed * 104729);
    const auto pts = testsupport::planar_mixture(h, 200, h.range(2, 4), 2.0);
    std::vector<WeightedPoint> input;
    for (const auto& p : pts) input.push_back(WeightedPoint{p, BoundedRational::from_rational(1)});

    TreeConfig tc;
    tc.constructor = "sensitivity";
    tc.size_scale = scale_for("sensitivity");
    tc.seed = seed;
    DynamicCoresetTree tree(tc);
    MergeReduceConfig rc;
    rc.constructor = "sensitivity";
    rc.threshold_override = 60;
    rc.n_max = 256;
    rc.seed = seed;
    MergeReduce mr(rc);
    for (const auto& p : pts) {
      tree.insert(p, 1);
      mr.insert(p, 1);
    }
    const auto qt = tree.query_points();
    const auto qm = mr.query_points();
    tree_size += static_cast<double>(qt.size());
    mr_size += static_cast<double>(qm.size());
    if (!certify_coreset(qt, input, 0.5, 2, 2, tc.metric).passed) ++tree_failures;
    if (!certify_coreset(qm, input, 0.5, 2, 2, rc.metric).passed) ++mr_failures;
  }
  return {pattern_mismatches == 0 && tree_failures <= 13 && mr_failures <= 13,
          fmt("%zu of 4096 patterns differ from binary; failures dyntree %zu/200 (mean size %.1f), "
              "merge-reduce %zu/200 (mean size %.1f)",
              pattern_mismatches, tree_failures, tree_size / 200, mr_failures, mr_size / 200)};
}

// ---------------------------------------------------------------------------
// 9. adaptive adversary

Verdict adversary() {
  std::size_t bad_runs = 0;
  std::size_t max_rounds = 0, total_rounds = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    TreeConfig cfg;
    cfg.constructor = "sensitivity";
    cfg.size_scale = scale_for("sensitivity");
    cfg.seed = seed;
    DynamicCoresetTree t(cfg);
    Gen g(seed * 31337);
    for (const auto& p : testsupport::planar_mixture(g, 500, g.range(2, 5), 2.0)) t.insert(p, 1);
    std::size_t rounds = 0;
    bool ok = true;
    while (t.size() > 0 && rounds <= 500) {
      ++rounds;
      const auto q = t.query_points();
      if (q.empty()) {
        ok = false;
        break;
      }
      for (const auto& wp : q) t.erase(wp.point.id);
    }
    ok = ok && t.size() == 0 && t.query_points().empty();
    if (!ok) ++bad_runs;
    max_rounds = std::max(max_rounds, rounds);
    total_rounds += rounds;
  }
  return {bad_runs == 0, fmt("%zu of 50 runs failed, rounds mean %.1f max %zu", bad_runs, total_rounds / 50.0, max_rounds)};
}

// ---------------------------------------------------------------------------
// 10. scaling

double mean_update_nanos(tools::Structure& s, std::size_t n, std::size_t timed, std::uint64_t seed) {
  Gen g(seed);
  std::vector<PointId> ids;
  PointId next = 1;
  auto fresh = [&]() { return testsupport::point(next, {g.real(0, 1000), g.real(0, 1000)}); };
  std::vector<std::pair<Point, mpq_class>> initial;
  for (std::size_t i = 0; i < n; ++i) {
    initial.emplace_back(fresh(), 1);
    ids.push_back(next++);
  }
  s.preload(initial);
  double total = 0;
  for (std::size_t i = 0; i < timed; ++i) {
    const double u = g.real(0, 1);
    const auto t0 = Clock::now();
    if (u < 0.45) {
      s.insert(fresh(), 1);
      ids.push_back(next++);
    } else if (u < 0.9) {
      const std::size_t j = g.range(0, ids.size() - 1);
      s.erase(ids[j]);
      ids[j] = ids.back();
      ids.pop_back();
    } else {
      s.update_weight(ids[g.range(0, ids.size() - 1)], mpq_class(1, 2));
    }
    total += std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
  }
  return total / static_cast<double>(timed);
}

Verdict scaling() {
  tools::HarnessConfig hc;
  hc.tree.constructor = "sensitivity";
  // Same 128-point target for tree nodes, the outer instance and the baseline.
  hc.tree.threshold_override = 128;
  hc.tree.outer_target_override = 128;
  hc.tree.seed = 5;
  double dyn[2], rec[2];
  const std::size_t sizes[2] = {1U << 10, 1U << 14};
  for (int i = 0; i < 2; ++i) {
    hc.structure = tools::StructureKind::DynTree;
    auto d = tools::make_structure(hc);
    dyn[i] = mean_update_nanos(*d, sizes[i], 8000, 11 + i);
    hc.structure = tools::StructureKind::Recompute;
    auto r = tools::make_structure(hc);
    rec[i] = mean_update_nanos(*r, sizes[i], 200, 21 + i);
  }
  const double dr = dyn[1] / dyn[0];
  const double rr = rec[1] / rec[0];
  return {dr <= 4.0 && rr >= 10.0,
          fmt("dyntree %.1f -> %.1f us (x%.2f), recompute %.0f -> %.0f us (x%.1f)", dyn[0] / 1e3, dyn[1] / 1e3, dr,
              rec[0] / 1e3, rec[1] / 1e3, rr)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || only.count(id) != 0; };

  if (want(1)) {
    const auto t0 = Clock::now();
    auto v = exact_math();
    const double s = seconds_since(t0);
    if (s >= 10) v.pass = false;
    report(1, "exact arithmetic", v, s);
  }
  if (want(2) || want(3)) {
    const auto t0 = Clock::now();
    auto r = structure_and_work();
    const double s = seconds_since(t0);
    if (s >= 300) r.structure.pass = false;
    report(2, "structure", r.structure, s);
    report(3, "work bound", r.work, s);
  }
  if (want(4)) {
    const auto t0 = Clock::now();
    const auto v = rounding_fidelity();
    report(4, "rounding fidelity", v, seconds_since(t0));
  }
  if (want(5) || want(6) || want(7)) {
    const auto t0 = Clock::now();
    auto r = quality_size_conservation();
    const double s = seconds_since(t0);
    if (s >= 1800) r.quality.pass = false;
    report(5, "coreset quality", r.quality, s);
    report(6, "size bound", r.size, s);
    report(7, "weight conservation", r.conservation, s);
  }
  if (want(8)) {
    const auto t0 = Clock::now();
    const auto v = merge_reduce_check();
    report(8, "merge-and-reduce", v, seconds_since(t0));
  }
  if (want(9)) {
    const auto t0 = Clock::now();
    const auto v = adversary();
    report(9, "adaptive adversary", v, seconds_since(t0));
  }
  if (want(10)) {
    const auto t0 = Clock::now();
    auto v = scaling();
    const double s = seconds_since(t0);
    if (s >= 1200) v.pass = false;
    report(10, "scaling", v, s);
  }
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
