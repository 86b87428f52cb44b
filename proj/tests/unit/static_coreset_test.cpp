#include <gtest/gtest.h>

#include "dyncore/errors.hpp"
#include "dyncore/oracle.hpp"
#include "dyncore/static_coreset.hpp"
#include "test_support.hpp"

using namespace dyncore;
using testsupport::Gen;

namespace {

std::vector<IntEntry> unit_entries(const std::vector<Point>& pts, unsigned long w = 1) {
  std::vector<IntEntry> out;
  for (const auto& p : pts) out.push_back(IntEntry{std::make_shared<const Point>(p), mpz_class(w)});
  return out;
}

std::vector<WeightedPoint> as_weighted(const std::vector<IntEntry>& entries, const DenomTag& scale) {
  return NodeSet::materialized(scale, entries)->to_weighted_points();
}

mpz_class total(const std::vector<IntEntry>& e) {
  mpz_class t = 0;
  for (const auto& x : e) t += x.weight;
  return t;
}

StaticCallParams params(std::uint64_t target, std::uint64_t seed, double eps_s = 0.5, double lambda_s = 0.1) {
  StaticCallParams p;
  p.eps_s = eps_s;
  p.lambda_s = lambda_s;
  p.target_size = target;
  p.n_p = 256;
  p.eps = 0.5;
  p.seed = seed;
  return p;
}

class FixedOutput final : public StaticConstructor {
 public:
  FixedOutput(std::vector<IntEntry> out, double delta, std::uint64_t size)
      : out_(std::move(out)), delta_(delta), size_{SizeKind::Fixed, 1.0, 2, size} {}
  std::string_view name() const override { return "fixed"; }
  WeightDiscipline discipline() const override { return WeightDiscipline::Integer; }
  double weight_inflation(const StaticCallParams&) const override { return delta_; }
  const SizeFunction& size_function() const override { return size_; }
  const ClusterSpec& cluster() const override { return spec_; }
  StaticOutput build(std::span<const IntEntry>, const StaticCallParams&) const override {
    return StaticOutput{out_, DenomTag{}};
  }

 private:
  std::vector<IntEntry> out_;
  double delta_;
  SizeFunction size_;
  ClusterSpec spec_;
};

}  // namespace

TEST(Passthrough, ReturnsInput) {
  Gen g(1);
  const auto in = unit_entries(testsupport::planar_mixture(g, 5, 2), 3);
  const auto out = passthrough(in);
  ASSERT_EQ(out.entries.size(), 5U);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(out.entries[i].point, in[i].point);
    EXPECT_EQ(out.entries[i].weight, 3);
  }
  EXPECT_TRUE(out.scale.is_one());
  EXPECT_TRUE(passthrough({}).entries.empty());
}

TEST(Bicriteria, SmallCases) {
  ClusterSpec spec;
  const auto one = unit_entries({testsupport::point(1, {2, 3})});
  const auto r = d2_sample_bicriteria(one, spec, 0.1, 5);
  ASSERT_EQ(r.centers.size(), 1U);
  EXPECT_EQ(r.total_cost, 0.0);

  std::vector<Point> same;
  for (int i = 0; i < 10; ++i) same.push_back(testsupport::point(i + 1, {4, 4}));
  EXPECT_EQ(d2_sample_bicriteria(unit_entries(same), spec, 0.1, 9).total_cost, 0.0);
  EXPECT_THROW(d2_sample_bicriteria({}, spec, 0.1, 1), InvalidArgument);
}

TEST(Bicriteria, FindsSeparatedClusters) {
  ClusterSpec spec;
  spec.k = 3;
  std::vector<Point> pts;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 6; ++i) pts.push_back(testsupport::point(pts.size() + 1, {1000.0 * c, 0}));
  }
  const auto in = unit_entries(pts);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = d2_sample_bicriteria(in, spec, 0.1, seed);
    EXPECT_LE(r.centers.size(), 2U * 3U * 4U);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double d = spec.metric.power_distance(*in[i].point, r.centers[r.assignment[i]], 2);
      EXPECT_EQ(d, r.power_distance[i]);
      for (const auto& c : r.centers) EXPECT_LE(d, spec.metric.power_distance(*in[i].point, c, 2));
    }
    hits += r.total_cost == 0.0 ? 1 : 0;
  }
  EXPECT_GE(hits, 90);
}

TEST(Bicriteria, Deterministic) {
  Gen g(2);
  const auto in = unit_entries(testsupport::planar_mixture(g, 60, 3));
  ClusterSpec spec;
  const auto a = d2_sample_bicriteria(in, spec, 0.05, 77);
  const auto b = d2_sample_bicriteria(in, spec, 0.05, 77);
  EXPECT_EQ(a.center_index, b.center_index);
  EXPECT_EQ(a.total_cost, b.total_cost);
}

TEST(UniformSample, Examples) {
  Gen g(3);
  const auto in = unit_entries(testsupport::planar_mixture(g, 20, 2), 2);
  EXPECT_EQ(uniform_sample(in, 20, 1).entries.size(), 20U);
  EXPECT_EQ(uniform_sample(in, 50, 1).entries.size(), 20U);
  const auto out = uniform_sample(in, 7, 4);
  EXPECT_LE(out.entries.size(), 7U);
  EXPECT_EQ(mpq_class(total(out.entries)) / mpq_class(out.scale.value()), mpq_class(total(in)));
  const auto single = uniform_sample(std::vector<IntEntry>{in[0]}, 3, 4);
  ASSERT_EQ(single.entries.size(), 1U);
  EXPECT_EQ(single.entries[0].weight, 2);
  EXPECT_THROW(uniform_sample({}, 3, 1), InvalidArgument);
}

TEST(RingSample, SmallInputUnchanged) {
  Gen g(4);
  ClusterSpec spec;
  const auto in = unit_entries(testsupport::planar_mixture(g, 30, 2));
  const auto out = ring_sample(in, spec, params(30, 1));
  EXPECT_EQ(out.entries.size(), 30U);
  EXPECT_TRUE(ring_sample({}, spec, params(30, 1)).entries.empty());
}

TEST(RingSample, ConservesWeightExactly) {
  Gen g(5);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ClusterSpec spec;
    spec.z = seed % 2 == 0 ? 2 : 1;
    std::vector<IntEntry> in;
    for (const auto& p : testsupport::planar_mixture(g, 150, 3, 3.0)) {
      in.push_back(IntEntry{std::make_shared<const Point>(p), mpz_class(static_cast<unsigned long>(g.range(1, 1000)))});
    }
    const std::uint64_t target = g.range(1, 80);
    const auto out = ring_sample(in, spec, params(target, seed));
    EXPECT_LE(out.entries.size(), target);
    EXPECT_EQ(total(out.entries), total(in));
    EXPECT_TRUE(out.scale.is_one());
  }
}

TEST(RingSample, CertifiesOnTwoClusters) {
  ClusterSpec spec;
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Gen g(1000 + seed);
    const auto pts = testsupport::planar_mixture(g, 200, 2, 2.0);
    const auto in = unit_entries(pts);
    const auto out = ring_sample(in, spec, params(60, seed));
    const auto rep = certify_coreset(as_weighted(out.entries, out.scale), as_weighted(in, {}), 0.5, 2, 2, spec.metric);
    failures += rep.passed ? 0 : 1;
  }
  EXPECT_LE(failures, 20);
}

TEST(SensitivitySample, RoundedWeightsAndScale) {
  Gen g(6);
  ClusterSpec spec;
  const auto in = unit_entries(testsupport::planar_mixture(g, 300, 3, 2.0));
  const auto p = params(50, 3);
  const auto out = sensitivity_sample(in, spec, p);
  const std::uint64_t grid = log_eps_ceil(p.n_p, p.eps);
  DenomTag expect;
  expect.multiply(FactorKind::Threshold, 50).multiply(FactorKind::LogEps, grid);
  EXPECT_EQ(out.scale, expect);
  EXPECT_LE(out.entries.size(), 50U);
  for (const auto& e : out.entries) EXPECT_GE(e.weight, grid - 1);
  const mpq_class out_total(total(out.entries), out.scale.value());
  EXPECT_LE(out_total, mpq_class(1.5) * mpq_class(total(in)));
}

TEST(SensitivitySample, CertifiesOnFiveHundredPoints) {
  ClusterSpec spec;
  int failures = 0;
  const auto p0 = params(0, 0, 0.3);
  const double tol = 0.3 + 2.0 * p0.eps / std::log2(static_cast<double>(p0.n_p));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Gen g(5000 + seed);
    const auto in = unit_entries(testsupport::planar_mixture(g, 500, 2, 2.0));
    auto p = p0;
    p.target_size = 150;
    p.seed = seed;
    const auto out = sensitivity_sample(in, spec, p);
    const auto rep = certify_coreset(as_weighted(out.entries, out.scale), as_weighted(in, {}), tol, 2, 2, spec.metric);
    failures += rep.passed ? 0 : 1;
  }
  EXPECT_LE(failures, 20);
}

TEST(SensitivitySample, UnbiasedOnTenPoints) {
  ClusterSpec spec;
  spec.k = 2;
  const std::vector<Point> pts{testsupport::point(1, {0, 0}),  testsupport::point(2, {1, 0}),
                               testsupport::point(3, {0, 2}),  testsupport::point(4, {10, 10}),
                               testsupport::point(5, {11, 9}), testsupport::point(6, {30, 1}),
                               testsupport::point(7, {2, 2}),  testsupport::point(8, {12, 12}),
                               testsupport::point(9, {-5, 3}), testsupport::point(10, {29, 4})};
  std::vector<IntEntry> in;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    in.push_back(IntEntry{std::make_shared<const Point>(pts[i]), mpz_class(static_cast<unsigned long>(1 + i % 3))});
  }
  const std::vector<Point> centers{testsupport::point(100, {1, 1}), testsupport::point(101, {20, 5})};
  auto cost_of = [&](const Point& x) {
    double best = INFINITY;
    for (const auto& c : centers) best = std::min(best, spec.metric.power_distance(x, c, 2));
    return best;
  };
  double exact = 0.0;
  for (const auto& e : in) exact += e.weight.get_d() * cost_of(*e.point);
  double sum = 0.0;
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    for (const auto& [pt, w] : sensitivity_draw(in, spec, params(4, static_cast<std::uint64_t>(s)))) {
      sum += w * cost_of(*pt);
    }
  }
  EXPECT_NEAR(sum / trials, exact, 0.02 * exact);
}

TEST(Constructors, Deterministic) {
  Gen g(7);
  const auto in = unit_entries(testsupport::planar_mixture(g, 200, 3, 2.0));
  for (const char* name : {"uniform", "rings", "sensitivity"}) {
    const auto c = make_constructor(name, ClusterSpec{}, 1.0);
    const auto a = c->build(in, params(40, 123));
    const auto b = c->build(in, params(40, 123));
    ASSERT_EQ(a.entries.size(), b.entries.size()) << name;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      EXPECT_EQ(a.entries[i].point, b.entries[i].point);
      EXPECT_EQ(a.entries[i].weight, b.entries[i].weight);
    }
    EXPECT_EQ(a.scale, b.scale);
  }
  EXPECT_THROW(make_constructor("bogus", ClusterSpec{}), InvalidArgument);
}

TEST(Constructors, RunCheckedEnforcesContract) {
  Gen g(8);
  const auto in = unit_entries(testsupport::planar_mixture(g, 10, 2));
  FixedOutput too_many(in, 0.0, 5);
  EXPECT_THROW(run_checked(too_many, in, params(5, 1)), ContractViolation);
  auto heavy = std::vector<IntEntry>(in.begin(), in.begin() + 2);
  heavy[0].weight = 100;
  FixedOutput inflated(heavy, 0.5, 5);
  EXPECT_THROW(run_checked(inflated, in, params(5, 1)), ContractViolation);
  heavy[0].weight = 14;  // 14 + 1 <= 1.5 * 10
  FixedOutput fine(heavy, 0.5, 5);
  std::vector<CallRecord> seen;
  CallObserver obs = [&](const CallRecord& r) { seen.push_back(r); };
  EXPECT_NO_THROW(run_checked(fine, in, params(5, 1), &obs));
  ASSERT_EQ(seen.size(), 1U);
  EXPECT_EQ(seen[0].input_total, 10);
  EXPECT_EQ(seen[0].output_total, 15);
}

TEST(SizeFunction, Monotone) {
  for (SizeKind kind : {SizeKind::Rings, SizeKind::Sensitivity}) {
    SizeFunction s{kind, 1.0, 3, 0};
    for (double lw = 1; lw < 200; lw *= 1.7) {
      EXPECT_LE(s(0.5, 0.1, lw, 64), s(0.5, 0.1, lw * 1.7, 64));
      EXPECT_LE(s(0.5, 0.1, lw, 64), s(0.25, 0.1, lw, 64));
      EXPECT_LE(s(0.5, 0.1, lw, 64), s(0.5, 0.05, lw, 64));
    }
  }
  SizeFunction fixed{SizeKind::Fixed, 1.0, 2, 17};
  EXPECT_EQ(fixed(0.1, 0.1, 5, 5), 17U);
  EXPECT_EQ(SizeFunction{}(0.1, 0.1, 5, 5), kUnboundedSize);
}
