#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "dyncore/errors.hpp"
#include "dyncore_tools/harness.hpp"

namespace {

using namespace dyncore;
using namespace dyncore::tools;

struct Options {
  int k = 2;
  int z = 2;
  double eps = 0.5;
  double lambda = 0.1;
  unsigned c_exp = 2;
  std::string constructor = "passthrough";
  std::string structure = "dyntree";
  bool bucketed = false;
  std::string outer = "eager";
  std::string verify = "none";
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double size_scale = 1.0;
  std::uint64_t threshold = 0;
  std::uint64_t outer_target = 0;
  std::uint64_t bucket_capacity = 0;
  std::uint64_t n_max = 1 << 16;
  std::string timing = "wall";
  std::string stream;
  std::string metrics_out;
  std::string snapshots_out;
  std::string coreset_out;
};

void add_config_flags(CLI::App& app, Options& o) {
  app.add_option("--k", o.k, "number of centers")->check(CLI::PositiveNumber);
  app.add_option("--z", o.z, "cost exponent (1 median, 2 means)")->check(CLI::IsMember({1, 2}));
  app.add_option("--eps", o.eps, "target quality in (0,1)");
  app.add_option("--lambda", o.lambda, "failure probability in (0,1)");
  app.add_option("--c-exp", o.c_exp, "input weights have numerator and denominator <= n_p^c");
  app.add_option("--constructor", o.constructor, "static constructor")
      ->check(CLI::IsMember({"passthrough", "uniform", "rings", "sensitivity"}));
  app.add_flag("--bucketed", o.bucketed, "store several points per leaf");
  app.add_option("--outer", o.outer, "outer instance mode")->check(CLI::IsMember({"eager", "lazy"}));
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--size-scale", o.size_scale, "constant of the size function");
  app.add_option("--threshold", o.threshold, "override the node threshold s'");
  app.add_option("--outer-target", o.outer_target, "override the outer output size");
  app.add_option("--bucket-capacity", o.bucket_capacity, "points per bucket in bucketed mode");
}

void add_replay_flags(CLI::App& app, Options& o) {
  add_config_flags(app, o);
  app.add_option("--stream", o.stream, "event stream file ('-' for stdin)")->required();
  app.add_option("--verify", o.verify, "certification at each Q")
      ->check(CLI::IsMember({"none", "sampled", "exhaustive"}));
  app.add_option("--samples", o.samples, "solutions per sampled certification");
  app.add_option("--n-max", o.n_max, "merge-and-reduce capacity");
  app.add_option("--timing", o.timing, "'off' writes wall_nanos as 0")->check(CLI::IsMember({"wall", "off"}));
}

HarnessConfig make_config(const Options& o, std::size_t dim) {
  HarnessConfig c;
  c.tree.k = o.k;
  c.tree.z = o.z;
  c.tree.metric = Metric::euclidean(dim);
  c.tree.eps = o.eps;
  c.tree.lambda = o.lambda;
  c.tree.c_exp = o.c_exp;
  c.tree.constructor = o.constructor;
  c.tree.size_scale = o.size_scale;
  if (o.threshold != 0) c.tree.threshold_override = o.threshold;
  if (o.outer_target != 0) c.tree.outer_target_override = o.outer_target;
  if (o.bucket_capacity != 0) c.tree.bucket_capacity = o.bucket_capacity;
  c.tree.bucketed = o.bucketed;
  c.tree.outer = o.outer == "lazy" ? OuterMode::Lazy : OuterMode::Eager;
  c.tree.seed = o.seed;
  c.structure = parse_structure(o.structure);
  c.verify = parse_verify(o.verify);
  c.sample_count = o.samples;
  c.n_max = o.n_max;
  c.timing = o.timing != "off";
  if (o.eps <= 0.0 || o.eps >= 1.0) throw InvalidArgument("--eps must lie in (0,1)");
  if (o.lambda <= 0.0 || o.lambda >= 1.0) throw InvalidArgument("--lambda must lie in (0,1)");
  return c;
}

std::vector<StreamEvent> read_events(const std::string& path) {
  if (path == "-") return parse_stream(std::cin);
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open stream '" + path + "'");
  return parse_stream(in);
}

std::size_t stream_dimension(const std::vector<StreamEvent>& events) {
  for (const auto& ev : events) {
    if (ev.op == Op::Insert) return ev.coords.size();
  }
  return 2;
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw InvalidArgument("cannot write '" + path + "'");
  return f;
}

int run_replay(const Options& o) {
  const auto events = read_events(o.stream);
  const HarnessConfig config = make_config(o, stream_dimension(events));
  auto metrics = open_out(o.metrics_out);
  auto snapshots = open_out(o.snapshots_out);
  const auto summary = replay(events, config, metrics ? metrics.get() : &std::cout, snapshots.get());
  if (auto coreset = open_out(o.coreset_out)) *coreset << coreset_json(summary.final_coreset, events.size()) << '\n';
  std::cerr << "events " << summary.rows.size() << ", queries " << summary.queries << ", final n "
            << summary.final_n << ", final coreset " << summary.final_coreset.size() << '\n';
  if (summary.certified != 0) {
    std::cerr << "certified " << summary.certified - summary.certification_failures << "/" << summary.certified
              << ", worst deviation " << format_double(summary.worst_deviation) << '\n';
  }
  if (summary.bound_violations != 0 || summary.root_mismatches != 0) {
    std::cerr << "bound violations " << summary.bound_violations << ", root mismatches " << summary.root_mismatches
              << '\n';
    return 2;
  }
  return 0;
}

int run_compare(const Options& o) {
  const auto events = read_events(o.stream);
  const HarnessConfig config = make_config(o, stream_dimension(events));
  std::cout << format_compare(compare(events, config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay, generate and compare dynamic coreset update streams"};
  app.require_subcommand(1);
  Options o;

  auto* rep = app.add_subcommand("replay", "replay a stream and write per-event metrics CSV");
  add_replay_flags(*rep, o);
  rep->add_option("--structure", o.structure, "structure to replay")
      ->check(CLI::IsMember({"dyntree", "mergereduce", "recompute"}));
  rep->add_option("--metrics-out", o.metrics_out, "metrics CSV path (default stdout)");
  rep->add_option("--snapshots-out", o.snapshots_out, "JSON lines, one coreset per Q");
  rep->add_option("--coreset-out", o.coreset_out, "JSON dump of the final coreset");

  auto* cmp = app.add_subcommand("compare", "run dyntree, mergereduce and recompute on one stream");
  add_replay_flags(*cmp, o);

  GeneratorParams g;
  std::string kind = "random-mix";
  std::string out_path;
  auto* gen = app.add_subcommand("generate", "write a synthetic stream");
  add_config_flags(*gen, o);
  gen->add_option("--kind", kind, "stream kind")
      ->check(CLI::IsMember({"random-mix", "insertion-only", "adversarial-delete-coreset", "cluster-drift"}));
  gen->add_option("--n", g.n, "points (window size for cluster-drift)");
  gen->add_option("--events", g.events, "total events for random-mix and cluster-drift");
  gen->add_option("--delete-fraction", g.delete_fraction, "share of deletes in random-mix");
  gen->add_option("--update-fraction", g.update_fraction, "share of weight updates in random-mix");
  gen->add_option("--query-every", g.query_every, "insert a Q every this many events");
  gen->add_option("--dim", g.dim, "dimension");
  gen->add_option("--clusters", g.clusters, "mixture components");
  gen->add_option("--spread", g.spread, "component standard deviation");
  gen->add_option("--extent", g.extent, "side of the box holding the centers");
  gen->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*rep) return run_replay(o);
    if (*cmp) return run_compare(o);
    g.kind = parse_stream_kind(kind);
    g.seed = o.seed;
    const HarnessConfig config = make_config(o, g.dim);
    const auto events = generate_stream(g, config.tree);
    if (auto f = open_out(out_path)) {
      write_stream(*f, events);
    } else {
      write_stream(std::cout, events);
    }
    return 0;
  } catch (const ReplayError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.contract() ? 2 : 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
