#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <unordered_map>

#include "dyncore/errors.hpp"
#include "dyncore_tools/harness.hpp"

namespace dyncore::tools {

namespace {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
  // Box-Muller, so streams do not depend on the standard library's normal distribution.
  double normal() {
    const double u1 = std::max(uniform(), 0x1.0p-53);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  // Rounded to 1e-6 so the text form stays short.
  static double tidy(double v) { return std::round(v * 1e6) / 1e6; }

 private:
  std::mt19937_64 rng_;
};

struct Mixture {
  std::vector<std::vector<double>> centers;
  double spread;

  Mixture(Source& src, const GeneratorParams& p) : spread(p.spread) {
    centers.resize(std::max<std::size_t>(p.clusters, 1));
    for (auto& c : centers) {
      c.resize(p.dim);
      for (auto& x : c) x = src.uniform() * p.extent;
    }
  }

  std::vector<double> draw(Source& src) {
    const auto& c = centers[src.below(centers.size())];
    std::vector<double> x(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) x[i] = Source::tidy(c[i] + spread * src.normal());
    return x;
  }
};

StreamEvent insert_event(PointId id, const mpq_class& w, std::vector<double> coords) {
  StreamEvent ev;
  ev.op = Op::Insert;
  ev.id = id;
  ev.weight = w;
  ev.coords = std::move(coords);
  return ev;
}

StreamEvent simple_event(Op op, PointId id = 0) {
  StreamEvent ev;
  ev.op = op;
  ev.id = id;
  return ev;
}

void number_lines(std::vector<StreamEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) events[i].line = i + 1;
}

}  // namespace

StreamKind parse_stream_kind(std::string_view name) {
  if (name == "random-mix") return StreamKind::RandomMix;
  if (name == "insertion-only") return StreamKind::InsertionOnly;
  if (name == "adversarial-delete-coreset") return StreamKind::AdversarialDeleteCoreset;
  if (name == "cluster-drift") return StreamKind::ClusterDrift;
  throw InvalidArgument("unknown stream kind '" + std::string(name) + "'");
}

std::vector<StreamEvent> generate_stream(const GeneratorParams& params, const TreeConfig& tree) {
  if (params.dim == 0) throw InvalidArgument("dimension must be at least 1");
  if (params.delete_fraction < 0.0 || params.update_fraction < 0.0 ||
      params.delete_fraction + params.update_fraction >= 1.0) {
    throw InvalidArgument("delete and update fractions must be nonnegative and sum below 1");
  }
  Source src(params.seed);
  Mixture mix(src, params);
  std::vector<StreamEvent> out;
  PointId next_id = 1;
  auto maybe_query = [&] {
    if (params.query_every != 0 && out.size() % params.query_every == params.query_every - 1) {
      out.push_back(simple_event(Op::Query));
    }
  };

  switch (params.kind) {
    case StreamKind::InsertionOnly: {
      for (std::size_t i = 0; i < params.n; ++i) {
        maybe_query();
        out.push_back(insert_event(next_id++, 1, mix.draw(src)));
      }
      break;
    }
    case StreamKind::RandomMix: {
      const std::size_t total = params.events == 0 ? params.n : params.events;
      std::vector<PointId> live;
      std::unordered_map<PointId, std::pair<std::size_t, mpq_class>> info;  // slot, weight
      const mpq_class choices[] = {mpq_class(1), mpq_class(2), mpq_class(1, 2), mpq_class(3, 4)};
      while (out.size() < total) {
        maybe_query();
        if (out.size() >= total) break;
        const double r = src.uniform();
        if (!live.empty() && r < params.delete_fraction) {
          const std::size_t slot = src.below(live.size());
          const PointId id = live[slot];
          live[slot] = live.back();
          info[live[slot]].first = slot;
          live.pop_back();
          info.erase(id);
          out.push_back(simple_event(Op::Delete, id));
        } else if (!live.empty() && r < params.delete_fraction + params.update_fraction) {
          const PointId id = live[src.below(live.size())];
          auto& w = info[id].second;
          const mpq_class delta = w > 4 ? mpq_class(-1, 2) : mpq_class(1, 2);
          w += delta;
          StreamEvent ev = simple_event(Op::Update, id);
          ev.weight = delta;
          out.push_back(ev);
        } else {
          const PointId id = next_id++;
          const mpq_class w = choices[src.below(4)];
          info[id] = {live.size(), w};
          live.push_back(id);
          out.push_back(insert_event(id, w, mix.draw(src)));
        }
      }
      break;
    }
    case StreamKind::ClusterDrift: {
      const std::size_t total = params.events == 0 ? 3 * params.n : params.events;
      std::deque<PointId> window;
      const double step = params.spread * 0.25;
      while (out.size() < total) {
        maybe_query();
        if (out.size() >= total) break;
        if (window.size() >= params.n && !window.empty()) {
          out.push_back(simple_event(Op::Delete, window.front()));
          window.pop_front();
          continue;
        }
        for (auto& c : mix.centers) {
          for (auto& x : c) x += step * src.normal();
        }
        const PointId id = next_id++;
        window.push_back(id);
        out.push_back(insert_event(id, 1, mix.draw(src)));
      }
      break;
    }
    case StreamKind::AdversarialDeleteCoreset: {
      TreeConfig cfg = tree;
      cfg.metric = Metric::euclidean(params.dim);
      DynamicCoresetTree t(cfg);
      for (std::size_t i = 0; i < params.n; ++i) {
        const PointId id = next_id++;
        auto coords = mix.draw(src);
        Point p;
        p.id = id;
        p.coords = coords;
        t.insert(p, 1);
        out.push_back(insert_event(id, 1, std::move(coords)));
      }
      while (t.size() > 0) {
        out.push_back(simple_event(Op::Query));
        std::set<PointId> ids;
        for (const auto& e : t.query()->flatten()) ids.insert(e.point->id);
        if (ids.empty()) break;
        for (PointId id : ids) {
          t.erase(id);
          out.push_back(simple_event(Op::Delete, id));
        }
      }
      break;
    }
  }
  out.push_back(simple_event(Op::Query));
  number_lines(out);
  return out;
}

}  // namespace dyncore::tools
