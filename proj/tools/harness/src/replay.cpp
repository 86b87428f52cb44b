#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "dyncore/errors.hpp"
#include "dyncore_tools/harness.hpp"
#include "json.hpp"

namespace dyncore::tools {

std::string format_row(const MetricsRow& row) {
  std::string out = std::to_string(row.update_index) + "," + row.op + "," + std::to_string(row.n) + "," +
                    std::to_string(row.static_calls_nonouter) + "," + std::to_string(row.static_calls_outer) + "," +
                    std::to_string(row.wall_nanos) + "," + std::to_string(row.coreset_size) + ",";
  if (row.certified_deviation) {
    out += std::isfinite(*row.certified_deviation) ? format_double(*row.certified_deviation) : "inf";
  }
  out += "," + std::to_string(row.phase_id);
  return out;
}

std::string coreset_json(const std::vector<WeightedPoint>& points, std::uint64_t update_index) {
  nlohmann::json j;
  j["update_index"] = update_index;
  j["size"] = points.size();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& wp : points) {
    nlohmann::json p;
    p["id"] = wp.point.id;
    p["weight"] = wp.weight.to_string();
    if (wp.point.coords.empty()) {
      p["index"] = wp.point.metric_index;
    } else {
      p["coords"] = wp.point.coords;
    }
    arr.push_back(std::move(p));
  }
  j["points"] = std::move(arr);
  return j.dump();
}

ReplaySummary replay(const std::vector<StreamEvent>& events, const HarnessConfig& config, std::ostream* metrics,
                     std::ostream* snapshots) {
  auto structure = make_structure(config);
  std::map<PointId, std::pair<Point, mpq_class>> live;
  ReplaySummary summary;
  if (metrics != nullptr) *metrics << kMetricsHeader << '\n';

  std::uint64_t index = 0;
  for (const auto& ev : events) {
    ++index;
    const std::string where = "event " + std::to_string(index) + " (line " + std::to_string(ev.line) + ")";
    MetricsRow row;
    row.update_index = index;
    row.op = static_cast<char>(ev.op);
    try {
      if (ev.op == Op::Query) {
        std::uint64_t calls = 0;
        const NodeSet::Ptr set = structure->query(calls);
        row.static_calls_outer = calls;
        row.coreset_size = set->size();
        ++summary.queries;
        auto points = set->to_weighted_points();
        if (config.verify != VerifyMode::None) {
          std::vector<WeightedPoint> input;
          input.reserve(live.size());
          for (const auto& [id, pw] : live) {
            input.push_back(WeightedPoint{pw.first, BoundedRational::from_rational(pw.second)});
          }
          const auto mode = config.verify == VerifyMode::Exhaustive ? CertifyMode::Exhaustive : CertifyMode::Sampled;
          const auto rep = certify_coreset(points, input, config.tree.eps, config.tree.k, config.tree.z,
                                           config.tree.metric, mode, config.sample_count,
                                           mix_seed(config.tree.seed, 7, index));
          row.certified_deviation = rep.worst_deviation;
          ++summary.certified;
          if (!rep.passed) ++summary.certification_failures;
          summary.worst_deviation = std::max(summary.worst_deviation, rep.worst_deviation);
          if (auto ids = structure->passthrough_root_ids()) {
            std::sort(ids->begin(), ids->end());
            std::vector<PointId> expected;
            for (const auto& [id, pw] : live) expected.push_back(id);
            if (*ids != expected) ++summary.root_mismatches;
          }
        }
        if (snapshots != nullptr) *snapshots << coreset_json(points, index) << '\n';
        summary.final_coreset = std::move(points);
      } else {
        UpdateReport rep;
        if (ev.op == Op::Insert) {
          Point p;
          p.id = ev.id;
          p.coords = ev.coords;
          rep = structure->insert(p, ev.weight);
          live[ev.id] = {p, ev.weight};
        } else if (ev.op == Op::Delete) {
          rep = structure->erase(ev.id);
          live.erase(ev.id);
        } else {
          rep = structure->update_weight(ev.id, ev.weight);
          auto& w = live.at(ev.id).second;
          w += ev.weight;
        }
        row.static_calls_nonouter = rep.static_calls_nonouter;
        row.static_calls_outer = rep.static_calls_outer;
        row.wall_nanos = config.timing ? rep.wall_nanos : 0;
        row.coreset_size = rep.coreset_size;
        if (rep.static_calls_nonouter > 4ULL * ceil_log2(std::max<std::size_t>(structure->size(), 1))) {
          ++summary.bound_violations;
        }
      }
    } catch (const ContractViolation& e) {
      throw ReplayError(where + ": contract violation: " + e.what(), true);
    } catch (const InvalidArgument& e) {
      throw ReplayError(where + ": " + e.what(), false);
    } catch (const UnsupportedOperation& e) {
      throw ReplayError(where + ": " + e.what(), false);
    }
    row.n = structure->size();
    row.phase_id = structure->phase_id();
    if (metrics != nullptr) *metrics << format_row(row) << '\n';
    summary.rows.push_back(row);
  }
  summary.final_n = structure->size();
  summary.node_count = structure->node_count();
  return summary;
}

std::vector<CompareRow> compare(const std::vector<StreamEvent>& events, const HarnessConfig& config) {
  std::vector<CompareRow> out;
  for (StructureKind kind : {StructureKind::DynTree, StructureKind::MergeReduce, StructureKind::Recompute}) {
    HarnessConfig c = config;
    c.structure = kind;
    std::vector<StreamEvent> stream = events;
    CompareRow row;
    row.structure = std::string(structure_name(kind));
    if (kind == StructureKind::MergeReduce) {
      const auto cut = std::find_if(stream.begin(), stream.end(),
                                    [](const StreamEvent& e) { return e.op == Op::Delete || e.op == Op::Update; });
      if (cut != stream.end()) {
        row.note = "insertion-only prefix of " + std::to_string(cut - stream.begin()) + " events";
        stream.erase(cut, stream.end());
        StreamEvent q;
        q.op = Op::Query;
        stream.push_back(q);
      }
      std::size_t inserts = 0;
      for (const auto& e : stream) inserts += e.op == Op::Insert ? 1 : 0;
      c.n_max = std::max<std::uint64_t>(c.n_max, std::max<std::size_t>(inserts, 2));
    }
    const auto summary = replay(stream, c, nullptr, nullptr);
    std::uint64_t total = 0;
    std::size_t updates = 0;
    double size_total = 0.0;
    for (const auto& r : summary.rows) {
      size_total += static_cast<double>(r.coreset_size);
      if (r.op == 'Q') continue;
      total += r.wall_nanos;
      row.max_update_nanos = std::max(row.max_update_nanos, r.wall_nanos);
      ++updates;
    }
    row.events = summary.rows.size();
    row.mean_update_nanos = updates == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(updates);
    row.queries = summary.queries;
    row.certified = summary.certified;
    row.passed = summary.certified - summary.certification_failures;
    row.mean_coreset_size = summary.rows.empty() ? 0.0 : size_total / static_cast<double>(summary.rows.size());
    row.final_coreset_size = summary.final_coreset.size();
    row.node_count = summary.node_count;
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "structure" << std::right << std::setw(8) << "events" << std::setw(14)
     << "mean_ns" << std::setw(14) << "max_ns" << std::setw(9) << "queries" << std::setw(11) << "certified"
     << std::setw(12) << "mean_size" << std::setw(11) << "final_size" << std::setw(8) << "nodes"
     << "  note\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.structure << std::right << std::setw(8) << r.events << std::setw(14)
       << std::fixed << std::setprecision(0) << r.mean_update_nanos << std::setw(14) << r.max_update_nanos
       << std::setw(9) << r.queries << std::setw(11)
       << (std::to_string(r.passed) + "/" + std::to_string(r.certified)) << std::setw(12) << std::setprecision(1)
       << r.mean_coreset_size << std::setw(11) << r.final_coreset_size << std::setw(8) << r.node_count << "  "
       << r.note << '\n';
  }
  return os.str();
}

}  // namespace dyncore::tools
