#include "tractmap/eval.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace tractmap {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tractography select_targets(const Tractography& t_b, const std::set<Eigen::Index>& targets) {
  Tractography out;
  out.voxel_size = t_b.voxel_size;
  out.name = t_b.name;
  out.streamlines.reserve(targets.size());
  for (Eigen::Index j : targets) out.streamlines.push_back(t_b.streamlines[j]);
  return out;
}

}  // namespace

Tractography mapped_tract(const Tractography& t_b, const Mapping& q) {
  if (q.empty()) throw std::invalid_argument("mapped_tract: empty mapping");
  std::set<Eigen::Index> targets;
  for (Eigen::Index j : q) {
    if (j < 0 || j >= t_b.size())
      throw std::invalid_argument("mapped_tract: target index out of range");
    targets.insert(j);
  }
  return select_targets(t_b, targets);
}

Tractography mapped_tract(const Tractography& t_b, const Mapping& q,
                          const std::vector<Eigen::Index>& superset_indices) {
  if (q.empty()) throw std::invalid_argument("mapped_tract: empty mapping");
  std::set<Eigen::Index> targets;
  for (Eigen::Index local : q) {
    if (local < 0 || local >= static_cast<Eigen::Index>(superset_indices.size()))
      throw std::invalid_argument("mapped_tract: target index outside the superset");
    const Eigen::Index global = superset_indices[local];
    if (global < 0 || global >= t_b.size())
      throw std::invalid_argument("mapped_tract: superset index out of range");
    targets.insert(global);
  }
  return select_targets(t_b, targets);
}

OverlapReport jaccard_overlap(const Tractography& t_a, const Tractography& t_b_mapped,
                              const Point3& voxel_size) {
  if (t_a.empty() || t_b_mapped.empty())
    throw std::invalid_argument("jaccard_overlap: empty tractography");

  const VoxelSet va = voxelize(t_a, voxel_size);
  const VoxelSet vb = voxelize(t_b_mapped, voxel_size);

  OverlapReport report;
  report.voxel_size = voxel_size;
  report.vol_a = va.size();
  report.vol_b = vb.size();

  const auto& smaller = va.size() <= vb.size() ? va.voxels : vb.voxels;
  const auto& larger = va.size() <= vb.size() ? vb.voxels : va.voxels;
  for (const VoxelIndex& v : smaller)
    if (larger.count(v)) ++report.vol_intersection;

  const std::int64_t vol_min = std::min(report.vol_a, report.vol_b);
  const std::int64_t vol_union = report.vol_a + report.vol_b - report.vol_intersection;
  if (vol_min > 0) {
    report.jaccard = static_cast<double>(report.vol_intersection) / static_cast<double>(vol_min);
    report.jaccard_union =
        static_cast<double>(report.vol_intersection) / static_cast<double>(vol_union);
  } else {
    report.empty_input = true;
  }
  return report;
}

double recovery_rate(const Mapping& q, const Mapping& ground_truth) {
  if (q.empty()) throw std::invalid_argument("recovery_rate: empty mapping");
  if (q.size() != ground_truth.size())
    throw std::invalid_argument("recovery_rate: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] == ground_truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(q.size());
}

ExperimentReport build_report(std::vector<PairResult> rows) {
  for (const PairResult& row : rows) {
    if (row.n_tract_a < 1 || row.n_tract_b < 1 || row.n_superset_b < 1)
      throw std::invalid_argument("build_report: sizes must be positive");
    for (const auto& [key, value] : row.metrics)
      if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument("build_report: metric \"" + key + "\" outside [0, 1]");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].metrics.size() != rows[0].metrics.size())
      throw std::invalid_argument("build_report: inconsistent metric columns");
    for (std::size_t k = 0; k < rows[r].metrics.size(); ++k)
      if (rows[r].metrics[k].first != rows[0].metrics[k].first)
        throw std::invalid_argument("build_report: inconsistent metric columns");
  }
  return ExperimentReport{std::move(rows)};
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "source,target,n_tract_a,n_tract_b,n_superset_b";
  if (!report.rows.empty())
    for (const auto& [key, value] : report.rows.front().metrics) out += "," + key;
  out += '\n';
  for (const PairResult& row : report.rows) {
    out += row.source_id + "," + row.target_id + "," + std::to_string(row.n_tract_a) + "," +
           std::to_string(row.n_tract_b) + "," + std::to_string(row.n_superset_b);
    for (const auto& [key, value] : row.metrics) out += "," + format_number(value);
    out += '\n';
  }
  return out;
}

std::string report_json(const ExperimentReport& report) {
  nlohmann::ordered_json root;
  root["rows"] = nlohmann::ordered_json::array();
  for (const PairResult& row : report.rows) {
    nlohmann::ordered_json r;
    r["source"] = row.source_id;
    r["target"] = row.target_id;
    r["n_tract_a"] = row.n_tract_a;
    r["n_tract_b"] = row.n_tract_b;
    r["n_superset_b"] = row.n_superset_b;
    nlohmann::ordered_json metrics;
    for (const auto& [key, value] : row.metrics) metrics[key] = value;
    r["metrics"] = std::move(metrics);

    nlohmann::ordered_json trace;
    trace["initial_loss"] = row.trace.initial_loss;
    trace["initial_temperature"] = row.trace.initial_temperature;
    trace["final_loss"] = row.trace.final_loss;
    trace["final_normalized_loss"] = row.trace.final_normalized_loss;
    trace["final_mapping"] = row.trace.final_mapping;
    // Records as [iteration, loss, normalized_loss, accepted, best_loss].
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const AnnealRecord& rec : row.trace.records)
      records.push_back({rec.iteration, rec.loss, rec.normalized_loss,
                         static_cast<int>(rec.accepted), rec.best_loss});
    trace["records"] = std::move(records);
    r["trace"] = std::move(trace);
    root["rows"].push_back(std::move(r));
  }
  return root.dump(2) + "\n";
}

std::string trace_csv(const AnnealTrace& trace) {
  std::string out = "iteration,loss,normalized_loss,accepted\n";
  for (const AnnealRecord& rec : trace.records)
    out += std::to_string(rec.iteration) + "," + format_number(rec.loss) + "," +
           format_number(rec.normalized_loss) + "," + (rec.accepted ? "1" : "0") + "\n";
  return out;
}

std::string overlap_json(const OverlapReport& report,
                         const std::vector<std::pair<std::string, double>>& extras) {
  nlohmann::ordered_json root;
  root["jaccard"] = report.jaccard;
  root["jaccard_union"] = report.jaccard_union;
  root["vol_a"] = report.vol_a;
  root["vol_b"] = report.vol_b;
  root["vol_intersection"] = report.vol_intersection;
  root["voxel_size"] = {report.voxel_size.x(), report.voxel_size.y(), report.voxel_size.z()};
  root["empty_input"] = report.empty_input;
  for (const auto& [key, value] : extras) root[key] = value;
  return root.dump(2) + "\n";
}

std::string overlap_csv(const OverlapReport& report,
                        const std::vector<std::pair<std::string, double>>& extras) {
  std::string out = "jaccard,jaccard_union,vol_a,vol_b,vol_intersection,voxel_size_x,"
                    "voxel_size_y,voxel_size_z,empty_input";
  for (const auto& [key, value] : extras) out += "," + key;
  out += '\n';
  out += format_number(report.jaccard) + "," + format_number(report.jaccard_union) + "," +
         std::to_string(report.vol_a) + "," + std::to_string(report.vol_b) + "," +
         std::to_string(report.vol_intersection) + "," + format_number(report.voxel_size.x()) +
         "," + format_number(report.voxel_size.y()) + "," + format_number(report.voxel_size.z()) +
         "," + (report.empty_input ? "1" : "0");
  for (const auto& [key, value] : extras) out += "," + format_number(value);
  out += '\n';
  return out;
}

}  // namespace tractmap
