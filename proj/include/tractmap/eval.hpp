#pragma once

#include "tractmap/geometry.hpp"
#include "tractmap/graph.hpp"
#include "tractmap/optim.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tractmap {

/// Voxel-overlap metrics between two tractographies. jaccard follows the
/// overlap-coefficient form (min denominator); jaccard_union is the
/// classical union-denominator variant, emitted alongside for transparency.
struct OverlapReport {
  double jaccard = 0.0;
  double jaccard_union = 0.0;
  std::int64_t vol_a = 0;
  std::int64_t vol_b = 0;
  std::int64_t vol_intersection = 0;
  Point3 voxel_size = Point3::Ones();
  bool empty_input = false;  ///< metrics forced to 0 because a voxel set was empty
};

/// Q(T_B): the target streamlines selected by the mapping, deduplicated (a
/// streamline mapped by several sources appears once), in ascending target
/// order. Targets are global indices into t_b.
Tractography mapped_tract(const Tractography& t_b, const Mapping& q);

/// As above with mapping targets local to superset_indices' enumeration;
/// superset_indices[q[i]] is the global index.
Tractography mapped_tract(const Tractography& t_b, const Mapping& q,
                          const std::vector<Eigen::Index>& superset_indices);

/// Voxelizes both tractographies and compares occupancy:
/// jaccard = |A ∩ B| / min(|A|, |B|). Symmetric in its two arguments.
OverlapReport jaccard_overlap(const Tractography& t_a, const Tractography& t_b_mapped,
                              const Point3& voxel_size);

/// Fraction of sources mapped to their ground-truth target.
double recovery_rate(const Mapping& q, const Mapping& ground_truth);

/// One experiment row: identifiers, instance sizes, named metric columns in
/// a fixed order, and the full loss trace.
struct PairResult {
  std::string source_id;
  std::string target_id;
  Eigen::Index n_tract_a = 0;
  Eigen::Index n_tract_b = 0;
  Eigen::Index n_superset_b = 0;
  std::vector<std::pair<std::string, double>> metrics;
  AnnealTrace trace;
};

struct ExperimentReport {
  std::vector<PairResult> rows;
};

/// Validates rows (positive sizes, metrics within [0,1], identical metric
/// columns across rows) and assembles the report.
ExperimentReport build_report(std::vector<PairResult> rows);

/// Serializations. Columns appear in the rows' metric order, stable across
/// runs; the trace is carried in the JSON form only.
std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);

/// Loss-trace CSV, header "iteration,loss,normalized_loss,accepted", one
/// row per record.
std::string trace_csv(const AnnealTrace& trace);

/// OverlapReport serializations; extras append scalar columns (e.g. the
/// recovery rate) in the given order.
std::string overlap_json(const OverlapReport& report,
                         const std::vector<std::pair<std::string, double>>& extras = {});
std::string overlap_csv(const OverlapReport& report,
                        const std::vector<std::pair<std::string, double>>& extras = {});

}  // namespace tractmap
