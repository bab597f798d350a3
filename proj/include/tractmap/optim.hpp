#pragma once

#include "tractmap/graph.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace tractmap {

/// Annealing parameters. An unset initial_temperature resolves to
/// (initial squared loss / N) at run time; greedy_only disables uphill
/// moves so the run degenerates to the pure stochastic-greedy transition.
struct AnnealSchedule {
  int iterations = 1000;
  std::optional<double> initial_temperature;
  double cooling = 0.995;
  std::uint64_t seed = 0;
  bool greedy_only = false;
  std::vector<int> snapshot_iterations;
};

/// One loss-trace row. loss is the Frobenius loss of the current mapping
/// after the iteration; best_loss is the running minimum over iterations.
struct AnnealRecord {
  int iteration = 0;
  double loss = 0.0;
  double normalized_loss = 0.0;
  bool accepted = false;
  double best_loss = 0.0;
};

/// Full annealing result. records has iterations + 1 entries (index 0 is
/// the initial state); final_mapping is the best-so-far mapping and
/// final_loss its exactly recomputed loss.
struct AnnealTrace {
  std::vector<AnnealRecord> records;
  Mapping final_mapping;
  double final_loss = 0.0;
  double final_normalized_loss = 0.0;
  double initial_loss = 0.0;
  double initial_temperature = 0.0;
  std::vector<std::pair<int, Mapping>> snapshots;
};

/// Result of a single greedy re-map of one source streamline.
struct GreedyStep {
  Eigen::Index target = 0;
  double delta = 0.0;
};

/// Search-space reduction around a target tract: medoid_index is the global
/// index (into the full tractography) of the tract medoid, radius the
/// largest medoid-to-member MAM distance, and indices the retained global
/// target indices, sorted ascending.
struct SupersetFilter {
  double alpha = 3.0;
  Eigen::Index medoid_index = 0;
  double radius = 0.0;
  std::vector<Eigen::Index> indices;
};

struct BruteForceResult {
  Mapping mapping;
  double loss = 0.0;
};

/// Index minimizing the row sum of a distance matrix; ties break toward the
/// lowest index.
Eigen::Index medoid(const Eigen::Ref<const Eigen::MatrixXd>& distances);

/// Keeps every streamline of `full` within alpha * r of the tract medoid,
/// where the medoid and r = max medoid-to-member distance are computed over
/// the tract given by `tract_indices` (indices into `full`). The result
/// contains every tract index whenever alpha >= 1.
SupersetFilter superset_filter(const Tractography& full,
                               const std::vector<Eigen::Index>& tract_indices,
                               double alpha = 3.0);

/// Initial mapping sending each source streamline to its nearest target by
/// the cross-distance matrix; ties break toward the lowest target index.
Mapping nn_init(const Eigen::Ref<const Eigen::MatrixXd>& cross);

/// Initial mapping drawn uniformly over targets, one draw per source.
Mapping random_init(Eigen::Index n_source, Eigen::Index n_target, std::uint64_t seed);

/// Best single re-assignment of source i over all targets by squared-loss
/// delta, ties toward the lowest target index. When no target gives a
/// strictly negative delta, returns (q[i], 0).
GreedyStep greedy_remap(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                        Eigen::Index i);

/// Simulated annealing over mapping space from initial mapping q0. Each
/// iteration draws one source streamline uniformly and greedily re-maps it;
/// when no strict improvement exists, the best alternative target is
/// proposed instead and accepted with Metropolis probability
/// exp(-delta / temperature) on the squared loss. Temperature cools
/// geometrically each iteration. Deterministic for a fixed seed; the
/// best-so-far mapping is returned.
AnnealTrace anneal(const Eigen::Ref<const Eigen::MatrixXd>& a,
                   const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q0,
                   const AnnealSchedule& schedule);

/// Exact minimizer over all M^N mappings, lexicographically smallest on
/// ties. Throws when M^N exceeds `budget`.
BruteForceResult brute_force_mapping(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                     const Eigen::Ref<const Eigen::MatrixXd>& b,
                                     std::uint64_t budget = 1000000);

/// Exact minimizer over permutations (bijective mappings); requires equal
/// sizes with at most 8 streamlines per side.
BruteForceResult brute_force_matching(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                      const Eigen::Ref<const Eigen::MatrixXd>& b);

}  // namespace tractmap
