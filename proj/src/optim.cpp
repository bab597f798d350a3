#include "tractmap/optim.hpp"

#include "tractmap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace tractmap {

namespace {

void check_square(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
}

}  // namespace

Eigen::Index medoid(const Eigen::Ref<const Eigen::MatrixXd>& distances) {
  check_square(distances, "medoid");
  const Eigen::VectorXd sums = distances.rowwise().sum();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < sums.size(); ++i)
    if (sums[i] < sums[best]) best = i;
  return best;
}

SupersetFilter superset_filter(const Tractography& full,
                               const std::vector<Eigen::Index>& tract_indices,
                               double alpha) {
  if (full.empty()) throw std::invalid_argument("superset_filter: empty tractography");
  if (tract_indices.empty()) throw std::invalid_argument("superset_filter: empty tract");
  if (!(alpha > 0.0)) throw std::invalid_argument("superset_filter: alpha must be > 0");
  for (Eigen::Index idx : tract_indices)
    if (idx < 0 || idx >= full.size())
      throw std::invalid_argument("superset_filter: tract index out of range");

  const Eigen::Index t = static_cast<Eigen::Index>(tract_indices.size());
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index u = 0; u < t; ++u)
    for (Eigen::Index v = u + 1; v < t; ++v) {
      const double d = mam_distance(full.streamlines[tract_indices[u]],
                                    full.streamlines[tract_indices[v]]);
      within(u, v) = d;
      within(v, u) = d;
    }

  SupersetFilter result;
  result.alpha = alpha;
  const Eigen::Index local_medoid = medoid(within);
  result.medoid_index = tract_indices[local_medoid];
  result.radius = within.row(local_medoid).maxCoeff();

  const Streamline& center = full.streamlines[result.medoid_index];
  const double threshold = alpha * result.radius;
  for (Eigen::Index j = 0; j < full.size(); ++j)
    if (mam_distance(center, full.streamlines[j]) <= threshold)
      result.indices.push_back(j);
  return result;
}

Mapping nn_init(const Eigen::Ref<const Eigen::MatrixXd>& cross) {
  if (cross.rows() < 1 || cross.cols() < 1)
    throw std::invalid_argument("nn_init: empty cross-distance matrix");
  if (!cross.allFinite()) throw std::invalid_argument("nn_init: non-finite cross-distances");
  Mapping q(static_cast<std::size_t>(cross.rows()));
  for (Eigen::Index i = 0; i < cross.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < cross.cols(); ++j)
      if (cross(i, j) < cross(i, best)) best = j;
    q[i] = best;
  }
  return q;
}

Mapping random_init(Eigen::Index n_source, Eigen::Index n_target, std::uint64_t seed) {
  if (n_source < 1 || n_target < 1)
    throw std::invalid_argument("random_init: sizes must be >= 1");
  Xoshiro256 rng(seed);
  Mapping q(static_cast<std::size_t>(n_source));
  for (auto& target : q) target = rng.uniform_index(n_target);
  return q;
}

GreedyStep greedy_remap(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                        Eigen::Index i) {
  if (i < 0 || i >= static_cast<Eigen::Index>(q.size()))
    throw std::invalid_argument("greedy_remap: source index out of range");
  remap_delta(a, b, q, i, q[i]);  // argument validation only; the no-op delta is 0

  GreedyStep step{q[i], 0.0};
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    if (j == q[i]) continue;
    const double delta = detail::remap_delta_unchecked(a, b, q, i, j);
    if (delta < step.delta) step = {j, delta};
  }
  if (step.delta >= 0.0) return {q[i], 0.0};
  return step;
}

AnnealTrace anneal(const Eigen::Ref<const Eigen::MatrixXd>& a,
                   const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q0,
                   const AnnealSchedule& schedule) {
  if (schedule.iterations < 0)
    throw std::invalid_argument("anneal: iterations must be >= 0");
  if (!(schedule.cooling > 0.0 && schedule.cooling < 1.0))
    throw std::invalid_argument("anneal: cooling must be in (0, 1)");
  if (schedule.initial_temperature &&
      !(*schedule.initial_temperature > 0.0 && std::isfinite(*schedule.initial_temperature)))
    throw std::invalid_argument("anneal: initial_temperature must be > 0");

  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  Mapping q = q0;
  double sq = squared_mapping_loss(a, b, q);  // also validates all arguments
  const double denom = static_cast<double>(n);

  double temperature = schedule.initial_temperature ? *schedule.initial_temperature : sq / denom;
  double best_sq = sq;
  Mapping best_q = q;

  const std::set<int> wanted(schedule.snapshot_iterations.begin(),
                             schedule.snapshot_iterations.end());

  AnnealTrace trace;
  trace.initial_loss = std::sqrt(sq);
  trace.initial_temperature = temperature;
  trace.records.reserve(static_cast<std::size_t>(schedule.iterations) + 1);
  trace.records.push_back(
      {0, std::sqrt(sq), std::sqrt(sq) / denom, false, std::sqrt(best_sq)});
  if (wanted.count(0)) trace.snapshots.emplace_back(0, q);

  Xoshiro256 rng(schedule.seed);
  for (int it = 1; it <= schedule.iterations; ++it) {
    const Eigen::Index i = rng.uniform_index(n);
    const Eigen::Index j_old = q[i];

    // One scan serves both the greedy step and the uphill proposal: the
    // best target != q[i] with lowest-index tie-breaking.
    double alt_delta = std::numeric_limits<double>::infinity();
    Eigen::Index alt_j = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == j_old) continue;
      const double delta = detail::remap_delta_unchecked(a, b, q, i, j);
      if (delta < alt_delta) {
        alt_delta = delta;
        alt_j = j;
      }
    }

    bool accepted = false;
    if (alt_j >= 0 && alt_delta < 0.0) {
      q[i] = alt_j;
      sq += alt_delta;
      accepted = true;
    } else if (alt_j >= 0 && !schedule.greedy_only) {
      // No strict improvement exists; propose the least-bad alternative and
      // apply the Metropolis rule on the squared-loss increase.
      const double u = rng.uniform();
      const double p = temperature > 0.0 ? std::exp(-alt_delta / temperature)
                                         : (alt_delta <= 0.0 ? 1.0 : 0.0);
      if (u < p) {
        q[i] = alt_j;
        sq += alt_delta;
        accepted = true;
      }
    }
    sq = std::max(sq, 0.0);

    if (sq < best_sq) {
      best_sq = sq;
      best_q = q;
    }
    temperature *= schedule.cooling;
    trace.records.push_back(
        {it, std::sqrt(sq), std::sqrt(sq) / denom, accepted, std::sqrt(best_sq)});
    if (wanted.count(it)) trace.snapshots.emplace_back(it, q);
  }

  trace.final_mapping = std::move(best_q);
  trace.final_loss = mapping_loss(a, b, trace.final_mapping);
  trace.final_normalized_loss = normalized_loss(trace.final_loss, n);
  return trace;
}

BruteForceResult brute_force_mapping(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                     const Eigen::Ref<const Eigen::MatrixXd>& b,
                                     std::uint64_t budget) {
  check_square(a, "brute_force_mapping");
  check_square(b, "brute_force_mapping");
  const Eigen::Index n = a.rows();
  const std::uint64_t m = static_cast<std::uint64_t>(b.rows());
  std::uint64_t count = 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (count > budget / m)
      throw std::invalid_argument("brute_force_mapping: M^N exceeds the candidate budget");
    count *= m;
  }

  Mapping q(static_cast<std::size_t>(n), 0);
  Mapping best_q = q;
  double best_sq = std::numeric_limits<double>::infinity();
  for (;;) {
    const double sq = squared_mapping_loss(a, b, q);
    if (sq < best_sq) {
      best_sq = sq;
      best_q = q;
    }
    // Odometer increment; rightmost digit fastest keeps lexicographic order,
    // so with strict < above, ties resolve to the smallest assignment.
    Eigen::Index pos = n - 1;
    while (pos >= 0) {
      if (static_cast<std::uint64_t>(++q[pos]) < m) break;
      q[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return {std::move(best_q), std::sqrt(best_sq)};
}

BruteForceResult brute_force_matching(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                      const Eigen::Ref<const Eigen::MatrixXd>& b) {
  check_square(a, "brute_force_matching");
  check_square(b, "brute_force_matching");
  if (a.rows() != b.rows())
    throw std::invalid_argument("brute_force_matching: sizes must be equal");
  if (a.rows() > 8)
    throw std::invalid_argument("brute_force_matching: at most 8 streamlines per side");

  Mapping perm(static_cast<std::size_t>(a.rows()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
  Mapping best_perm = perm;
  double best_sq = std::numeric_limits<double>::infinity();
  do {
    const double sq = squared_mapping_loss(a, b, perm);
    if (sq < best_sq) {
      best_sq = sq;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {std::move(best_perm), std::sqrt(best_sq)};
}

}  // namespace tractmap
