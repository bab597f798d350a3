#include "tractmap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace tractmap {

namespace {

void check_pair(const Eigen::Ref<const Eigen::MatrixXd>& a,
                const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q) {
  if (a.rows() != a.cols()) throw std::invalid_argument("mapping loss: a is not square");
  if (b.rows() != b.cols()) throw std::invalid_argument("mapping loss: b is not square");
  if (static_cast<Eigen::Index>(q.size()) != a.rows())
    throw std::invalid_argument("mapping loss: mapping length does not match a");
  for (Eigen::Index target : q)
    if (target < 0 || target >= b.rows())
      throw std::invalid_argument("mapping loss: target index out of range");
}

// Runs body(i) for i in [0, n) on `threads` workers, strided for balance.
template <typename Body>
void parallel_rows(Eigen::Index n, int threads, const Body& body) {
  threads = std::clamp<int>(threads, 1, static_cast<int>(std::max<Eigen::Index>(n, 1)));
  if (threads == 1) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (Eigen::Index i = t; i < n; i += threads) body(i);
    });
  for (auto& worker : pool) worker.join();
}

}  // namespace

bool is_valid_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  if ((m.array() < -tol).any()) return false;
  if (m.diagonal().cwiseAbs().maxCoeff() > tol) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

DistanceMatrix distance_matrix(const Tractography& t, int threads) {
  if (t.empty()) throw std::invalid_argument("distance_matrix: empty tractography");
  const Eigen::Index n = t.size();
  DistanceMatrix d = DistanceMatrix::Zero(n, n);
  parallel_rows(n, threads, [&](Eigen::Index i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = mam_distance(t.streamlines[i], t.streamlines[j]);
      d(i, j) = value;
      d(j, i) = value;
    }
  });
  return d;
}

DistanceMatrix cross_distance_matrix(const Tractography& a, const Tractography& b,
                                     int threads) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("cross_distance_matrix: empty tractography");
  DistanceMatrix d(a.size(), b.size());
  parallel_rows(a.size(), threads, [&](Eigen::Index i) {
    for (Eigen::Index j = 0; j < b.size(); ++j)
      d(i, j) = mam_distance(a.streamlines[i], b.streamlines[j]);
  });
  return d;
}

double squared_mapping_loss(const Eigen::Ref<const Eigen::MatrixXd>& a,
                            const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q) {
  check_pair(a, b, q);
  const Eigen::Index n = a.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = a(i, j) - b(q[i], q[j]);
      total += diff * diff;
    }
  return total;
}

double mapping_loss(const Eigen::Ref<const Eigen::MatrixXd>& a,
                    const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q) {
  return std::sqrt(squared_mapping_loss(a, b, q));
}

double normalized_loss(double loss, Eigen::Index n_source) {
  if (n_source < 1) throw std::invalid_argument("normalized_loss: n_source must be >= 1");
  return loss / static_cast<double>(n_source);
}

double remap_delta(const Eigen::Ref<const Eigen::MatrixXd>& a,
                   const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                   Eigen::Index i, Eigen::Index j_new) {
  check_pair(a, b, q);
  if (i < 0 || i >= a.rows()) throw std::invalid_argument("remap_delta: source index out of range");
  if (j_new < 0 || j_new >= b.rows())
    throw std::invalid_argument("remap_delta: target index out of range");
  return detail::remap_delta_unchecked(a, b, q, i, j_new);
}

namespace detail {

double remap_delta_unchecked(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                             Eigen::Index i, Eigen::Index j_new) {
  const Eigen::Index j_old = q[i];
  if (j_new == j_old) return 0.0;
  const Eigen::Index n = a.rows();
  double delta = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (l == i) continue;
    const double edge = a(i, l);
    const double before = edge - b(j_old, q[l]);
    const double after = edge - b(j_new, q[l]);
    delta += 2.0 * (after * after - before * before);
  }
  // Diagonal term, counted once; zero whenever both diagonals are zero.
  const double before = a(i, i) - b(j_old, j_old);
  const double after = a(i, i) - b(j_new, j_new);
  delta += after * after - before * before;
  return delta;
}

}  // namespace detail

}  // namespace tractmap
