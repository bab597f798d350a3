#pragma once

#include "tractmap/geometry.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tractmap {

/// Symmetric pairwise streamline-distance matrix with zero diagonal: the
/// adjacency matrix of a tractography viewed as a weighted graph.
using DistanceMatrix = Eigen::MatrixXd;

/// Total assignment of each source streamline index to a target streamline
/// index. The equivalent binary matrix has its single 1 in row i at column
/// assignment[i]; many-to-one is allowed, so this is in general not a
/// permutation.
using Mapping = std::vector<Eigen::Index>;

/// True when m is square, symmetric, zero on the diagonal, finite and
/// nonnegative, to within tol.
bool is_valid_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol = 0.0);

/// Pairwise MAM adjacency matrix of a tractography. Entries may be computed
/// by a worker pool; entries depend only on their own (i, j) pair, so the
/// result is bit-identical for any thread count.
DistanceMatrix distance_matrix(const Tractography& t, int threads = 1);

/// Rectangular MAM distances between two tractographies (rows: a, cols: b).
DistanceMatrix cross_distance_matrix(const Tractography& a, const Tractography& b,
                                     int threads = 1);

/// Frobenius-norm discrepancy between the graphs after mapping:
/// sqrt(sum_ij (a(i,j) - b(q(i), q(j)))^2).
double mapping_loss(const Eigen::Ref<const Eigen::MatrixXd>& a,
                    const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q);

/// Squared mapping loss. All optimizer comparisons run on the square; the
/// root is monotone and applied only for reporting.
double squared_mapping_loss(const Eigen::Ref<const Eigen::MatrixXd>& a,
                            const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q);

/// Loss divided by the source streamline count.
double normalized_loss(double loss, Eigen::Index n_source);

/// Change in *squared* mapping loss if q(i) were reassigned to j_new,
/// computed in O(n) from row/column i of a - QBQ^T alone. Off-diagonal
/// terms count twice by symmetry, the diagonal term once. Requires a and b
/// symmetric (DistanceMatrix invariant).
double remap_delta(const Eigen::Ref<const Eigen::MatrixXd>& a,
                   const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                   Eigen::Index i, Eigen::Index j_new);

namespace detail {

/// Core of remap_delta without argument validation; callers guarantee square
/// matrices and in-range indices. Shared with the optimizer's scan loops so
/// both paths produce bit-identical deltas.
double remap_delta_unchecked(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b, const Mapping& q,
                             Eigen::Index i, Eigen::Index j_new);

}  // namespace detail

}  // namespace tractmap
