#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tractmap {

using Point3 = Eigen::Vector3d;

/// One fiber trajectory: a 3xN block of vertices, one point per column,
/// coordinates in millimetres.
using Streamline = Eigen::Matrix3Xd;

/// Integer voxel coordinate, floor-quantized per axis.
using VoxelIndex = std::array<std::int64_t, 3>;

/// Indexed collection of streamlines. Indices are 0-based, dense and stable.
struct Tractography {
  std::vector<Streamline> streamlines;
  std::optional<Point3> voxel_size;  ///< mm per voxel, when known from file metadata
  std::string name;

  Eigen::Index size() const { return static_cast<Eigen::Index>(streamlines.size()); }
  bool empty() const { return streamlines.empty(); }
};

/// Voxels occupied by a tractography and the grid spacing used to quantize.
struct VoxelSet {
  std::set<VoxelIndex> voxels;
  Point3 voxel_size = Point3::Ones();

  std::int64_t size() const { return static_cast<std::int64_t>(voxels.size()); }
};

/// Distance from a point to the nearest vertex of a streamline.
double point_to_streamline_distance(const Point3& x, const Streamline& s);

/// Mean Average Minimum distance: the symmetrized mean of nearest-vertex
/// distances between two streamlines. Symmetric and zero on identical
/// inputs, but not a metric (no triangle inequality). Vertex-to-vertex
/// only; resample densely to control discretization error.
double mam_distance(const Streamline& a, const Streamline& b);

/// Union over all streamlines of the voxels their vertices fall in, using
/// floor(coordinate / voxel_size) per axis. Segments between vertices are
/// not rasterized.
VoxelSet voxelize(const Tractography& t, const Point3& voxel_size);

/// Arc-length uniform resampling to k >= 2 points, endpoints preserved.
/// A single-vertex streamline resamples to k copies of that vertex.
Streamline resample(const Streamline& s, Eigen::Index k);

/// resample() applied to every streamline; metadata is carried over.
Tractography resample(const Tractography& t, Eigen::Index k);

}  // namespace tractmap
