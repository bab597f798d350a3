#include "tractmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tractmap {

namespace {

// D(from, to) = mean over vertices of `from` of the nearest-vertex distance.
double mean_min_distance(const Streamline& from, const Streamline& to) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < from.cols(); ++i)
    total += std::sqrt((to.colwise() - from.col(i)).colwise().squaredNorm().minCoeff());
  return total / static_cast<double>(from.cols());
}

}  // namespace

double point_to_streamline_distance(const Point3& x, const Streamline& s) {
  if (s.cols() == 0)
    throw std::invalid_argument("point_to_streamline_distance: empty streamline");
  return std::sqrt((s.colwise() - x).colwise().squaredNorm().minCoeff());
}

double mam_distance(const Streamline& a, const Streamline& b) {
  if (a.cols() == 0 || b.cols() == 0)
    throw std::invalid_argument("mam_distance: empty streamline");
  return 0.5 * (mean_min_distance(a, b) + mean_min_distance(b, a));
}

VoxelSet voxelize(const Tractography& t, const Point3& voxel_size) {
  if (!(voxel_size.array() > 0.0).all())
    throw std::invalid_argument("voxelize: voxel_size components must be > 0");
  VoxelSet out;
  out.voxel_size = voxel_size;
  for (const Streamline& s : t.streamlines)
    for (Eigen::Index i = 0; i < s.cols(); ++i)
      out.voxels.insert({static_cast<std::int64_t>(std::floor(s(0, i) / voxel_size.x())),
                         static_cast<std::int64_t>(std::floor(s(1, i) / voxel_size.y())),
                         static_cast<std::int64_t>(std::floor(s(2, i) / voxel_size.z()))});
  return out;
}

Streamline resample(const Streamline& s, Eigen::Index k) {
  if (s.cols() == 0) throw std::invalid_argument("resample: empty streamline");
  if (k < 2) throw std::invalid_argument("resample: need k >= 2 output points");
  const Eigen::Index n = s.cols();
  Streamline out(3, k);
  if (n == 1) {
    out.colwise() = s.col(0);
    return out;
  }
  Eigen::VectorXd arc(n);
  arc[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    arc[i] = arc[i - 1] + (s.col(i) - s.col(i - 1)).norm();
  const double total = arc[n - 1];
  if (total <= 0.0) {
    out.colwise() = s.col(0);
    return out;
  }
  Eigen::Index seg = 0;
  for (Eigen::Index m = 0; m < k; ++m) {
    const double target = total * static_cast<double>(m) / static_cast<double>(k - 1);
    while (seg + 2 < n && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double w = span > 0.0 ? std::clamp((target - arc[seg]) / span, 0.0, 1.0) : 0.0;
    out.col(m) = s.col(seg) + w * (s.col(seg + 1) - s.col(seg));
  }
  return out;
}

Tractography resample(const Tractography& t, Eigen::Index k) {
  Tractography out;
  out.voxel_size = t.voxel_size;
  out.name = t.name;
  out.streamlines.reserve(t.streamlines.size());
  for (const Streamline& s : t.streamlines) out.streamlines.push_back(resample(s, k));
  return out;
}

}  // namespace tractmap
