#pragma once

#include "tractmap/geometry.hpp"
#include "tractmap/graph.hpp"

#include <cstdint>

namespace tractmap {

/// Template curve for synthetic bundles: a quarter-circle arc in the xy
/// plane, centered on the origin of the arc's circle, loosely evoking CST
/// curvature.
Streamline default_centerline(double radius_mm = 40.0, Eigen::Index n_points = 20);

/// Parameters of one synthetic bundle: jittered copies of a centerline.
struct BundleSpec {
  Streamline centerline = default_centerline();
  Eigen::Index n_streamlines = 60;
  double jitter_sigma = 1.0;  ///< mm, isotropic Gaussian per vertex
  std::uint64_t seed = 0;
  Point3 offset = Point3::Zero();
};

/// n_streamlines copies of the centerline, every vertex perturbed by seeded
/// isotropic Gaussian noise, then translated by offset. Deterministic for a
/// fixed seed.
Tractography generate_bundle(const BundleSpec& spec);

/// A synthetic two-subject instance with known correspondence.
struct SubjectPair {
  Tractography source_tract;  ///< subject A: the tract to map
  Tractography target_full;   ///< subject B: homologous twins plus distractors
  Mapping ground_truth;       ///< ground_truth[i]: target index of source i's twin
};

/// Builds subject A as one bundle and subject B as a homologous bundle
/// (each source streamline re-jittered and displaced to simulate
/// inter-subject anatomy) plus `distractors` streamlines from unrelated
/// bundles placed well outside the homolog's superset radius. Target order
/// is shuffled so ground truth is not an identity block.
SubjectPair generate_subject_pair(const BundleSpec& spec, Eigen::Index distractors,
                                  const Point3& displacement);

}  // namespace tractmap
