#include "tractmap/synth.hpp"

#include "tractmap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace tractmap {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;  // radians

// Cross-sectional layout of a bundle, all relative to jitter_sigma. Each
// streamline keeps a persistent lateral offset so a bundle is a tube of
// distinct parallel fibers rather than noise around a zero-width curve,
// and within-bundle distances carry correspondence information. Offsets
// are Gaussian at kStreamlineSpread per axis, norm-capped (bounded
// redraws) at kLateralMaxNorm, and chosen best-candidate style: of
// kLateralCandidates capped draws, keep the one farthest from the offsets
// already placed. The cap keeps pairwise MAM well inside the frozen
// 10 * sigma regression bound, the maximin selection keeps fibers
// individually identifiable above vertex noise.
constexpr double kStreamlineSpread = 2.2;
constexpr double kLateralMaxNorm = 4.3;
constexpr int kLateralCandidates = 96;

// Vertex count of subject B's streamlines. The target tractography is
// sampled denser than the source, as two acquisitions rarely share a
// step size; voxel footprints then reflect how much of the source a
// mapped image covers rather than how few streamlines it uses.
constexpr Eigen::Index kTargetPoints = 48;

void check_spec(const BundleSpec& spec) {
  if (spec.centerline.cols() < 1)
    throw std::invalid_argument("generate_bundle: empty centerline");
  if (!spec.centerline.allFinite())
    throw std::invalid_argument("generate_bundle: non-finite centerline");
  if (spec.n_streamlines < 1)
    throw std::invalid_argument("generate_bundle: n_streamlines must be >= 1");
  if (!(spec.jitter_sigma >= 0.0))
    throw std::invalid_argument("generate_bundle: jitter_sigma must be >= 0");
  if (!spec.offset.allFinite())
    throw std::invalid_argument("generate_bundle: non-finite offset");
}

Streamline jittered(const Streamline& base, double sigma, Xoshiro256& rng) {
  Streamline s = base;
  for (Eigen::Index p = 0; p < s.cols(); ++p)
    for (int axis = 0; axis < 3; ++axis) s(axis, p) += sigma * rng.gaussian();
  return s;
}

std::vector<Point3> draw_laterals(Eigen::Index n, double sigma, Xoshiro256& rng) {
  std::vector<Point3> laterals;
  laterals.reserve(static_cast<std::size_t>(n));
  const auto capped_draw = [&] {
    Point3 p;
    for (int attempt = 0; attempt < 16; ++attempt) {
      for (int axis = 0; axis < 3; ++axis) p[axis] = kStreamlineSpread * sigma * rng.gaussian();
      if (p.norm() <= kLateralMaxNorm * sigma) return p;
    }
    return Point3(p * (kLateralMaxNorm * sigma / p.norm()));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    Point3 lateral = Point3::Zero();
    if (sigma > 0.0) {
      double best_gap = -1.0;
      for (int c = 0; c < kLateralCandidates; ++c) {
        const Point3 candidate = capped_draw();
        double gap = std::numeric_limits<double>::infinity();
        for (const Point3& prev : laterals) gap = std::min(gap, (candidate - prev).norm());
        if (gap > best_gap) {
          best_gap = gap;
          lateral = candidate;
        }
      }
    }
    laterals.push_back(lateral);
  }
  return laterals;
}

// Smooth per-streamline curves (centerline + lateral offset + bundle
// placement) before any vertex noise is applied.
std::vector<Streamline> smooth_curves(const BundleSpec& spec, Xoshiro256& rng) {
  const std::vector<Point3> laterals = draw_laterals(spec.n_streamlines, spec.jitter_sigma, rng);
  std::vector<Streamline> curves;
  curves.reserve(static_cast<std::size_t>(spec.n_streamlines));
  for (Eigen::Index i = 0; i < spec.n_streamlines; ++i) {
    Streamline s = spec.centerline;
    s.colwise() += spec.offset + laterals[static_cast<std::size_t>(i)];
    curves.push_back(std::move(s));
  }
  return curves;
}

}  // namespace

Streamline default_centerline(double radius_mm, Eigen::Index n_points) {
  if (!(radius_mm > 0.0)) throw std::invalid_argument("default_centerline: radius must be > 0");
  if (n_points < 2) throw std::invalid_argument("default_centerline: need at least 2 points");
  Streamline s(3, n_points);
  const double start = -std::numbers::pi / 4.0;
  const double span = std::numbers::pi / 2.0;
  for (Eigen::Index p = 0; p < n_points; ++p) {
    const double theta = start + span * static_cast<double>(p) / static_cast<double>(n_points - 1);
    s(0, p) = radius_mm * std::cos(theta);
    s(1, p) = radius_mm * std::sin(theta);
    s(2, p) = 0.0;
  }
  return s;
}

Tractography generate_bundle(const BundleSpec& spec) {
  check_spec(spec);
  Xoshiro256 rng(spec.seed);
  // Per-vertex perturbation = streamline-level lateral component plus
  // vertex-level noise; the sum is Gaussian and vanishes with sigma = 0.
  const std::vector<Streamline> curves = smooth_curves(spec, rng);
  Tractography t;
  t.streamlines.reserve(curves.size());
  for (const Streamline& c : curves) t.streamlines.push_back(jittered(c, spec.jitter_sigma, rng));
  return t;
}

SubjectPair generate_subject_pair(const BundleSpec& spec, Eigen::Index distractors,
                                  const Point3& displacement) {
  check_spec(spec);
  if (distractors < 0)
    throw std::invalid_argument("generate_subject_pair: distractors must be >= 0");
  if (!displacement.allFinite())
    throw std::invalid_argument("generate_subject_pair: non-finite displacement");

  SubjectPair pair;

  BundleSpec spec_a = spec;
  spec_a.seed = derive_seed(spec.seed, "bundle-a");
  Xoshiro256 a_rng(spec_a.seed);
  const std::vector<Streamline> curves = smooth_curves(spec_a, a_rng);
  pair.source_tract.streamlines.reserve(curves.size());
  for (const Streamline& c : curves)
    pair.source_tract.streamlines.push_back(jittered(c, spec.jitter_sigma, a_rng));
  pair.source_tract.name = "tract_a";

  // Twins: the same smooth curves observed again at subject B's vertex
  // density with fresh vertex noise, then displaced; B's internal distance
  // structure mirrors A's up to the independent noise of the two
  // observations.
  std::vector<Streamline> raw;
  raw.reserve(static_cast<std::size_t>(spec.n_streamlines + distractors));
  Xoshiro256 twin_rng(derive_seed(spec.seed, "twin"));
  for (const Streamline& c : curves) {
    Streamline twin = jittered(resample(c, kTargetPoints), spec.jitter_sigma, twin_rng);
    twin.colwise() += displacement;
    raw.push_back(std::move(twin));
  }

  // Distractors come in bundles of the same size, rotated/scaled variants of
  // the centerline placed at growing radii >= 60 mm from the source bundle,
  // far outside any superset threshold at alpha = 3.
  const Point3 center = spec.centerline.rowwise().mean() + spec.offset;
  SplitMix64 bundle_seeds(derive_seed(spec.seed, "distractors"));
  Eigen::Index remaining = distractors;
  for (Eigen::Index g = 0; remaining > 0; ++g) {
    const double phi = kGoldenAngle * static_cast<double>(g);
    const double scale = 0.75 + 0.15 * static_cast<double>(g % 5);
    Eigen::Matrix3d rot =
        Eigen::AngleAxisd(phi, Point3::UnitZ()).toRotationMatrix() *
        Eigen::AngleAxisd(0.6 * static_cast<double>(g % 7), Point3::UnitX()).toRotationMatrix();
    Point3 direction(std::cos(phi), std::sin(phi), 0.4 * static_cast<double>((g % 3) - 1));
    direction.normalize();

    BundleSpec dspec = spec;
    dspec.centerline = resample(scale * (rot * spec.centerline), kTargetPoints);
    dspec.n_streamlines = std::min(remaining, spec.n_streamlines);
    dspec.seed = bundle_seeds.next();
    dspec.offset = center + direction * (60.0 + 15.0 * static_cast<double>(g));
    Tractography bundle = generate_bundle(dspec);
    for (auto& s : bundle.streamlines) raw.push_back(std::move(s));
    remaining -= dspec.n_streamlines;
  }

  // Fisher-Yates over target positions; ground truth follows the twins.
  const Eigen::Index total = static_cast<Eigen::Index>(raw.size());
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(total));
  for (Eigen::Index k = 0; k < total; ++k) perm[k] = k;
  Xoshiro256 shuffle_rng(derive_seed(spec.seed, "shuffle"));
  for (Eigen::Index k = total - 1; k > 0; --k)
    std::swap(perm[k], perm[shuffle_rng.uniform_index(k + 1)]);

  std::vector<Eigen::Index> position(static_cast<std::size_t>(total));
  pair.target_full.streamlines.resize(static_cast<std::size_t>(total));
  for (Eigen::Index k = 0; k < total; ++k) {
    position[perm[k]] = k;
    pair.target_full.streamlines[k] = std::move(raw[perm[k]]);
  }
  pair.target_full.name = "full_b";

  pair.ground_truth.resize(pair.source_tract.streamlines.size());
  for (Eigen::Index i = 0; i < spec.n_streamlines; ++i) pair.ground_truth[i] = position[i];
  return pair;
}

}  // namespace tractmap
