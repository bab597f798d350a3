#pragma once

#include "tractmap/geometry.hpp"
#include "tractmap/graph.hpp"
#include "tractmap/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <sys/wait.h>

namespace testsupport {

namespace fs = std::filesystem;

/// Unique scratch directory, removed on scope exit.
class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tractmap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
  fs::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string output;  ///< stdout and stderr, interleaved
};

/// Runs the tractmap binary with the given argument string.
inline CliResult run_cli(const std::string& args) {
  const std::string command = std::string(TRACTMAP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  CliResult result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0)
    result.output.append(buffer, got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

/// Random streamline with n_points vertices inside a box of the given
/// half-extent (uniform coordinates).
inline tractmap::Streamline random_streamline(tractmap::Xoshiro256& rng, Eigen::Index n_points,
                                              double half_extent = 50.0) {
  tractmap::Streamline s(3, n_points);
  for (Eigen::Index p = 0; p < n_points; ++p)
    for (int axis = 0; axis < 3; ++axis)
      s(axis, p) = (2.0 * rng.uniform() - 1.0) * half_extent;
  return s;
}

inline tractmap::Tractography random_tractography(tractmap::Xoshiro256& rng,
                                                  Eigen::Index n_streamlines,
                                                  Eigen::Index n_points,
                                                  double half_extent = 50.0) {
  tractmap::Tractography t;
  t.streamlines.reserve(static_cast<std::size_t>(n_streamlines));
  for (Eigen::Index i = 0; i < n_streamlines; ++i)
    t.streamlines.push_back(random_streamline(rng, n_points, half_extent));
  return t;
}

/// Random symmetric zero-diagonal nonnegative matrix, entries in [0, 10).
inline Eigen::MatrixXd random_distance_matrix(tractmap::Xoshiro256& rng, Eigen::Index n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = 10.0 * rng.uniform();
      m(i, j) = d;
      m(j, i) = d;
    }
  return m;
}

/// Random mapping with every target in [0, m).
inline tractmap::Mapping random_mapping(tractmap::Xoshiro256& rng, Eigen::Index n,
                                        Eigen::Index m) {
  tractmap::Mapping q(static_cast<std::size_t>(n));
  for (auto& target : q) target = rng.uniform_index(m);
  return q;
}

/// Uniform random rotation (QR of a Gaussian matrix, determinant fixed).
inline Eigen::Matrix3d random_rotation(tractmap::Xoshiro256& rng) {
  Eigen::Matrix3d g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
  Eigen::Matrix3d rot = qr.householderQ();
  if (rot.determinant() < 0.0) rot.col(0) = -rot.col(0);
  return rot;
}

}  // namespace testsupport
