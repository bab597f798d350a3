#pragma once

#include "tractmap/geometry.hpp"
#include "tractmap/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tractmap {

/// Malformed-input error. For binary formats byte_offset localizes the
/// failure; for text formats the message carries a JSON-pointer-style path.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& message)
      : std::runtime_error(message), byte_offset_(0) {}
  ParseError(const std::string& message, std::size_t byte_offset)
      : std::runtime_error(message + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

/// TrackVis .trk header, 1000 bytes on disk. Fields between vox_to_ras and
/// n_count (voxel order, orientation, inversion flags, padding) are carried
/// as one opaque blob; this tool never interprets them.
struct TrkHeader {
  std::array<char, 6> id_string{{'T', 'R', 'A', 'C', 'K', '\0'}};
  std::array<std::int16_t, 3> dim{{0, 0, 0}};
  std::array<float, 3> voxel_size{{1.0f, 1.0f, 1.0f}};
  std::array<float, 3> origin{{0.0f, 0.0f, 0.0f}};
  std::int16_t n_scalars = 0;
  std::array<char, 200> scalar_names{};
  std::int16_t n_properties = 0;
  std::array<char, 200> property_names{};
  std::array<float, 16> vox_to_ras{};  ///< row-major; all zeros = not recorded
  std::array<unsigned char, 484> reserved{};
  std::int32_t n_count = 0;
  std::int32_t version = 2;
  std::int32_t hdr_size = 1000;
};

/// Parses a .trk byte stream. Both endiannesses are accepted (detected via
/// the hdr_size field); per-point scalars and per-track properties are
/// parsed for bounds correctness and dropped. Throws ParseError with a byte
/// offset on malformed input.
Tractography read_trk(std::span<const std::byte> bytes);

/// As above, additionally returning the decoded header.
Tractography read_trk(std::span<const std::byte> bytes, TrkHeader& header);

/// Serializes to a little-endian .trk with n_scalars = n_properties = 0,
/// n_count = streamline count, version 2. voxel_size is taken from the
/// tractography when present. Coordinates are narrowed to float32.
std::vector<std::byte> write_trk(const Tractography& t);

/// Parses the JSON interchange form:
///   { "name": str?, "voxel_size": [x,y,z]?, "streamlines": [[[x,y,z],...],...] }
/// Throws ParseError whose message names the offending path.
Tractography read_tractography_json(std::string_view text);

/// Serializes the JSON interchange form; numbers carry 17 significant
/// digits so float64 coordinates round-trip exactly.
std::string write_tractography_json(const Tractography& t);

/// FLIRT-style homogeneous transform; last row (0, 0, 0, 1).
using AffineTransform = Eigen::Matrix4d;

/// Parses 16 whitespace-separated numbers, row-major.
AffineTransform read_affine_text(std::string_view text);

/// Maps every point through m in homogeneous coordinates. Throws when the
/// last row deviates from (0,0,0,1) or the upper 3x3 block is singular.
Tractography apply_affine(const Tractography& t, const AffineTransform& m);

/// Serializes a mapping as { "mapping": [...] } with optional scalar fields
/// appended in the given order (17 significant digits each).
std::string write_mapping_json(
    const Mapping& q,
    const std::vector<std::pair<std::string, double>>& extras = {});

/// Reads the "mapping" array written by write_mapping_json.
Mapping read_mapping_json(std::string_view text);

/// Reads a tract index set: { "indices": [...] }, or, as a convenience, a
/// mapping file whose unique sorted targets form the set.
std::vector<Eigen::Index> read_index_set_json(std::string_view text);

/// Whole-file helpers. Readers throw ParseError when the file cannot be
/// opened; the writer stages to "<path>.tmp" and renames, so an interrupted
/// run never leaves a partial file at the final path.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
void atomic_write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
void atomic_write_file(const std::filesystem::path& path, std::string_view text);

/// Format dispatch by extension: ".trk" binary, ".json" interchange JSON.
Tractography read_tractography_file(const std::filesystem::path& path);
void write_tractography_file(const std::filesystem::path& path, const Tractography& t);

}  // namespace tractmap
