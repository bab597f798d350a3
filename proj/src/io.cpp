#include "tractmap/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace tractmap {

namespace {

using nlohmann::json;

std::uint16_t bswap16(std::uint16_t v) {
  return static_cast<std::uint16_t>((v << 8) | (v >> 8));
}

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

/// Bounds-checked little-endian decoder; `swap` flips multi-byte fields for
/// big-endian files.
class ByteReader {
public:
  ByteReader(std::span<const std::byte> data, bool swap) : data_(data), swap_(swap) {}

  std::size_t pos() const { return pos_; }

  void require(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n)
      throw ParseError(std::string("truncated ") + what, pos_);
  }

  void raw(void* out, std::size_t n, const char* what) {
    require(n, what);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }

  std::uint16_t u16(const char* what) {
    require(2, what);
    const auto* p = data_.data() + pos_;
    pos_ += 2;
    auto v = static_cast<std::uint16_t>(std::to_integer<std::uint16_t>(p[0]) |
                                        (std::to_integer<std::uint16_t>(p[1]) << 8));
    return swap_ ? bswap16(v) : v;
  }

  std::uint32_t u32(const char* what) {
    require(4, what);
    const auto* p = data_.data() + pos_;
    pos_ += 4;
    const std::uint32_t v = std::to_integer<std::uint32_t>(p[0]) |
                            (std::to_integer<std::uint32_t>(p[1]) << 8) |
                            (std::to_integer<std::uint32_t>(p[2]) << 16) |
                            (std::to_integer<std::uint32_t>(p[3]) << 24);
    return swap_ ? bswap32(v) : v;
  }

  std::int16_t i16(const char* what) { return static_cast<std::int16_t>(u16(what)); }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

private:
  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
  bool swap_;
};

/// Little-endian encoder.
struct ByteWriter {
  std::vector<std::byte> out;

  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::byte*>(data);
    out.insert(out.end(), p, p + n);
  }
  void u16(std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xff));
    out.push_back(static_cast<std::byte>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8)
      out.push_back(static_cast<std::byte>((v >> shift) & 0xff));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
};

constexpr std::size_t kTrkHeaderSize = 1000;
constexpr std::size_t kHdrSizeOffset = 996;

TrkHeader parse_trk_header(ByteReader& reader) {
  TrkHeader h;
  reader.raw(h.id_string.data(), h.id_string.size(), "header");
  if (std::memcmp(h.id_string.data(), "TRACK\0", 6) != 0)
    throw ParseError("bad magic: expected \"TRACK\"", 0);
  for (auto& d : h.dim) d = reader.i16("header");
  for (auto& v : h.voxel_size) v = reader.f32("header");
  for (auto& o : h.origin) o = reader.f32("header");
  h.n_scalars = reader.i16("header");
  if (h.n_scalars < 0) throw ParseError("negative n_scalars", 36);
  reader.raw(h.scalar_names.data(), h.scalar_names.size(), "header");
  h.n_properties = reader.i16("header");
  if (h.n_properties < 0) throw ParseError("negative n_properties", 238);
  reader.raw(h.property_names.data(), h.property_names.size(), "header");
  for (auto& m : h.vox_to_ras) m = reader.f32("header");
  reader.raw(h.reserved.data(), h.reserved.size(), "header");
  h.n_count = reader.i32("header");
  if (h.n_count < 0) throw ParseError("negative n_count", 988);
  h.version = reader.i32("header");
  h.hdr_size = reader.i32("header");
  return h;
}

void append_number(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

double number_at(const json& node, const std::string& path) {
  if (!node.is_number()) throw ParseError(path + ": expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ParseError(path + ": non-finite number");
  return v;
}

std::vector<Eigen::Index> index_array_at(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty())
    throw ParseError(path + ": expected a non-empty array");
  std::vector<Eigen::Index> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    const json& entry = node[i];
    const std::string where = path + "/" + std::to_string(i);
    if (!entry.is_number_integer() || entry.get<std::int64_t>() < 0)
      throw ParseError(where + ": expected a non-negative integer");
    out.push_back(static_cast<Eigen::Index>(entry.get<std::int64_t>()));
  }
  return out;
}

}  // namespace

Tractography read_trk(std::span<const std::byte> bytes) {
  TrkHeader ignored;
  return read_trk(bytes, ignored);
}

Tractography read_trk(std::span<const std::byte> bytes, TrkHeader& header) {
  if (bytes.size() < kTrkHeaderSize)
    throw ParseError("truncated header: need 1000 bytes", bytes.size());

  const std::uint32_t hdr_size_le =
      ByteReader(bytes.subspan(kHdrSizeOffset, 4), false).u32("header");
  bool swap = false;
  if (hdr_size_le == kTrkHeaderSize) {
    swap = false;
  } else if (bswap32(hdr_size_le) == kTrkHeaderSize) {
    swap = true;
  } else {
    throw ParseError("bad hdr_size: not 1000 in either byte order", kHdrSizeOffset);
  }

  ByteReader reader(bytes, swap);
  header = parse_trk_header(reader);

  Tractography t;
  if (header.n_count > 0) t.streamlines.reserve(static_cast<std::size_t>(header.n_count));
  const auto read_track = [&] {
    const std::size_t track_start = reader.pos();
    const std::int32_t k = reader.i32("track point count");
    if (k < 0) throw ParseError("negative track point count", track_start);
    if (k == 0) throw ParseError("track with zero points", track_start);
    Streamline s(3, k);
    for (std::int32_t p = 0; p < k; ++p) {
      s(0, p) = reader.f32("track body");
      s(1, p) = reader.f32("track body");
      s(2, p) = reader.f32("track body");
      for (std::int16_t sc = 0; sc < header.n_scalars; ++sc) reader.f32("track scalars");
    }
    for (std::int16_t pr = 0; pr < header.n_properties; ++pr) reader.f32("track properties");
    t.streamlines.push_back(std::move(s));
  };

  if (header.n_count > 0) {
    for (std::int32_t i = 0; i < header.n_count; ++i) read_track();
    if (reader.pos() != bytes.size())
      throw ParseError("trailing data after the tracks announced by n_count", reader.pos());
  } else {
    while (reader.pos() < bytes.size()) read_track();
  }
  if (t.empty()) throw ParseError("file contains no tracks", reader.pos());

  if (header.voxel_size[0] > 0 && header.voxel_size[1] > 0 && header.voxel_size[2] > 0)
    t.voxel_size = Point3(header.voxel_size[0], header.voxel_size[1], header.voxel_size[2]);
  return t;
}

std::vector<std::byte> write_trk(const Tractography& t) {
  if (t.empty()) throw std::invalid_argument("write_trk: empty tractography");
  if (t.size() > std::numeric_limits<std::int32_t>::max())
    throw std::invalid_argument("write_trk: too many streamlines for int32 n_count");
  for (const auto& s : t.streamlines)
    if (s.cols() > std::numeric_limits<std::int32_t>::max())
      throw std::invalid_argument("write_trk: streamline longer than int32 max");

  TrkHeader h;
  if (t.voxel_size)
    h.voxel_size = {static_cast<float>(t.voxel_size->x()), static_cast<float>(t.voxel_size->y()),
                    static_cast<float>(t.voxel_size->z())};
  h.n_count = static_cast<std::int32_t>(t.size());

  ByteWriter w;
  std::size_t total = kTrkHeaderSize;
  for (const auto& s : t.streamlines) total += 4 + 12 * static_cast<std::size_t>(s.cols());
  w.out.reserve(total);

  w.raw(h.id_string.data(), h.id_string.size());
  for (auto d : h.dim) w.i16(d);
  for (auto v : h.voxel_size) w.f32(v);
  for (auto o : h.origin) w.f32(o);
  w.i16(h.n_scalars);
  w.raw(h.scalar_names.data(), h.scalar_names.size());
  w.i16(h.n_properties);
  w.raw(h.property_names.data(), h.property_names.size());
  for (auto m : h.vox_to_ras) w.f32(m);
  w.raw(h.reserved.data(), h.reserved.size());
  w.i32(h.n_count);
  w.i32(h.version);
  w.i32(h.hdr_size);

  for (const auto& s : t.streamlines) {
    w.i32(static_cast<std::int32_t>(s.cols()));
    for (Eigen::Index p = 0; p < s.cols(); ++p) {
      w.f32(static_cast<float>(s(0, p)));
      w.f32(static_cast<float>(s(1, p)));
      w.f32(static_cast<float>(s(2, p)));
    }
  }
  return std::move(w.out);
}

Tractography read_tractography_json(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("/: expected a JSON object");
  if (!root.contains("streamlines"))
    throw ParseError("/streamlines: missing required key \"streamlines\"");
  const json& sl = root["streamlines"];
  if (!sl.is_array() || sl.empty())
    throw ParseError("/streamlines: expected a non-empty array");

  Tractography t;
  t.streamlines.reserve(sl.size());
  for (std::size_t i = 0; i < sl.size(); ++i) {
    const json& pts = sl[i];
    const std::string where = "/streamlines/" + std::to_string(i);
    if (!pts.is_array() || pts.empty())
      throw ParseError(where + ": expected a non-empty array of points");
    Streamline s(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const json& pt = pts[p];
      const std::string pwhere = where + "/" + std::to_string(p);
      if (!pt.is_array() || pt.size() != 3)
        throw ParseError(pwhere + ": expected [x, y, z]");
      for (int axis = 0; axis < 3; ++axis)
        s(axis, static_cast<Eigen::Index>(p)) =
            number_at(pt[axis], pwhere + "/" + std::to_string(axis));
    }
    t.streamlines.push_back(std::move(s));
  }

  if (root.contains("voxel_size")) {
    const json& vs = root["voxel_size"];
    if (!vs.is_array() || vs.size() != 3)
      throw ParseError("/voxel_size: expected [x, y, z]");
    Point3 v;
    for (int axis = 0; axis < 3; ++axis) {
      v[axis] = number_at(vs[axis], "/voxel_size/" + std::to_string(axis));
      if (v[axis] <= 0) throw ParseError("/voxel_size: components must be > 0");
    }
    t.voxel_size = v;
  }
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ParseError("/name: expected a string");
    t.name = root["name"].get<std::string>();
  }
  return t;
}

std::string write_tractography_json(const Tractography& t) {
  if (t.empty()) throw std::invalid_argument("write_tractography_json: empty tractography");
  std::string out = "{\n";
  if (!t.name.empty()) out += "  \"name\": \"" + escape_json(t.name) + "\",\n";
  if (t.voxel_size) {
    out += "  \"voxel_size\": [";
    for (int axis = 0; axis < 3; ++axis) {
      if (axis) out += ", ";
      append_number(out, (*t.voxel_size)[axis]);
    }
    out += "],\n";
  }
  out += "  \"streamlines\": [\n";
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const Streamline& s = t.streamlines[static_cast<std::size_t>(i)];
    out += "    [";
    for (Eigen::Index p = 0; p < s.cols(); ++p) {
      if (p) out += ", ";
      out += '[';
      for (int axis = 0; axis < 3; ++axis) {
        if (axis) out += ", ";
        append_number(out, s(axis, p));
      }
      out += ']';
    }
    out += (i + 1 < t.size()) ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

AffineTransform read_affine_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  AffineTransform m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> m(r, c)))
        throw ParseError("affine: expected 16 whitespace-separated numbers (4x4, row-major)");
  std::string extra;
  if (in >> extra) throw ParseError("affine: trailing content after 16 numbers");
  if (!m.allFinite()) throw ParseError("affine: non-finite entry");
  return m;
}

Tractography apply_affine(const Tractography& t, const AffineTransform& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("apply_affine: last row must be (0, 0, 0, 1)");
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (std::abs(r.determinant()) <= 1e-12)
    throw std::invalid_argument("apply_affine: singular linear part");
  const Point3 shift = m.topRightCorner<3, 1>();
  Tractography out = t;
  for (auto& s : out.streamlines) s = (r * s).colwise() + shift;
  return out;
}

std::string write_mapping_json(const Mapping& q,
                               const std::vector<std::pair<std::string, double>>& extras) {
  if (q.empty()) throw std::invalid_argument("write_mapping_json: empty mapping");
  for (Eigen::Index target : q)
    if (target < 0) throw std::invalid_argument("write_mapping_json: negative target index");
  std::string out = "{\n  \"mapping\": [";
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(q[i]);
  }
  out += ']';
  for (const auto& [key, value] : extras) {
    out += ",\n  \"" + escape_json(key) + "\": ";
    append_number(out, value);
  }
  out += "\n}\n";
  return out;
}

Mapping read_mapping_json(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("/: expected a JSON object");
  if (!root.contains("mapping"))
    throw ParseError("/mapping: missing required key \"mapping\"");
  return index_array_at(root["mapping"], "/mapping");
}

std::vector<Eigen::Index> read_index_set_json(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("/: expected a JSON object");
  std::vector<Eigen::Index> indices;
  if (root.contains("indices")) {
    indices = index_array_at(root["indices"], "/indices");
  } else if (root.contains("mapping")) {
    indices = index_array_at(root["mapping"], "/mapping");
  } else {
    throw ParseError("/: expected an \"indices\" or \"mapping\" key");
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(std::max<std::streamoff>(size, 0)));
  if (!bytes.empty()) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw ParseError("failed reading file: " + path.string());
  return bytes;
}

std::string read_file_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void atomic_write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    if (!bytes.empty())
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void atomic_write_file(const std::filesystem::path& path, std::string_view text) {
  atomic_write_file(path,
                    std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()));
}

Tractography read_tractography_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  Tractography t;
  if (ext == ".trk") {
    t = read_trk(read_file_bytes(path));
  } else if (ext == ".json") {
    t = read_tractography_json(read_file_text(path));
  } else {
    throw ParseError("unsupported tractography extension \"" + ext +
                     "\" (expected .trk or .json): " + path.string());
  }
  if (t.name.empty()) t.name = path.stem().string();
  return t;
}

void write_tractography_file(const std::filesystem::path& path, const Tractography& t) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".trk") {
    atomic_write_file(path, std::span<const std::byte>(write_trk(t)));
  } else if (ext == ".json") {
    atomic_write_file(path, std::string_view(write_tractography_json(t)));
  } else {
    throw ParseError("unsupported tractography extension \"" + ext +
                     "\" (expected .trk or .json): " + path.string());
  }
}

}  // namespace tractmap
