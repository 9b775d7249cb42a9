#pragma once

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"
#include "symdepth/grid.hpp"

namespace symdepth {

namespace detail {

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path.string());
}

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Token scanner that tracks byte offsets for error reporting.
struct ByteCursor {
  const std::string& bytes;
  std::size_t pos = 0;
  std::string where;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw io_error(where + ": " + msg + " at byte " + std::to_string(at));
  }

  std::string token() {
    while (pos < bytes.size() && is_ws(bytes[pos])) ++pos;
    if (pos >= bytes.size()) fail("unexpected end of header", pos);
    const std::size_t start = pos;
    while (pos < bytes.size() && !is_ws(bytes[pos])) ++pos;
    return bytes.substr(start, pos - start);
  }

  // PFM: exactly one whitespace byte separates the scale line from the data.
  void expect_single_ws() {
    if (pos >= bytes.size() || !is_ws(bytes[pos])) fail("missing delimiter after scale", pos);
    ++pos;
  }
};

inline int parse_dim(ByteCursor& cur) {
  const std::size_t at = cur.pos;
  const std::string tok = cur.token();
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > 1 << 20) cur.fail("bad dimension '" + tok + "'", at);
    return static_cast<int>(v);
  } catch (const io_error&) {
    throw;
  } catch (...) {
    cur.fail("bad dimension '" + tok + "'", at);
  }
}

inline float load_float_le(const char* p, bool swap) {
  std::uint32_t u;
  std::memcpy(&u, p, 4);
  if (swap) u = __builtin_bswap32(u);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

inline void store_float_le(float f, std::string& out) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  char b[4];
  std::memcpy(b, &u, 4);
  out.append(b, 4);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PFM: "Pf" single channel / "PF" three channels, scale line sign encodes
// endianness, rows stored bottom-to-top. We always write little-endian.

inline std::string encode_pfm(const Grid<double>& g) {
  std::string out = "Pf\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n-1.0\n";
  for (int row = g.height() - 1; row >= 0; --row)
    for (int col = 0; col < g.width(); ++col)
      detail::store_float_le(static_cast<float>(g(col, row)), out);
  return out;
}

inline std::string encode_pfm(const NormalMap& g) {
  std::string out = "PF\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n-1.0\n";
  for (int row = g.height() - 1; row >= 0; --row)
    for (int col = 0; col < g.width(); ++col) {
      const Eigen::Vector3d& v = g(col, row);
      detail::store_float_le(static_cast<float>(v.x()), out);
      detail::store_float_le(static_cast<float>(v.y()), out);
      detail::store_float_le(static_cast<float>(v.z()), out);
    }
  return out;
}

template <typename GridT>
void write_pfm(const GridT& g, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_pfm(g));
}

namespace detail {

inline void decode_pfm_header(ByteCursor& cur, int channels_expected, int* w, int* h, bool* swap) {
  const std::string magic = cur.token();
  const char* want = channels_expected == 1 ? "Pf" : "PF";
  if (magic != want) {
    if (magic == "Pf" || magic == "PF")
      cur.fail("channel mismatch: got " + magic + ", expected " + want, 0);
    cur.fail("bad magic '" + magic + "'", 0);
  }
  *w = parse_dim(cur);
  *h = parse_dim(cur);
  const std::size_t at = cur.pos;
  const std::string scale_tok = cur.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (...) {
    cur.fail("bad scale '" + scale_tok + "'", at);
  }
  if (scale == 0.0) cur.fail("zero scale", at);
  *swap = (scale < 0.0) != (std::endian::native == std::endian::little);
  cur.expect_single_ws();
}

inline void check_payload(const ByteCursor& cur, std::size_t need) {
  if (cur.bytes.size() - cur.pos < need)
    cur.fail("truncated payload: need " + std::to_string(need) + " bytes, have " +
                 std::to_string(cur.bytes.size() - cur.pos),
             cur.pos);
}

inline double checked_value(const ByteCursor& cur, const char* p, bool swap, std::size_t at) {
  const float f = load_float_le(p, swap);
  if (!std::isfinite(f)) cur.fail("non-finite value", at);
  return static_cast<double>(f);
}

}  // namespace detail

inline Grid<double> decode_pfm_gray(const std::string& bytes, const std::string& where) {
  detail::ByteCursor cur{bytes, 0, where};
  int w = 0, h = 0;
  bool swap = false;
  detail::decode_pfm_header(cur, 1, &w, &h, &swap);
  detail::check_payload(cur, 4u * w * h);
  Grid<double> g(w, h);
  for (int row = h - 1; row >= 0; --row)
    for (int col = 0; col < w; ++col) {
      g(col, row) = detail::checked_value(cur, bytes.data() + cur.pos, swap, cur.pos);
      cur.pos += 4;
    }
  return g;
}

inline NormalMap decode_pfm_vec3(const std::string& bytes, const std::string& where) {
  detail::ByteCursor cur{bytes, 0, where};
  int w = 0, h = 0;
  bool swap = false;
  detail::decode_pfm_header(cur, 3, &w, &h, &swap);
  detail::check_payload(cur, 12u * w * h);
  NormalMap g(w, h, Eigen::Vector3d::Zero());
  for (int row = h - 1; row >= 0; --row)
    for (int col = 0; col < w; ++col) {
      Eigen::Vector3d v;
      for (int k = 0; k < 3; ++k) {
        v[k] = detail::checked_value(cur, bytes.data() + cur.pos, swap, cur.pos);
        cur.pos += 4;
      }
      g(col, row) = v;
    }
  return g;
}

inline Grid<double> read_pfm_gray(const std::filesystem::path& path) {
  return decode_pfm_gray(detail::read_file_bytes(path), path.string());
}

inline NormalMap read_pfm_vec3(const std::filesystem::path& path) {
  return decode_pfm_vec3(detail::read_file_bytes(path), path.string());
}

// ---------------------------------------------------------------------------
// PGM (P5, maxval 255): masks store 0 = background, 255 = object.

inline std::string encode_pgm(const Mask& m) {
  std::string out = "P5\n" + std::to_string(m.width()) + " " + std::to_string(m.height()) + "\n255\n";
  for (int row = 0; row < m.height(); ++row)
    for (int col = 0; col < m.width(); ++col)
      out.push_back(m(col, row) ? static_cast<char>(255) : static_cast<char>(0));
  return out;
}

inline void write_pgm(const Mask& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_pgm(m));
}

inline Mask decode_pgm(const std::string& bytes, const std::string& where) {
  detail::ByteCursor cur{bytes, 0, where};
  if (cur.token() != "P5") cur.fail("bad magic, expected P5", 0);
  const int w = detail::parse_dim(cur);
  const int h = detail::parse_dim(cur);
  const std::size_t at = cur.pos;
  if (cur.token() != "255") cur.fail("unsupported maxval (must be 255)", at);
  cur.expect_single_ws();
  detail::check_payload(cur, static_cast<std::size_t>(w) * h);
  Mask m(w, h, 0);
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      const unsigned char v = static_cast<unsigned char>(bytes[cur.pos]);
      if (v != 0 && v != 255) cur.fail("mask byte must be 0 or 255", cur.pos);
      m(col, row) = v ? 1 : 0;
      ++cur.pos;
    }
  return m;
}

inline Mask read_pgm(const std::filesystem::path& path) {
  return decode_pgm(detail::read_file_bytes(path), path.string());
}

// ---------------------------------------------------------------------------
// Correspondence text: one pair per line, "p_col p_row q_col q_row [score]",
// '#' starts a comment. The score column is written only when present.

inline std::string encode_correspondences(const CorrespondenceSet& set) {
  bool any_score = false;
  for (const auto& c : set) any_score = any_score || c.score != 0.0;
  std::string out;
  char buf[160];
  for (const auto& c : set) {
    if (any_score)
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g\n", c.p.col, c.p.row,
                    c.q.col, c.q.row, c.score);
    else
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", c.p.col, c.p.row, c.q.col,
                    c.q.row);
    out += buf;
  }
  return out;
}

inline void write_correspondences(const CorrespondenceSet& set, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_correspondences(set));
}

inline CorrespondenceSet decode_correspondences(const std::string& text, const std::string& where) {
  CorrespondenceSet set;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    ++line_no;
    std::string line = text.substr(line_start, line_end - line_start);
    line_start = line_end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);

    std::vector<double> vals;
    const char* p = line.c_str();
    while (*p) {
      while (*p && detail::is_ws(*p)) ++p;
      if (!*p) break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p || (*end && !detail::is_ws(*end)))
        throw io_error(where + ": parse error, line " + std::to_string(line_no));
      vals.push_back(v);
      p = end;
    }
    if (vals.empty()) continue;
    if (vals.size() != 4 && vals.size() != 5)
      throw io_error(where + ": parse error, line " + std::to_string(line_no) +
                     " (expected 4 or 5 numbers)");
    Correspondence c{{vals[0], vals[1]}, {vals[2], vals[3]}, vals.size() == 5 ? vals[4] : 0.0};
    set.push_back(c);
    if (line_end == text.size()) break;
  }
  return set;
}

inline CorrespondenceSet read_correspondences(const std::filesystem::path& path) {
  return decode_correspondences(detail::read_file_bytes(path), path.string());
}

// ---------------------------------------------------------------------------
// Scene manifest (JSON). Unknown fields round-trip untouched; the canonical
// form (sorted keys, two-space indent, trailing newline) is byte-stable.

struct SceneRecord {
  int width = 0;
  int height = 0;
  Quaternion camera_q;
  double camera_tx = 0.0;
  double camera_s = 1.0;
  struct Files {
    std::string depth, normal, mask, intensity, correspondences;
  } files;
  nlohmann::json noise;        // null for clean scenes
  std::uint64_t seed = 0;
  std::string ground_truth;    // clean manifest path, set on degraded scenes
  nlohmann::json extras = nlohmann::json::object();

  CameraPose camera() const {
    return {quat_to_rotation(camera_q), camera_tx, camera_s};
  }
  ImageFrame frame() const { return {width, height}; }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    throw io_error("manifest schema error: missing " + (path.empty() ? key : path + "." + key));
  return j.at(key);
}

template <typename T>
T require_as(const nlohmann::json& j, const char* key, const std::string& path) {
  const nlohmann::json& f = require_field(j, key, path);
  try {
    return f.get<T>();
  } catch (...) {
    throw io_error("manifest schema error: bad type for " + (path.empty() ? key : path + "." + key));
  }
}

}  // namespace detail

inline nlohmann::json manifest_to_json(const SceneRecord& rec) {
  nlohmann::json j = rec.extras;
  j["width"] = rec.width;
  j["height"] = rec.height;
  j["camera"] = {{"quaternion", {rec.camera_q.w, rec.camera_q.x, rec.camera_q.y, rec.camera_q.z}},
                 {"t_x", rec.camera_tx},
                 {"s", rec.camera_s}};
  j["files"] = {{"depth", rec.files.depth},
                {"normal", rec.files.normal},
                {"mask", rec.files.mask},
                {"intensity", rec.files.intensity},
                {"correspondences", rec.files.correspondences}};
  j["noise"] = rec.noise;
  j["seed"] = rec.seed;
  if (!rec.ground_truth.empty()) j["ground_truth"] = rec.ground_truth;
  return j;
}

inline SceneRecord manifest_from_json(nlohmann::json j) {
  SceneRecord rec;
  rec.width = detail::require_as<int>(j, "width", "");
  rec.height = detail::require_as<int>(j, "height", "");
  if (rec.width <= 0 || rec.height <= 0) throw io_error("manifest schema error: bad image size");
  const nlohmann::json cam = detail::require_field(j, "camera", "");
  const auto quat = detail::require_as<std::vector<double>>(cam, "quaternion", "camera");
  if (quat.size() != 4) throw io_error("manifest schema error: camera.quaternion needs 4 values");
  rec.camera_q = {quat[0], quat[1], quat[2], quat[3]};
  rec.camera_tx = detail::require_as<double>(cam, "t_x", "camera");
  rec.camera_s = detail::require_as<double>(cam, "s", "camera");
  if (!(rec.camera_s > 0.0)) throw io_error("manifest schema error: camera.s must be positive");
  const nlohmann::json files = detail::require_field(j, "files", "");
  rec.files.depth = detail::require_as<std::string>(files, "depth", "files");
  rec.files.normal = detail::require_as<std::string>(files, "normal", "files");
  rec.files.mask = detail::require_as<std::string>(files, "mask", "files");
  rec.files.intensity = detail::require_as<std::string>(files, "intensity", "files");
  rec.files.correspondences = detail::require_as<std::string>(files, "correspondences", "files");
  rec.noise = j.contains("noise") ? j.at("noise") : nlohmann::json();
  rec.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
  if (j.contains("ground_truth")) rec.ground_truth = j.at("ground_truth").get<std::string>();

  for (const char* key : {"width", "height", "camera", "files", "noise", "seed", "ground_truth"})
    j.erase(key);
  rec.extras = std::move(j);
  return rec;
}

inline std::string canonical_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline void write_manifest(const SceneRecord& rec, const std::filesystem::path& path) {
  detail::write_file_bytes(path, canonical_json(manifest_to_json(rec)));
}

inline SceneRecord read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return manifest_from_json(std::move(j));
  } catch (const io_error& e) {
    throw io_error(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  detail::write_file_bytes(path, canonical_json(j));
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(detail::read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace symdepth
