/*
 * Copyright 2026 The irdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// IRDSCN1 text scene format:
//
//   IRDSCN1
//   width <int>
//   height <int>
//   delta <meters>
//   <id> <name> <r> <t>        one line per palette entry
//   ap <x> <y>                 one line per AP
//   checksum <16 hex digits>   FNV-1a over the grid as int32 little-endian
//   grid
//   <height rows of width whitespace-separated class ids>

#ifndef IRDKIT_SCENE_IO_HPP_
#define IRDKIT_SCENE_IO_HPP_

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "irdkit/scene.hpp"

namespace irdkit {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::uint64_t class_grid_checksum(const Grid<int>& classes) {
  Fnv1a h;
  for (int v : classes.data()) {
    const auto u = static_cast<std::uint32_t>(v);
    const unsigned char le[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                                 static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
    h.update(le, 4);
  }
  return h.digest();
}

inline void write_scene(std::ostream& os, const Scene& scene) {
  scene.validate();
  os << "IRDSCN1\n";
  os << "width " << scene.width << "\n";
  os << "height " << scene.height << "\n";
  os << "delta " << format_double(scene.delta) << "\n";
  for (const auto& m : scene.palette.entries())
    os << m.id << ' ' << m.name << ' ' << format_double(m.reflection) << ' '
       << format_double(m.transmission) << "\n";
  for (const auto& ap : scene.aps) os << "ap " << ap.x << ' ' << ap.y << "\n";
  os << "checksum " << hex64(class_grid_checksum(scene.classes)) << "\n";
  os << "grid\n";
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      if (x) os << ' ';
      os << scene.classes(x, y);
    }
    os << "\n";
  }
}

inline void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_scene(out, scene);
  if (!out) throw Error("write to '" + path + "' failed");
}

namespace detail {

template <typename T>
T parse_number(const std::string& token, const std::string& what) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(ParseError::Kind::kMalformedHeader, "scene: bad " + what + " '" + token + "'");
  return value;
}

}  // namespace detail

/// Parses and validates. Never returns a partially populated scene.
inline Scene read_scene(std::istream& is) {
  using Kind = ParseError::Kind;
  std::string line;
  if (!std::getline(is, line) || line != "IRDSCN1")
    throw ParseError(Kind::kMalformedHeader, "scene: missing IRDSCN1 magic");

  Scene scene;
  std::vector<Material> materials;
  bool have_width = false, have_height = false, have_delta = false, have_checksum = false;
  std::string checksum;
  bool saw_grid = false;

  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::vector<std::string> args;
    for (std::string tok; ls >> tok;) args.push_back(tok);

    auto expect_args = [&](std::size_t n) {
      if (args.size() != n)
        throw ParseError(Kind::kMalformedHeader, "scene: malformed header line '" + line + "'");
    };

    if (key == "grid") {
      expect_args(0);
      saw_grid = true;
      break;
    } else if (key == "width") {
      expect_args(1);
      scene.width = detail::parse_number<int>(args[0], "width");
      have_width = true;
    } else if (key == "height") {
      expect_args(1);
      scene.height = detail::parse_number<int>(args[0], "height");
      have_height = true;
    } else if (key == "delta") {
      expect_args(1);
      scene.delta = detail::parse_number<double>(args[0], "delta");
      have_delta = true;
    } else if (key == "ap") {
      expect_args(2);
      scene.aps.push_back({detail::parse_number<int>(args[0], "ap x"), detail::parse_number<int>(args[1], "ap y")});
    } else if (key == "checksum") {
      expect_args(1);
      checksum = args[0];
      have_checksum = true;
    } else if (!key.empty() && std::isdigit(static_cast<unsigned char>(key[0]))) {
      expect_args(3);
      materials.push_back({detail::parse_number<int>(key, "material id"), args[0],
                           detail::parse_number<double>(args[1], "reflection"),
                           detail::parse_number<double>(args[2], "transmission")});
    } else {
      throw ParseError(Kind::kMalformedHeader, "scene: unknown header key '" + key + "'");
    }
  }

  if (!saw_grid) throw ParseError(Kind::kTruncated, "scene: file ends before grid section");
  if (!have_width || !have_height || !have_delta || !have_checksum)
    throw ParseError(Kind::kMalformedHeader, "scene: header lacks width/height/delta/checksum");
  if (scene.width < 1 || scene.height < 1 || scene.width > 1 << 15 || scene.height > 1 << 15)
    throw ParseError(Kind::kMalformedHeader, "scene: implausible dimensions");

  scene.classes = Grid<int>(scene.width, scene.height);
  std::size_t count = 0;
  for (std::string tok; is >> tok;) {
    if (count == scene.classes.size())
      throw ParseError(Kind::kDimensionMismatch, "scene: grid has more cells than width*height");
    int v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError(Kind::kInvalidValue, "scene: bad class value '" + tok + "'");
    scene.classes.data()[count++] = v;
  }
  if (count < scene.classes.size())
    throw ParseError(Kind::kTruncated, "scene: grid truncated (" + std::to_string(count) + " of " +
                                           std::to_string(scene.classes.size()) + " cells)");
  if (hex64(class_grid_checksum(scene.classes)) != checksum)
    throw ParseError(Kind::kChecksum, "scene: checksum mismatch");

  scene.palette = MaterialPalette(std::move(materials));
  scene.validate();
  return scene;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scene '" + path + "'");
  return read_scene(in);
}

}  // namespace irdkit

#endif  // IRDKIT_SCENE_IO_HPP_
