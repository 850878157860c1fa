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

// Radio maps and the IRDMAP1 binary format:
//
//   bytes 0..7   "IRDMAP1\n"
//   bytes 8..11  width,  uint32 little-endian
//   bytes 12..15 height, uint32 little-endian
//   then width*height float32 little-endian values in dBm, row-major.

#ifndef IRDKIT_RADIOMAP_HPP_
#define IRDKIT_RADIOMAP_HPP_

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "irdkit/common.hpp"

namespace irdkit {

inline constexpr double kDefaultPMin = -150.0;
inline constexpr double kDefaultPMax = -30.0;

struct RadioMap {
  Grid<float> rssi;  // dBm
  std::string scene_id;
  int ap_index = 0;

  int width() const { return rssi.width(); }
  int height() const { return rssi.height(); }

  /// Values mapped affinely from [p_min, p_max] onto [0, 255].
  Grid<double> to_8bit(double p_min = kDefaultPMin, double p_max = kDefaultPMax) const {
    if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
    Grid<double> out(width(), height());
    const double scale = 255.0 / (p_max - p_min);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = (rssi.data()[i] - p_min) * scale;
    return out;
  }

  RadioMap mirrored() const { return {rssi.mirrored(), scene_id, ap_index}; }

  friend bool operator==(const RadioMap&, const RadioMap&) = default;
};

namespace detail {

inline constexpr char kMapMagic[8] = {'I', 'R', 'D', 'M', 'A', 'P', '1', '\n'};

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

}  // namespace detail

inline std::string encode_radiomap(const Grid<float>& values) {
  std::string out(detail::kMapMagic, 8);
  detail::put_u32(out, static_cast<std::uint32_t>(values.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(values.height()));
  out.reserve(out.size() + 4 * values.size());
  for (float v : values.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

/// Parses IRDMAP1 bytes. Non-finite values are rejected.
inline Grid<float> decode_radiomap(const std::string& bytes) {
  using K = ParseError::Kind;
  if (bytes.size() < 16 || std::memcmp(bytes.data(), detail::kMapMagic, 8) != 0)
    throw ParseError(K::kMalformedHeader, "not an IRDMAP1 file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t w = detail::get_u32(p + 8), h = detail::get_u32(p + 12);
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15)
    throw ParseError(K::kMalformedHeader, "implausible map dimensions");
  const std::size_t expect = 16 + 4 * static_cast<std::size_t>(w) * h;
  if (bytes.size() < expect) throw ParseError(K::kTruncated, "map payload truncated");
  if (bytes.size() > expect) throw ParseError(K::kDimensionMismatch, "map payload longer than header dimensions");
  Grid<float> out(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = std::bit_cast<float>(detail::get_u32(p + 16 + 4 * i));
    if (!std::isfinite(v)) throw ParseError(K::kInvalidValue, "non-finite value at index " + std::to_string(i));
    out.data()[i] = v;
  }
  return out;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kTruncated, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path);
}

inline void save_radiomap(const RadioMap& rm, const std::string& path) {
  write_file_bytes(path, encode_radiomap(rm.rssi));
}

inline RadioMap load_radiomap(const std::string& path) { return {decode_radiomap(read_file_bytes(path)), "", 0}; }

struct ImportResult {
  RadioMap map;
  std::size_t clamped = 0;  // values moved into [p_min, p_max]
};

/// Loads an externally produced map and clamps it into the configured range.
inline ImportResult import_radiomap(const std::string& path, double p_min = kDefaultPMin,
                                    double p_max = kDefaultPMax) {
  if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
  ImportResult r{load_radiomap(path), 0};
  for (float& v : r.map.rssi.data()) {
    const float c = std::clamp(v, static_cast<float>(p_min), static_cast<float>(p_max));
    if (c != v) ++r.clamped;
    v = c;
  }
  return r;
}

}  // namespace irdkit

#endif  // IRDKIT_RADIOMAP_HPP_
