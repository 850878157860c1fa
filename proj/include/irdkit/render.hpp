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

// PNG heatmaps (libpng) and the prior-set export: one binary PGM per
// condition channel plus a JSON index of the validated points.
//
// A value v in [lo, hi] goes to bin floor((v - lo) / (hi - lo) * 256),
// clamped to 0..255; hi lands in the top bin.

#ifndef IRDKIT_RENDER_HPP_
#define IRDKIT_RENDER_HPP_

#include <png.h>

#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/common.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/radiomap.hpp"

namespace irdkit {

enum class Colormap { kGray, kViridis };

inline std::string to_string(Colormap c) { return c == Colormap::kGray ? "gray" : "viridis"; }

inline Colormap parse_colormap(const std::string& s) {
  if (s == "gray") return Colormap::kGray;
  if (s == "viridis") return Colormap::kViridis;
  throw ConfigError("unknown colormap '" + s + "' (expected gray or viridis)");
}

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

// Anchors sampled from viridis at 0, 1/4, 1/2, 3/4, 1.
inline constexpr std::array<Rgb, 5> kViridisAnchors{
    {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

}  // namespace detail

inline int value_bin(double v, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("render range must satisfy lo < hi");
  const double b = std::floor((v - lo) / (hi - lo) * 256.0);
  return static_cast<int>(std::clamp(b, 0.0, 255.0));
}

inline Rgb bin_color(int bin, Colormap cmap) {
  const auto g = static_cast<std::uint8_t>(bin);
  if (cmap == Colormap::kGray) return {g, g, g};
  const double pos = bin / 255.0 * 4.0;
  const int i = std::min(3, static_cast<int>(pos));
  const double f = pos - i;
  Rgb out{};
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<std::uint8_t>(std::lround(detail::kViridisAnchors[i][c] * (1.0 - f) +
                                                   detail::kViridisAnchors[i + 1][c] * f));
  return out;
}

template <typename T>
std::string encode_png(const Grid<T>& values, double lo, double hi, Colormap cmap) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::string out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error("libpng write failure");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(values.width()), static_cast<png_uint_32>(values.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(values.width()) * 3);
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) {
      const Rgb c = bin_color(value_bin(static_cast<double>(values(x, y)), lo, hi), cmap);
      std::memcpy(&row[static_cast<std::size_t>(x) * 3], c.data(), 3);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct DecodedPng {
  int width = 0, height = 0;
  std::vector<Rgb> pixels;  // row-major
};

inline DecodedPng decode_png(const std::string& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw ParseError(ParseError::Kind::kMalformedHeader, "unreadable PNG");
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw ParseError(ParseError::Kind::kTruncated, "PNG decode failed");
  }
  DecodedPng d{static_cast<int>(img.width), static_cast<int>(img.height), {}};
  for (std::size_t i = 0; i + 2 < buf.size(); i += 3) d.pixels.push_back({buf[i], buf[i + 1], buf[i + 2]});
  return d;
}

inline nlohmann::ordered_json render_sidecar(const std::string& source, double lo, double hi, Colormap cmap) {
  nlohmann::ordered_json j;
  j["source"] = source;
  j["colormap"] = to_string(cmap);
  j["min"] = lo;
  j["max"] = hi;
  j["bins"] = 256;
  j["bin_rule"] = "bin = clamp(floor((v - min) / (max - min) * 256), 0, 255)";
  if (cmap == Colormap::kGray) {
    j["color_rule"] = "rgb = (bin, bin, bin)";
  } else {
    j["color_rule"] = "linear interpolation between anchors at bin/255 = 0, 0.25, 0.5, 0.75, 1";
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const Rgb& c : detail::kViridisAnchors) a.push_back({c[0], c[1], c[2]});
    j["anchors"] = a;
  }
  return j;
}

/// Writes <out>.png and <out minus extension>.json.
template <typename T>
void render_to_file(const Grid<T>& values, double lo, double hi, Colormap cmap, const std::string& source,
                    const std::string& out_png) {
  write_file_bytes(out_png, encode_png(values, lo, hi, cmap));
  std::filesystem::path side(out_png);
  side.replace_extension(".json");
  std::ofstream(side) << render_sidecar(source, lo, hi, cmap).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Binary PGM (P5, maxval 255)

inline std::string encode_pgm(const Grid<std::uint8_t>& g) {
  std::string out = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(g.data().data()), g.size());
  return out;
}

inline Grid<std::uint8_t> decode_pgm(const std::string& bytes) {
  using K = ParseError::Kind;
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P5") throw ParseError(K::kMalformedHeader, "not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw ParseError(K::kMalformedHeader, "bad PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw ParseError(K::kMalformedHeader, "unsupported PGM header");
  ++pos;  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < pos + n) throw ParseError(K::kTruncated, "PGM raster truncated");
  if (bytes.size() > pos + n) throw ParseError(K::kDimensionMismatch, "PGM raster longer than header");
  Grid<std::uint8_t> g(w, h);
  std::memcpy(g.data().data(), bytes.data() + pos, n);
  return g;
}

/// Channel values lie in [0, 1]; stored as round(255 v).
inline Grid<std::uint8_t> quantize_unit(const Grid<float>& g) {
  Grid<std::uint8_t> q(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i)
    q.data()[i] = static_cast<std::uint8_t>(std::lround(std::clamp(g.data()[i], 0.0f, 1.0f) * 255.0f));
  return q;
}

// ---------------------------------------------------------------------------
// Prior-set export

inline nlohmann::ordered_json points_json(const std::vector<CandidatePoint>& pts) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : pts)
    arr.push_back({{"x", p.cell.x}, {"y", p.cell.y}, {"nx", p.normal.x}, {"ny", p.normal.y}, {"faces", p.faces}});
  return arr;
}

/// Writes <dir>/<channel>.pgm for every condition channel and <dir>/priors.json.
inline void export_priors(const PriorSet& priors, const ConditionStack& cond, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json idx;
  idx["format"] = "irdkit-priors-1";
  idx["ap"] = {{"x", priors.ap.x}, {"y", priors.ap.y}};
  idx["diffraction"] = points_json(priors.validated.diffraction);
  idx["transmission"] = points_json(priors.validated.transmission);
  idx["raw_counts"] = {{"diffraction", priors.raw.diffraction.size()},
                       {"transmission", priors.raw.transmission.size()}};
  nlohmann::ordered_json channels = nlohmann::ordered_json::array();
  for (int k = 0; k < kConditionChannels; ++k) {
    const std::string file = std::string(kChannelNames[static_cast<std::size_t>(k)]) + ".pgm";
    write_file_bytes((std::filesystem::path(dir) / file).string(),
                     encode_pgm(quantize_unit(cond.channels[static_cast<std::size_t>(k)])));
    channels.push_back({{"name", kChannelNames[static_cast<std::size_t>(k)]}, {"file", file}, {"scale", "v = pgm / 255"}});
  }
  idx["channels"] = channels;
  std::ofstream(std::filesystem::path(dir) / "priors.json") << idx.dump(2) << "\n";
}

}  // namespace irdkit

#endif  // IRDKIT_RENDER_HPP_
