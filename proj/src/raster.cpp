// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffsal/checkpoint.hpp"
#include "ffsal/error.hpp"

namespace ffsal {
namespace {

constexpr Rgb kBlue{0.0, 0.0, 255.0};
constexpr Rgb kYellow{255.0, 255.0, 0.0};
constexpr Rgb kRed{255.0, 0.0, 0.0};

std::uint8_t to_byte(double level) {
  return static_cast<std::uint8_t>(std::round(std::clamp(level, 0.0, 255.0)));
}

void append_header(std::vector<std::uint8_t>& out, const char* magic, std::size_t w,
                   std::size_t h) {
  const std::string header =
      std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
}

}  // namespace

std::uint8_t unit_to_byte(double v) {
  if (std::isnan(v)) return 0;
  return to_byte(std::clamp(v, 0.0, 1.0) * 255.0);
}

Rgb colormap(double v) {
  v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  const Rgb& lo = v <= 0.5 ? kBlue : kYellow;
  const Rgb& hi = v <= 0.5 ? kYellow : kRed;
  const double t = v <= 0.5 ? v / 0.5 : (v - 0.5) / 0.5;
  Rgb out{};
  for (std::size_t ch = 0; ch < 3; ++ch) out[ch] = lo[ch] + t * (hi[ch] - lo[ch]);
  return out;
}

std::vector<std::uint8_t> encode_pgm(const SaliencyMap& map) {
  if (map.values.size() != map.height * map.width) {
    throw Error(Errc::DimMismatch, "map holds " + std::to_string(map.values.size()) + " values");
  }
  std::vector<std::uint8_t> out;
  append_header(out, "P5", map.width, map.height);
  for (const auto& v : map.values) out.push_back(v ? unit_to_byte(*v) : 0);
  return out;
}

std::vector<std::uint8_t> encode_overlay(std::span<const float> image, std::size_t rows,
                                         std::size_t cols, const SaliencyMap& map) {
  if (rows != map.height || cols != map.width || image.size() != rows * cols ||
      map.values.size() != rows * cols) {
    throw Error(Errc::DimMismatch, "image is " + std::to_string(rows) + "x" +
                                       std::to_string(cols) + ", map is " +
                                       std::to_string(map.height) + "x" + std::to_string(map.width));
  }
  std::vector<std::uint8_t> out;
  append_header(out, "P6", cols, rows);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double gray = std::clamp(static_cast<double>(image[i]), 0.0, 1.0) * 255.0;
    if (!map.values[i]) {
      const std::uint8_t g = to_byte(gray);
      out.insert(out.end(), {g, g, g});
      continue;
    }
    const Rgb c = colormap(*map.values[i]);
    for (std::size_t ch = 0; ch < 3; ++ch) out.push_back(to_byte(0.5 * gray + 0.5 * c[ch]));
  }
  return out;
}

void render_pgm(const SaliencyMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(map));
}

void render_overlay(std::span<const float> image, std::size_t rows, std::size_t cols,
                    const SaliencyMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_overlay(image, rows, cols, map));
}

}  // namespace ffsal
