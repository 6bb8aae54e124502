// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Binary PGM (P5) heatmaps and PPM (P6) overlays for saliency maps.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ffsal/saliency.hpp"

namespace ffsal {

using Rgb = std::array<double, 3>;

/// round(v * 255) with halves away from zero, after clamping v to [0, 1].
std::uint8_t unit_to_byte(double v);

/// Three-stop linear ramp: blue at 0, yellow at 0.5, red at 1. Channels in [0, 255].
Rgb colormap(double v);

/// P5 bytes for a normalized map. Centres off the stride grid are written as 0.
std::vector<std::uint8_t> encode_pgm(const SaliencyMap& map);

/// P6 bytes: each pixel is 0.5 * gray(image) + 0.5 * colormap(value).
/// Pixels without a map value keep the plain gray level.
std::vector<std::uint8_t> encode_overlay(std::span<const float> image, std::size_t rows,
                                         std::size_t cols, const SaliencyMap& map);

void render_pgm(const SaliencyMap& map, const std::filesystem::path& path);
void render_overlay(std::span<const float> image, std::size_t rows, std::size_t cols,
                    const SaliencyMap& map, const std::filesystem::path& path);

}  // namespace ffsal
