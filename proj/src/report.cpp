// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/report.hpp"

#include <array>
#include <charconv>
#include <span>

#include "ffsal/checkpoint.hpp"

namespace ffsal {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string loss_trace_csv(const LossTrace& trace) {
  std::string out = "layer,epoch,mean_loss\n";
  for (std::size_t layer = 0; layer < trace.per_layer.size(); ++layer) {
    for (std::size_t epoch = 0; epoch < trace.per_layer[layer].size(); ++epoch) {
      out += std::to_string(layer) + "," + std::to_string(epoch) + "," +
             format_double(trace.per_layer[layer][epoch]) + "\n";
    }
  }
  return out;
}

std::string saliency_csv(const SaliencyMap& map) {
  std::string out = "row,col,value\n";
  for (std::size_t r = 0; r < map.height; ++r) {
    for (std::size_t c = 0; c < map.width; ++c) {
      if (const auto& v = map.at(r, c)) {
        out += std::to_string(r) + "," + std::to_string(c) + "," + format_double(*v) + "\n";
      }
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace ffsal
