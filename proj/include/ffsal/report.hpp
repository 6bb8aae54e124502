// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "ffsal/ff_train.hpp"
#include "ffsal/saliency.hpp"

namespace ffsal {

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header `layer,epoch,mean_loss`; layer and epoch are 0-based.
std::string loss_trace_csv(const LossTrace& trace);

/// Header `row,col,value`, row-major, visited centres only.
std::string saliency_csv(const SaliencyMap& map);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ffsal
