// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ffsal {

enum class Errc {
  WrongMagic,
  TruncatedFile,
  LabelOutOfRange,
  CountMismatch,
  DimMismatch,
  ClassOutOfRange,
  EmptyEvalSet,
  CenterOutOfBounds,
  BadMagic,
  UnsupportedVersion,
  CrcMismatch,
  DimChainBroken,
  IoError,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// a typed code; callers branch on code(), humans read what().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ffsal
