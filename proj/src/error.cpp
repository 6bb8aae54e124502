// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/error.hpp"

namespace ffsal {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::WrongMagic: return "WrongMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::ClassOutOfRange: return "ClassOutOfRange";
    case Errc::EmptyEvalSet: return "EmptyEvalSet";
    case Errc::CenterOutOfBounds: return "CenterOutOfBounds";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::DimChainBroken: return "DimChainBroken";
    case Errc::IoError: return "IoError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace ffsal
