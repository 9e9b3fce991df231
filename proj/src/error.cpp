// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/error.hpp"

namespace diffpir {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kKernelTooLarge: return "KernelTooLarge";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kNumericalInstability: return "NumericalInstability";
    case ErrorCode::kConnectionLost: return "ConnectionLost";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kRemoteError: return "RemoteError";
    case ErrorCode::kNonDifferentiableDenoiser: return "NonDifferentiableDenoiser";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace diffpir
