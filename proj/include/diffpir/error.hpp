// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffpir {

enum class ErrorCode {
  kShapeMismatch,
  kKernelTooLarge,
  kInvalidRange,
  kOutOfRange,
  kIoError,
  kUnsupportedFormat,
  kNumericalInstability,
  kConnectionLost,
  kProtocolViolation,
  kRemoteError,
  kNonDifferentiableDenoiser,
  kInvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace diffpir
