// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stitch {

enum class ErrorCode {
  // layout
  kMalformedLLMResponse,
  kEmptyLayout,
  kUnsatisfiableScene,
  kProviderUnavailable,
  // model_core
  kFullyMaskedRow,
  kShapeMismatch,
  kInvalidArgument,
  // region_binding
  kDegenerateBox,
  // cutout
  kNoTextTokens,
  kAllZeroWeights,
  kEmptyAfterRestriction,
  kEmptyTarget,
  kEmptyCorpus,
  // pipeline
  kBranchDivergence,
  kInvalidConfig,
  // poseval
  kUnknownTask,
  kInsufficientVocab,
  kMissingClassMetadata,
  kMisaligned,
  // cli_io
  kUnknownKey,
  kTypeMismatch,
  kIo,
  kFormat,
};

std::string_view error_code_name(ErrorCode code);

// Every domain failure in the library is reported through this type. The CLI
// maps it to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stitch
