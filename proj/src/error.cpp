// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/error.hpp"

namespace stitch {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLLMResponse: return "MalformedLLMResponse";
    case ErrorCode::kEmptyLayout: return "EmptyLayout";
    case ErrorCode::kUnsatisfiableScene: return "UnsatisfiableScene";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kFullyMaskedRow: return "FullyMaskedRow";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kNoTextTokens: return "NoTextTokens";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kEmptyAfterRestriction: return "EmptyAfterRestriction";
    case ErrorCode::kEmptyTarget: return "EmptyTarget";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kBranchDivergence: return "BranchDivergence";
    case ErrorCode::kInvalidConfig: return "StitchConfig";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kInsufficientVocab: return "InsufficientVocab";
    case ErrorCode::kMissingClassMetadata: return "MissingClassMetadata";
    case ErrorCode::kMisaligned: return "Misaligned";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Error";
}

}  // namespace stitch
