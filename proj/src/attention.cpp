// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "stitch/error.hpp"
#include "stitch/model.hpp"

namespace stitch::model {

double AttentionMask::additive(int query, int key) const {
  return blocked(query, key) ? -std::numeric_limits<double>::infinity() : 0.0;
}

std::size_t AttentionMask::masked_count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

io::Tensor AttentionMask::to_flag_tensor() const {
  io::Tensor t;
  t.dims = {static_cast<std::uint32_t>(size_), static_cast<std::uint32_t>(size_)};
  t.data.assign(flags_.begin(), flags_.end());
  return t;
}

AttentionMask AttentionMask::from_flag_tensor(const io::Tensor& tensor) {
  if (tensor.dims.size() != 2 || tensor.dims[0] != tensor.dims[1]) {
    throw Error(ErrorCode::kShapeMismatch, "mask tensor must be square");
  }
  AttentionMask mask(static_cast<int>(tensor.dims[0]));
  for (std::size_t i = 0; i < tensor.data.size(); ++i) mask.flags_[i] = tensor.data[i] != 0.0f ? 1 : 0;
  return mask;
}

AttentionResult masked_attention(const Matrix& queries, const Matrix& keys, const Matrix& values, int num_heads,
                                 const AttentionMask* mask, const std::vector<int>& capture_heads) {
  const auto n = static_cast<int>(queries.rows());
  const auto d = static_cast<int>(queries.cols());
  if (keys.rows() != n || values.rows() != n || keys.cols() != d || values.cols() != d) {
    throw Error(ErrorCode::kShapeMismatch, "queries, keys and values must share shape");
  }
  if (num_heads <= 0 || d % num_heads != 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding width must be divisible by the head count");
  }
  if (mask != nullptr && mask->size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "mask is " + std::to_string(mask->size()) + "x" +
                                               std::to_string(mask->size()) + ", sequence has " + std::to_string(n));
  }
  for (int h : capture_heads) {
    if (h < 0 || h >= num_heads) throw Error(ErrorCode::kInvalidArgument, "capture head out of range");
  }
  const int head_dim = d / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  AttentionResult result;
  result.output.resize(n, d);
  result.weights.resize(capture_heads.size());
  Matrix weights(n, n);
  for (int h = 0; h < num_heads; ++h) {
    const auto q = queries.middleCols(h * head_dim, head_dim);
    const auto k = keys.middleCols(h * head_dim, head_dim);
    weights.noalias() = (q * k.transpose()) * scale;
    for (int i = 0; i < n; ++i) {
      auto row = weights.row(i);
      double max_score = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int j = 0; j < n; ++j) {
        if (mask != nullptr && mask->blocked(i, j)) continue;
        max_score = any ? std::max(max_score, row(j)) : row(j);
        any = true;
      }
      if (!any) throw Error(ErrorCode::kFullyMaskedRow, "query " + std::to_string(i) + " has every key masked");
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (mask != nullptr && mask->blocked(i, j)) {
          row(j) = 0.0;
        } else {
          row(j) = std::exp(row(j) - max_score);
          sum += row(j);
        }
      }
      row /= sum;
    }
    result.output.middleCols(h * head_dim, head_dim).noalias() = weights * values.middleCols(h * head_dim, head_dim);
    for (std::size_t c = 0; c < capture_heads.size(); ++c) {
      if (capture_heads[c] == h) result.weights[c] = weights;
    }
  }
  return result;
}

}  // namespace stitch::model
