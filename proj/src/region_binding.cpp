// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/region_binding.hpp"

#include <algorithm>

#include "stitch/error.hpp"

namespace stitch::region {
namespace {

int scale_min(int cell, int tokens, int canvas) {
  return static_cast<int>(static_cast<long long>(cell) * tokens / canvas);
}

int scale_max(int cell, int tokens, int canvas) {
  return static_cast<int>(static_cast<long long>(cell + 1) * tokens / canvas) - 1;
}

}  // namespace

TokenPartition partition_tokens(model::TokenGrid grid, const layout::BoundingBox& box, int canvas,
                                const std::vector<bool>& text_pad_flags) {
  if (grid.height < 1 || grid.width < 1) throw Error(ErrorCode::kInvalidArgument, "token grid must be non-empty");
  if (canvas < 1) throw Error(ErrorCode::kInvalidArgument, "canvas must be positive");

  TokenPartition p;
  p.grid = grid;
  p.text_length = static_cast<int>(text_pad_flags.size());
  p.col_min = std::clamp(scale_min(box.x_min, grid.width, canvas), 0, grid.width - 1);
  p.col_max = std::clamp(scale_max(box.x_max, grid.width, canvas), -1, grid.width - 1);
  p.row_min = std::clamp(scale_min(box.y_min, grid.height, canvas), 0, grid.height - 1);
  p.row_max = std::clamp(scale_max(box.y_max, grid.height, canvas), -1, grid.height - 1);
  if (p.col_max < p.col_min || p.row_max < p.row_min) {
    throw Error(ErrorCode::kDegenerateBox, "box [" + std::to_string(box.x_min) + "," + std::to_string(box.x_max) +
                                               "]x[" + std::to_string(box.y_min) + "," + std::to_string(box.y_max) +
                                               "] covers no token of a " + std::to_string(grid.height) + "x" +
                                               std::to_string(grid.width) + " grid");
  }
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      (p.inside(r, c) ? p.inside_visual : p.outside_visual).push_back(r * grid.width + c);
    }
  }
  const int nv = grid.count();
  for (int i = 0; i < p.text_length; ++i) {
    if (!text_pad_flags[i]) p.subprompt_text.push_back(nv + i);
  }
  return p;
}

model::AttentionMask build_rb_mask(const TokenPartition& partition) {
  model::AttentionMask mask(partition.sequence_length());
  for (int out : partition.outside_visual) {
    for (int in : partition.inside_visual) mask.block(in, out);
    for (int t : partition.subprompt_text) {
      mask.block(out, t);
      mask.block(t, out);
    }
  }
  return mask;
}

}  // namespace stitch::region
