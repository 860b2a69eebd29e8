// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "stitch/layout.hpp"
#include "stitch/model.hpp"

namespace stitch::region {

/// Token sets for one (sub-prompt, box) branch. Indices are positions in the
/// joint sequence: visual tokens row-major in [0, N_v), text tokens at
/// N_v + i.
struct TokenPartition {
  model::TokenGrid grid;
  int text_length = 0;
  std::vector<int> inside_visual;
  std::vector<int> outside_visual;
  std::vector<int> subprompt_text;
  /// Inclusive token rectangle the box was scaled to.
  int row_min = 0, row_max = 0, col_min = 0, col_max = 0;

  int sequence_length() const { return grid.count() + text_length; }
  bool inside(int row, int col) const { return row >= row_min && row <= row_max && col >= col_min && col <= col_max; }
};

/// Maps a canvas-cell box onto the token grid: min edges use
/// floor(c * tokens / canvas), max edges floor((c + 1) * tokens / canvas) - 1,
/// both clamped to the grid. Non-padding text positions form subprompt_text.
/// Throws kDegenerateBox when the scaled rectangle is empty.
TokenPartition partition_tokens(model::TokenGrid grid, const layout::BoundingBox& box, int canvas,
                                const std::vector<bool>& text_pad_flags);

/// Region Binding mask: blocks inside -> outside, outside -> sub-prompt text
/// and sub-prompt text -> outside. Everything else stays 0. The same mask is
/// used in every block and head.
model::AttentionMask build_rb_mask(const TokenPartition& partition);

}  // namespace stitch::region
