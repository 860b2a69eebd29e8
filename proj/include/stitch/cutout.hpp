// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "stitch/io.hpp"
#include "stitch/model.hpp"
#include "stitch/region_binding.hpp"

namespace stitch::cutout {

/// Binary mask over the latent token grid, row-major.
struct GridMask {
  model::TokenGrid grid;
  std::vector<bool> selected;

  GridMask() = default;
  explicit GridMask(model::TokenGrid g) : grid(g), selected(static_cast<std::size_t>(g.count()), false) {}

  bool at(int row, int col) const { return selected[static_cast<std::size_t>(row) * grid.width + col]; }
  int count() const;

  friend bool operator==(const GridMask&, const GridMask&) = default;
};

struct CutoutMask {
  GridMask mask;
  double eta_used = 0.0;
  int kappa_used = 1;
};

/// Mean attention each visual token receives from the non-padding text rows.
/// Throws kNoTextTokens when every text position is padding.
std::vector<double> aggregate_text_attention(const model::AttentionRecord& record, const std::vector<bool>& pad_flags);

/// Takes tokens in descending weight order (ties: lower index first) until the
/// running sum reaches eta times the total; the crossing token is kept. The
/// total is accumulated in the same descending order so eta = 1 stops exactly
/// at the last non-zero weight. Throws kAllZeroWeights.
std::vector<bool> select_mask(std::span<const double> weights, double eta);

/// Stride-1 kappa x kappa max pooling (binary dilation), window clipped at the
/// borders. kappa must be odd.
GridMask smooth_mask(const GridMask& mask, int kappa);

/// select_mask followed by smooth_mask.
CutoutMask make_cutout(std::span<const double> weights, model::TokenGrid grid, double eta, int kappa);

/// Keeps only tokens inside the partition's box. Throws kEmptyAfterRestriction.
CutoutMask restrict_to_box(const CutoutMask& mask, const region::TokenPartition& partition);

double iou(const GridMask& pred, const GridMask& target);
/// |pred & target| / |target|; throws kEmptyTarget.
double iot(const GridMask& pred, const GridMask& target);

struct HeadScore {
  int block_index = 0;
  int head_index = 0;
  double eta = 0.0;
  double iou = 0.0;
  double iot = 0.0;
};

/// One probe image: attention records for every candidate head (captured at
/// the same step), the prompt's padding flags and the reference mask.
struct ProbeSample {
  std::vector<model::AttentionRecord> records;
  std::vector<bool> pad_flags;
  GridMask reference;
};

inline const std::vector<double> kDefaultEtaGrid = {0.75, 0.80, 0.85, 0.90, 0.95, 0.97, 0.99};

/// Mean IoU / IoT of every (block, head, eta) over the corpus, sorted by IoU
/// descending (then IoT descending, then block, head, eta ascending). Heads
/// must be present in every sample. Throws kEmptyCorpus.
std::vector<HeadScore> rank_heads(const std::vector<ProbeSample>& corpus, std::span<const double> eta_grid,
                                  int kappa = 1);

/// Tab-separated "Block, Head, η, IoU, IoT" table. With best_eta_only each
/// head appears once, at its best threshold. top = 0 prints every row.
std::string format_head_report(const std::vector<HeadScore>& ranked, std::size_t top = 5, bool best_eta_only = true);

inline constexpr const char* kHeadReportHeader = "Block\tHead\t\xCE\xB7\tIoU\tIoT";

io::GrayImage to_pgm(const GridMask& mask);
/// Pixels >= 128 count as selected.
GridMask from_pgm(const io::GrayImage& image);

}  // namespace stitch::cutout
