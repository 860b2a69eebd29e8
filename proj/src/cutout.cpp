// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/cutout.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "stitch/error.hpp"

namespace stitch::cutout {
namespace {

struct Counts {
  int intersection = 0;
  int pred = 0;
  int target = 0;
};

Counts count(const GridMask& pred, const GridMask& target) {
  if (pred.grid != target.grid) throw Error(ErrorCode::kShapeMismatch, "masks are on different grids");
  Counts c;
  for (std::size_t i = 0; i < pred.selected.size(); ++i) {
    c.pred += pred.selected[i];
    c.target += target.selected[i];
    c.intersection += pred.selected[i] && target.selected[i];
  }
  return c;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int GridMask::count() const { return static_cast<int>(std::count(selected.begin(), selected.end(), true)); }

std::vector<double> aggregate_text_attention(const model::AttentionRecord& record, const std::vector<bool>& pad_flags) {
  const auto& att = record.text_to_visual;
  if (static_cast<std::size_t>(att.rows()) != pad_flags.size()) {
    throw Error(ErrorCode::kShapeMismatch, "padding flags do not match attention rows");
  }
  std::vector<double> weights(static_cast<std::size_t>(att.cols()), 0.0);
  int rows = 0;
  for (Eigen::Index r = 0; r < att.rows(); ++r) {
    if (pad_flags[r]) continue;
    ++rows;
    for (Eigen::Index c = 0; c < att.cols(); ++c) weights[c] += att(r, c);
  }
  if (rows == 0) throw Error(ErrorCode::kNoTextTokens, "every text position is padding");
  for (auto& w : weights) w /= rows;
  return weights;
}

std::vector<bool> select_mask(std::span<const double> weights, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "eta must lie in (0, 1]");
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "attention weights must be non-negative");
  }
  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights[a] > weights[b]; });

  double total = 0.0;
  for (int i : order) total += weights[i];
  if (!(total > 0.0)) throw Error(ErrorCode::kAllZeroWeights, "attention weights sum to zero");

  const double threshold = eta * total;
  std::vector<bool> selected(weights.size(), false);
  double cumulative = 0.0;
  for (int i : order) {
    selected[i] = true;
    cumulative += weights[i];
    if (cumulative >= threshold) break;
  }
  return selected;
}

GridMask smooth_mask(const GridMask& mask, int kappa) {
  if (kappa < 1 || kappa % 2 == 0) throw Error(ErrorCode::kInvalidArgument, "kappa must be a positive odd integer");
  const int r = kappa / 2;
  const auto& g = mask.grid;
  GridMask out(g);
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      if (!mask.at(row, col)) continue;
      for (int y = std::max(0, row - r); y <= std::min(g.height - 1, row + r); ++y) {
        for (int x = std::max(0, col - r); x <= std::min(g.width - 1, col + r); ++x) {
          out.selected[static_cast<std::size_t>(y) * g.width + x] = true;
        }
      }
    }
  }
  return out;
}

CutoutMask make_cutout(std::span<const double> weights, model::TokenGrid grid, double eta, int kappa) {
  if (static_cast<int>(weights.size()) != grid.count()) {
    throw Error(ErrorCode::kShapeMismatch, "weight vector does not match token grid");
  }
  GridMask raw(grid);
  raw.selected = select_mask(weights, eta);
  return {smooth_mask(raw, kappa), eta, kappa};
}

CutoutMask restrict_to_box(const CutoutMask& mask, const region::TokenPartition& partition) {
  if (mask.mask.grid != partition.grid) throw Error(ErrorCode::kShapeMismatch, "mask and partition grids differ");
  CutoutMask out = mask;
  const auto& g = mask.mask.grid;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      if (!partition.inside(row, col)) out.mask.selected[static_cast<std::size_t>(row) * g.width + col] = false;
    }
  }
  if (out.mask.count() == 0) {
    throw Error(ErrorCode::kEmptyAfterRestriction, "cutout mask lies entirely outside the box");
  }
  return out;
}

double iou(const GridMask& pred, const GridMask& target) {
  const auto c = count(pred, target);
  const int uni = c.pred + c.target - c.intersection;
  return uni == 0 ? 1.0 : static_cast<double>(c.intersection) / uni;
}

double iot(const GridMask& pred, const GridMask& target) {
  const auto c = count(pred, target);
  if (c.target == 0) throw Error(ErrorCode::kEmptyTarget, "target mask is empty");
  return static_cast<double>(c.intersection) / c.target;
}

std::vector<HeadScore> rank_heads(const std::vector<ProbeSample>& corpus, std::span<const double> eta_grid,
                                  int kappa) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no probe samples");
  if (eta_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty eta grid");

  std::set<std::pair<int, int>> heads;
  for (const auto& r : corpus.front().records) heads.emplace(r.block_index, r.head_index);

  std::map<std::tuple<int, int, std::size_t>, std::pair<double, double>> sums;
  for (const auto& sample : corpus) {
    for (const auto& [block, head] : heads) {
      const auto it = std::find_if(sample.records.begin(), sample.records.end(), [&](const auto& r) {
        return r.block_index == block && r.head_index == head;
      });
      if (it == sample.records.end()) {
        throw Error(ErrorCode::kInvalidArgument, "probe sample lacks head (" + std::to_string(block) + ", " +
                                                     std::to_string(head) + ")");
      }
      const auto weights = aggregate_text_attention(*it, sample.pad_flags);
      for (std::size_t e = 0; e < eta_grid.size(); ++e) {
        const auto pred = make_cutout(weights, sample.reference.grid, eta_grid[e], kappa);
        auto& acc = sums[{block, head, e}];
        acc.first += iou(pred.mask, sample.reference);
        acc.second += iot(pred.mask, sample.reference);
      }
    }
  }

  std::vector<HeadScore> ranked;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [key, acc] : sums) {
    const auto& [block, head, e] = key;
    ranked.push_back({block, head, eta_grid[e], acc.first / n, acc.second / n});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const HeadScore& a, const HeadScore& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.iot != b.iot) return a.iot > b.iot;
    return std::tie(a.block_index, a.head_index, a.eta) < std::tie(b.block_index, b.head_index, b.eta);
  });
  return ranked;
}

std::string format_head_report(const std::vector<HeadScore>& ranked, std::size_t top, bool best_eta_only) {
  std::string out = std::string(kHeadReportHeader) + "\n";
  std::set<std::pair<int, int>> seen;
  std::size_t rows = 0;
  for (const auto& s : ranked) {
    if (top != 0 && rows >= top) break;
    if (best_eta_only && !seen.emplace(s.block_index, s.head_index).second) continue;
    out += std::to_string(s.block_index) + "\t" + std::to_string(s.head_index) + "\t" + fixed2(s.eta) + "\t" +
           fixed2(s.iou) + "\t" + fixed2(s.iot) + "\n";
    ++rows;
  }
  return out;
}

io::GrayImage to_pgm(const GridMask& mask) {
  io::GrayImage img;
  img.width = mask.grid.width;
  img.height = mask.grid.height;
  img.pixels.resize(mask.selected.size());
  for (std::size_t i = 0; i < mask.selected.size(); ++i) img.pixels[i] = mask.selected[i] ? 255 : 0;
  return img;
}

GridMask from_pgm(const io::GrayImage& image) {
  GridMask mask({image.height, image.width});
  for (std::size_t i = 0; i < image.pixels.size(); ++i) mask.selected[i] = image.pixels[i] >= 128;
  return mask;
}

}  // namespace stitch::cutout
