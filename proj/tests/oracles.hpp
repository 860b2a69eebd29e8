// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used only by tests. Each one is written from the
// rule it checks, without calling the library routine under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "stitch/geometry.hpp"
#include "stitch/layout.hpp"
#include "stitch/model.hpp"

namespace stitch::testing {

/// Softmax of one head's scaled scores in long double; blocked entries are
/// excluded from the normaliser and returned as exactly 0.
inline std::vector<std::vector<long double>> softmax_oracle(const model::Matrix& q, const model::Matrix& k,
                                                            int head, int head_dim,
                                                            const model::AttentionMask* mask) {
  const int n = static_cast<int>(q.rows());
  std::vector<std::vector<long double>> w(n, std::vector<long double>(n, 0.0L));
  const long double scale = 1.0L / std::sqrt(static_cast<long double>(head_dim));
  for (int i = 0; i < n; ++i) {
    std::vector<long double> s(n, 0.0L);
    long double mx = -std::numeric_limits<long double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (mask && mask->blocked(i, j)) continue;
      long double dot = 0.0L;
      for (int c = 0; c < head_dim; ++c) {
        const int col = head * head_dim + c;
        dot += static_cast<long double>(q(i, col)) * static_cast<long double>(k(j, col));
      }
      s[j] = dot * scale;
      mx = std::max(mx, s[j]);
    }
    long double z = 0.0L;
    for (int j = 0; j < n; ++j) {
      if (mask && mask->blocked(i, j)) continue;
      w[i][j] = std::exp(s[j] - mx);
      z += w[i][j];
    }
    for (int j = 0; j < n; ++j) w[i][j] /= z;
  }
  return w;
}

/// Shortest prefix of the descending order (ties: lower index first) whose
/// sum, recomputed from scratch for every candidate length, reaches eta * total.
inline std::vector<bool> prefix_oracle(const std::vector<double>& w, double eta) {
  std::vector<int> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return w[a] != w[b] ? w[a] > w[b] : a < b; });
  double total = 0.0;
  for (int i : order) total += w[i];
  for (std::size_t len = 1; len <= order.size(); ++len) {
    double sum = 0.0;
    for (std::size_t t = 0; t < len; ++t) sum += w[order[t]];
    if (sum >= eta * total) {
      std::vector<bool> sel(w.size(), false);
      for (std::size_t t = 0; t < len; ++t) sel[order[t]] = true;
      return sel;
    }
  }
  return std::vector<bool>(w.size(), true);
}

/// Window maximum: out(r, c) = max over |dr|, |dc| <= kappa / 2 of in(r + dr, c + dc).
inline std::vector<bool> window_max_oracle(const std::vector<bool>& in, int h, int w, int kappa) {
  std::vector<bool> out(in.size(), false);
  const int r = kappa / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool any = false;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w && in[yy * w + xx]) any = true;
        }
      }
      out[y * w + x] = any;
    }
  }
  return out;
}

/// Cell-center relation on the 2x2 grid from raw coordinates.
inline bool cell_relation_oracle(layout::GridCell a, Relation r, layout::GridCell b, bool axis_aligned) {
  const int dx = b.col - a.col, dy = b.row - a.row;
  switch (r) {
    case Relation::kLeftOf: return dx > 0 && (axis_aligned ? dy == 0 : std::abs(dx) >= std::abs(dy));
    case Relation::kRightOf: return dx < 0 && (axis_aligned ? dy == 0 : std::abs(dx) >= std::abs(dy));
    case Relation::kAbove: return dy > 0 && (axis_aligned ? dx == 0 : std::abs(dy) >= std::abs(dx));
    case Relation::kBelow: return dy < 0 && (axis_aligned ? dx == 0 : std::abs(dy) >= std::abs(dx));
  }
  return false;
}

/// Enumerates every injective assignment of objects to the 4 cells in
/// lexicographic order and returns the first that satisfies all relations,
/// trying axis-aligned placements before the dominant-axis rule.
inline std::optional<std::vector<layout::GridCell>> solver_oracle(const layout::SceneSpec& scene) {
  const int n = static_cast<int>(scene.objects.size());
  for (bool aligned : {true, false}) {
    const int total = 1 << (2 * n);  // 4^n
    for (int code = 0; code < total; ++code) {
      std::vector<int> cells(n);
      int c = code;
      for (int i = n - 1; i >= 0; --i) {
        cells[i] = c % 4;
        c /= 4;
      }
      std::vector<int> sorted = cells;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      bool ok = true;
      for (const auto& r : scene.relations) {
        const layout::GridCell a{cells[r.subject] / 2, cells[r.subject] % 2};
        const layout::GridCell b{cells[r.object] / 2, cells[r.object] % 2};
        ok = ok && cell_relation_oracle(a, r.relation, b, aligned);
      }
      if (!ok) continue;
      std::vector<layout::GridCell> out;
      for (int v : cells) out.push_back({v / 2, v % 2});
      return out;
    }
  }
  return std::nullopt;
}

inline model::Matrix random_matrix(std::mt19937_64& gen, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  model::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = d(gen);
  }
  return m;
}

}  // namespace stitch::testing
