// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stitch/cutout.hpp"
#include "stitch/error.hpp"

namespace stitch::cutout {
namespace {

using model::TokenGrid;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected stitch::Error";
  return ErrorCode::kFormat;
}

GridMask block_mask(TokenGrid g, int r0, int r1, int c0, int c1) {
  GridMask m(g);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) m.selected[r * g.width + c] = true;
  }
  return m;
}

TEST(Aggregate, SingleRowAndMean) {
  model::AttentionRecord rec;
  rec.text_to_visual.resize(3, 2);
  rec.text_to_visual << 0.2, 0.8, 0.6, 0.4, 0.9, 0.1;
  EXPECT_EQ(aggregate_text_attention(rec, {false, true, true}), (std::vector<double>{0.2, 0.8}));
  const auto w = aggregate_text_attention(rec, {false, false, true});
  EXPECT_NEAR(w[0], 0.4, 1e-15);
  EXPECT_NEAR(w[1], 0.6, 1e-15);
  EXPECT_EQ(code_of([&] { aggregate_text_attention(rec, {true, true, true}); }), ErrorCode::kNoTextTokens);
}

TEST(Select, SpecFixtures) {
  const std::vector<double> w = {0.5, 0.3, 0.15, 0.05};
  EXPECT_EQ(select_mask(w, 0.75), (std::vector<bool>{true, true, false, false}));
  EXPECT_EQ(select_mask(w, 0.95), (std::vector<bool>{true, true, true, false}));
  EXPECT_EQ(select_mask(w, 1.0), (std::vector<bool>{true, true, true, true}));
  const std::vector<double> z = {0.0, 0.7, 0.0, 0.3};
  EXPECT_EQ(select_mask(z, 1.0), (std::vector<bool>{false, true, false, true}));
}

TEST(Select, TiesPreferLowerIndex) {
  EXPECT_EQ(select_mask(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.5),
            (std::vector<bool>{true, true, false, false}));
}

TEST(Select, TinyEtaKeepsOneToken) {
  const auto s = select_mask(std::vector<double>{0.1, 0.9}, 1e-9);
  EXPECT_EQ(s, (std::vector<bool>{false, true}));
}

TEST(Select, Errors) {
  EXPECT_EQ(code_of([] { select_mask(std::vector<double>{0, 0}, 0.5); }), ErrorCode::kAllZeroWeights);
  EXPECT_EQ(code_of([] { select_mask(std::vector<double>{1, 0}, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { select_mask(std::vector<double>{1, 0}, 1.5); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { select_mask(std::vector<double>{1, -0.1}, 0.5); }), ErrorCode::kInvalidArgument);
}

TEST(Select, MinimalPrefixMonotoneScaleInvariant) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> w(1 + gen() % 64);
    for (auto& x : w) x = gen() % 5 == 0 ? 0.0 : u(gen);
    w[gen() % w.size()] = 0.5;
    std::vector<bool> prev(w.size(), false);
    for (double eta : kDefaultEtaGrid) {
      const auto s = select_mask(w, eta);
      EXPECT_EQ(s, testing::prefix_oracle(w, eta));
      for (std::size_t i = 0; i < w.size(); ++i) EXPECT_TRUE(!prev[i] || s[i]);
      prev = s;
      std::vector<double> scaled = w;
      for (auto& x : scaled) x *= 4.0;  // power of two keeps every sum exact
      EXPECT_EQ(select_mask(scaled, eta), s);
    }
  }
}

TEST(Smooth, PointDilation) {
  GridMask m({5, 5});
  m.selected[2 * 5 + 2] = true;
  EXPECT_EQ(smooth_mask(m, 3), block_mask({5, 5}, 1, 3, 1, 3));
  EXPECT_EQ(smooth_mask(m, 1), m);
}

TEST(Smooth, CornerClipping) {
  GridMask m({4, 4});
  m.selected[0] = true;
  EXPECT_EQ(smooth_mask(m, 5), block_mask({4, 4}, 0, 2, 0, 2));
}

TEST(Smooth, EvenKappaRejected) {
  GridMask m({4, 4});
  m.selected[0] = true;
  EXPECT_THROW(smooth_mask(m, 2), Error);
  EXPECT_THROW(smooth_mask(m, 0), Error);
}

TEST(Smooth, MatchesWindowMaxAndIsMonotone) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const TokenGrid g{1 + static_cast<int>(gen() % 10), 1 + static_cast<int>(gen() % 10)};
    GridMask m(g);
    for (std::size_t i = 0; i < m.selected.size(); ++i) m.selected[i] = gen() % 7 == 0;
    GridMask prev = m;
    for (int kappa : {1, 3, 5, 7}) {
      const auto s = smooth_mask(m, kappa);
      EXPECT_EQ(s.selected, testing::window_max_oracle(m.selected, g.height, g.width, kappa));
      for (std::size_t i = 0; i < s.selected.size(); ++i) EXPECT_TRUE(!prev.selected[i] || s.selected[i]);
      prev = s;
    }
  }
}

TEST(MakeCutout, SelectsThenSmooths) {
  std::vector<double> w(16, 0.0);
  w[5] = 1.0;
  const auto c = make_cutout(w, {4, 4}, 0.95, 3);
  EXPECT_EQ(c.mask, block_mask({4, 4}, 0, 2, 0, 2));
  EXPECT_EQ(c.eta_used, 0.95);
  EXPECT_EQ(c.kappa_used, 3);
  EXPECT_THROW(make_cutout(std::vector<double>(15, 1.0), {4, 4}, 0.95, 3), Error);
}

TEST(Restrict, InsideOutsideHalf) {
  const auto part = region::partition_tokens({4, 4}, {0, 0, 15, 31}, 32, {false});
  CutoutMask inside{block_mask({4, 4}, 0, 3, 0, 1), 0.95, 1};
  EXPECT_EQ(restrict_to_box(inside, part).mask, inside.mask);
  CutoutMask outside{block_mask({4, 4}, 0, 3, 2, 3), 0.95, 1};
  EXPECT_EQ(code_of([&] { restrict_to_box(outside, part); }), ErrorCode::kEmptyAfterRestriction);
  CutoutMask straddle{block_mask({4, 4}, 1, 2, 0, 3), 0.95, 1};
  EXPECT_EQ(restrict_to_box(straddle, part).mask, block_mask({4, 4}, 1, 2, 0, 1));
}

TEST(Metrics, Fixtures) {
  const auto target = block_mask({4, 4}, 0, 1, 0, 1);
  EXPECT_EQ(iou(target, target), 1.0);
  EXPECT_EQ(iot(target, target), 1.0);
  const auto pred = block_mask({4, 4}, 0, 1, 0, 3);
  EXPECT_EQ(pred.count(), 8);
  EXPECT_EQ(iou(pred, target), 0.5);
  EXPECT_EQ(iot(pred, target), 1.0);
  const auto disjoint = block_mask({4, 4}, 2, 3, 2, 3);
  EXPECT_EQ(iou(disjoint, target), 0.0);
  EXPECT_EQ(iot(disjoint, target), 0.0);
  EXPECT_EQ(code_of([&] { iot(pred, GridMask({4, 4})); }), ErrorCode::kEmptyTarget);
}

TEST(Metrics, IouNeverExceedsIot) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 1000; ++trial) {
    GridMask a({6, 6}), b({6, 6});
    for (int i = 0; i < 36; ++i) {
      a.selected[i] = gen() % 2;
      b.selected[i] = gen() % 3 == 0;
    }
    b.selected[gen() % 36] = true;
    EXPECT_LE(iou(a, b), iot(a, b));
  }
}

model::AttentionRecord record_from_mask(const GridMask& m, int block, int head, int text_rows) {
  model::AttentionRecord r;
  r.block_index = block;
  r.head_index = head;
  r.text_to_visual = model::Matrix::Zero(text_rows, m.grid.count());
  const double v = 1.0 / m.count();
  for (int i = 0; i < m.grid.count(); ++i) {
    if (m.selected[i]) r.text_to_visual.col(i).setConstant(v);
  }
  return r;
}

TEST(RankHeads, PlantedHeadRanksFirst) {
  std::mt19937_64 gen(7);
  std::vector<ProbeSample> corpus;
  for (int s = 0; s < 4; ++s) {
    ProbeSample p;
    p.pad_flags = {false, false, true};
    const int r0 = static_cast<int>(gen() % 3), c0 = static_cast<int>(gen() % 3);
    p.reference = block_mask({6, 6}, r0, r0 + 2, c0, c0 + 2);
    for (int b = 0; b < 2; ++b) {
      for (int h = 0; h < 3; ++h) {
        if (b == 1 && h == 2) {
          p.records.push_back(record_from_mask(p.reference, b, h, 3));
        } else {
          model::AttentionRecord r;
          r.block_index = b;
          r.head_index = h;
          r.text_to_visual = (testing::random_matrix(gen, 3, 36).array().abs()).matrix();
          p.records.push_back(r);
        }
      }
    }
    corpus.push_back(p);
  }
  const auto ranked = rank_heads(corpus, kDefaultEtaGrid);
  ASSERT_EQ(ranked.size(), 6u * kDefaultEtaGrid.size());
  EXPECT_EQ(ranked[0].block_index, 1);
  EXPECT_EQ(ranked[0].head_index, 2);
  EXPECT_EQ(ranked[0].iou, 1.0);
  EXPECT_GE(ranked[0].eta, 0.9);  // uniform weight over 9 tokens needs eta > 8/9
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].iou, ranked[i].iou);
  for (const auto& s : ranked) EXPECT_LE(s.iou, s.iot + 1e-12);
  EXPECT_EQ(code_of([] { rank_heads({}, kDefaultEtaGrid); }), ErrorCode::kEmptyCorpus);
}

TEST(RankHeads, MatchesBruteForceRecount) {
  // Three hand-built samples, one head each, masks given directly through
  // one-hot attention so the pre-smoothing selection is known.
  const TokenGrid g{3, 3};
  struct Case {
    std::vector<int> pred;
    std::vector<int> target;
  };
  const std::vector<Case> cases = {{{0, 1, 2}, {0, 1}}, {{4}, {4, 5, 7, 8}}, {{0, 8}, {3}}};
  std::vector<ProbeSample> corpus;
  double sum_iou = 0, sum_iot = 0;
  for (const auto& c : cases) {
    ProbeSample p;
    p.pad_flags = {false};
    p.reference = GridMask(g);
    for (int t : c.target) p.reference.selected[t] = true;
    GridMask pm(g);
    for (int t : c.pred) pm.selected[t] = true;
    p.records.push_back(record_from_mask(pm, 0, 0, 1));
    corpus.push_back(p);
    int inter = 0, uni = 0;
    for (int i = 0; i < 9; ++i) {
      inter += pm.selected[i] && p.reference.selected[i];
      uni += pm.selected[i] || p.reference.selected[i];
    }
    sum_iou += static_cast<double>(inter) / uni;
    sum_iot += static_cast<double>(inter) / static_cast<double>(c.target.size());
  }
  const std::vector<double> etas = {1.0};
  const auto ranked = rank_heads(corpus, etas);
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_NEAR(ranked[0].iou, sum_iou / 3, 1e-12);
  EXPECT_NEAR(ranked[0].iot, sum_iot / 3, 1e-12);
}

TEST(HeadReport, HeaderAndRowFormat) {
  const std::vector<HeadScore> ranked = {{14, 20, 0.75, 0.62, 0.92}, {14, 20, 0.80, 0.60, 0.93}, {3, 1, 0.9, 0.5, 0.8}};
  const auto text = format_head_report(ranked, 5, true);
  EXPECT_EQ(text, "Block\tHead\t\xCE\xB7\tIoU\tIoT\n14\t20\t0.75\t0.62\t0.92\n3\t1\t0.90\t0.50\t0.80\n");
  EXPECT_EQ(std::string(kHeadReportHeader), "Block\tHead\tη\tIoU\tIoT");
  const auto all = format_head_report(ranked, 0, false);
  EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 4);
}

TEST(MaskFile, PgmRoundTrip) {
  const auto m = block_mask({3, 5}, 0, 1, 1, 3);
  const auto img = to_pgm(m);
  EXPECT_EQ(img.width, 5);
  EXPECT_EQ(img.height, 3);
  EXPECT_EQ(img.pixels[1], 255);
  EXPECT_EQ(img.pixels[0], 0);
  EXPECT_EQ(from_pgm(img), m);
}

}  // namespace
}  // namespace stitch::cutout
