// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/toy_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "stitch/error.hpp"
#include "stitch/rng.hpp"

namespace stitch::model {
namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double scale) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal() * scale;
  }
  return m;
}

// Sinusoidal features of a scalar position, half sine half cosine.
RowVector sinusoid(double position, int dim) {
  RowVector out(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half));
    out(i) = std::sin(position * freq);
    out(half + i) = std::cos(position * freq);
  }
  if (dim % 2 == 1) out(dim - 1) = 0.0;
  return out;
}

Matrix layer_norm(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    out.row(i) = (x.row(i).array() - mean) / std::sqrt(var + 1e-6);
  }
  return out;
}

void rms_norm_heads(Matrix& x, int num_heads) {
  const int head_dim = static_cast<int>(x.cols()) / num_heads;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int h = 0; h < num_heads; ++h) {
      auto seg = x.row(i).segment(h * head_dim, head_dim);
      seg /= std::sqrt(seg.squaredNorm() / head_dim + 1e-6);
    }
  }
}

Matrix silu(const Matrix& x) { return x.array() / (1.0 + (-x.array()).exp()); }

Matrix gelu(const Matrix& x) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  return 0.5 * x.array() * (1.0 + (c * (x.array() + 0.044715 * x.array().cube())).tanh());
}

Matrix modulate(const Matrix& x, const RowVector& shift, const RowVector& scale) {
  Matrix out = layer_norm(x);
  out.array().rowwise() *= (1.0 + scale.array());
  out.rowwise() += shift;
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (embed_dim <= 0 || num_heads <= 0 || embed_dim % num_heads != 0) {
    throw Error(ErrorCode::kInvalidArgument, "embed_dim must be a positive multiple of num_heads");
  }
  if (latent_grid.height < 2 || latent_grid.width < 2) {
    throw Error(ErrorCode::kInvalidArgument, "latent grid must be at least 2x2");
  }
  if (latent_channels < 1 || num_blocks < 1 || text_len_max < 2 || vocab_size < 3 || steps_default < 1) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
}

ToyMMDiT::ToyMMDiT(ModelConfig config) : config_(config) {
  config_.validate();
  const int d = config_.embed_dim;
  const int c = config_.latent_channels;
  const auto seed = config_.seed;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  auto rng = Rng::substream(seed, "weights/embed");
  visual_in_ = random_matrix(rng, c, d, 1.0 / std::sqrt(static_cast<double>(c)));
  token_embed_ = random_matrix(rng, config_.vocab_size, d, 1.0);
  time_mlp1_ = random_matrix(rng, d, d, inv_sqrt_d);
  time_mlp2_ = random_matrix(rng, d, d, inv_sqrt_d);
  final_modulation_ = random_matrix(rng, d, 2 * d, 0.5 * inv_sqrt_d);
  visual_out_ = random_matrix(rng, d, c, inv_sqrt_d);

  const auto& g = config_.latent_grid;
  visual_pos_.resize(g.count(), d);
  for (int r = 0; r < g.height; ++r) {
    for (int col = 0; col < g.width; ++col) {
      // Row features in the first half, column features in the second.
      RowVector pe(d);
      pe << sinusoid(r, d / 2), sinusoid(col, d - d / 2);
      visual_pos_.row(r * g.width + col) = pe;
    }
  }
  text_pos_.resize(config_.text_len_max, d);
  for (int i = 0; i < config_.text_len_max; ++i) text_pos_.row(i) = sinusoid(i, d);

  blocks_.resize(config_.num_blocks);
  for (int b = 0; b < config_.num_blocks; ++b) {
    for (auto* stream : {&blocks_[b].visual, &blocks_[b].text}) {
      const bool is_visual = stream == &blocks_[b].visual;
      auto srng = Rng::substream(seed, "weights/block/" + std::to_string(b) + (is_visual ? "/visual" : "/text"));
      stream->modulation = random_matrix(srng, d, 6 * d, 0.5 * inv_sqrt_d);
      stream->modulation_bias = random_matrix(srng, 1, 6 * d, 0.1);
      stream->q = random_matrix(srng, d, d, inv_sqrt_d);
      stream->k = random_matrix(srng, d, d, inv_sqrt_d);
      stream->v = random_matrix(srng, d, d, inv_sqrt_d);
      stream->o = random_matrix(srng, d, d, inv_sqrt_d);
      stream->mlp_in = random_matrix(srng, d, 2 * d, inv_sqrt_d);
      stream->mlp_out = random_matrix(srng, 2 * d, d, 1.0 / std::sqrt(2.0 * d));
      if (config_.zero_output_projections) {
        stream->o.setZero();
        stream->mlp_out.setZero();
      }
    }
  }
}

TokenizedPrompt ToyMMDiT::tokenize(std::string_view prompt) const {
  TokenizedPrompt t;
  const int limit = config_.text_len_max;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (t.size() < limit - 1) {
      t.token_ids.push_back(2 + static_cast<int>(fnv1a64(word) % static_cast<std::uint64_t>(config_.vocab_size - 2)));
      t.pad_flags.push_back(false);
    }
    word.clear();
  };
  for (char ch : prompt) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      word.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  t.token_ids.push_back(1);
  t.pad_flags.push_back(false);
  while (t.size() < limit) {
    t.token_ids.push_back(0);
    t.pad_flags.push_back(true);
  }
  return t;
}

BlockState ToyMMDiT::embed(const Matrix& latents, const TokenizedPrompt& prompt) const {
  const int nv = config_.latent_grid.count();
  if (latents.rows() != nv || latents.cols() != config_.latent_channels) {
    throw Error(ErrorCode::kShapeMismatch, "latents must be N_v x channels");
  }
  if (prompt.size() != config_.text_len_max) throw Error(ErrorCode::kShapeMismatch, "prompt length mismatch");
  BlockState s;
  s.visual = latents * visual_in_ + visual_pos_;
  s.text.resize(config_.text_len_max, config_.embed_dim);
  for (int i = 0; i < config_.text_len_max; ++i) {
    const int id = prompt.token_ids[i];
    if (id < 0 || id >= config_.vocab_size) throw Error(ErrorCode::kInvalidArgument, "token id out of range");
    s.text.row(i) = token_embed_.row(id) + text_pos_.row(i);
  }
  return s;
}

RowVector ToyMMDiT::time_embedding(double tau) const {
  const RowVector base = sinusoid(tau * 1000.0, config_.embed_dim);
  return silu(base * time_mlp1_) * time_mlp2_;
}

std::vector<Matrix> ToyMMDiT::forward_block(BlockState& state, const RowVector& temb, int block_index,
                                            const AttentionMask* mask, const std::vector<int>& capture_heads) const {
  const auto& w = blocks_.at(block_index);
  const int d = config_.embed_dim;
  const int nv = static_cast<int>(state.visual.rows());
  const int nt = static_cast<int>(state.text.rows());
  const Matrix cond = silu(temb);

  struct Modulation {
    RowVector shift1, scale1, gate1, shift2, scale2, gate2;
  };
  auto modulation = [&](const StreamWeights& sw) {
    const RowVector m = cond * sw.modulation + sw.modulation_bias;
    return Modulation{m.segment(0, d),     m.segment(d, d),     m.segment(2 * d, d),
                      m.segment(3 * d, d), m.segment(4 * d, d), m.segment(5 * d, d)};
  };
  const auto mv = modulation(w.visual);
  const auto mt = modulation(w.text);

  // Pre-attention transform, then joint Q/K/V over [visual; text].
  const Matrix hv = modulate(state.visual, mv.shift1, mv.scale1);
  const Matrix ht = modulate(state.text, mt.shift1, mt.scale1);
  Matrix q(nv + nt, d), k(nv + nt, d), v(nv + nt, d);
  q << hv * w.visual.q, ht * w.text.q;
  k << hv * w.visual.k, ht * w.text.k;
  v << hv * w.visual.v, ht * w.text.v;
  rms_norm_heads(q, config_.num_heads);
  rms_norm_heads(k, config_.num_heads);

  auto attn = masked_attention(q, k, v, config_.num_heads, mask, capture_heads);

  // Post-attention: gated residual attention output, then gated residual MLP.
  state.visual.array() += (attn.output.topRows(nv) * w.visual.o).array().rowwise() * mv.gate1.array();
  state.text.array() += (attn.output.bottomRows(nt) * w.text.o).array().rowwise() * mt.gate1.array();
  const Matrix mlp_v = gelu(modulate(state.visual, mv.shift2, mv.scale2) * w.visual.mlp_in) * w.visual.mlp_out;
  const Matrix mlp_t = gelu(modulate(state.text, mt.shift2, mt.scale2) * w.text.mlp_in) * w.text.mlp_out;
  state.visual.array() += mlp_v.array().rowwise() * mv.gate2.array();
  state.text.array() += mlp_t.array().rowwise() * mt.gate2.array();
  return std::move(attn.weights);
}

VelocityOutput ToyMMDiT::predict_velocity(const Matrix& latents, double tau, const TokenizedPrompt& prompt,
                                          const AttentionMask* mask, std::span<const HeadSelector> capture) const {
  for (const auto& c : capture) {
    if (c.block < 0 || c.block >= config_.num_blocks || c.head < 0 || c.head >= config_.num_heads) {
      throw Error(ErrorCode::kInvalidArgument, "capture head (" + std::to_string(c.block) + ", " +
                                                   std::to_string(c.head) + ") does not exist");
    }
  }
  BlockState state = embed(latents, prompt);
  const RowVector temb = time_embedding(tau);
  const int nv = config_.latent_grid.count();
  VelocityOutput out;
  for (int b = 0; b < config_.num_blocks; ++b) {
    std::vector<int> heads;
    for (const auto& c : capture) {
      if (c.block == b) heads.push_back(c.head);
    }
    auto weights = forward_block(state, temb, b, mask, heads);
    for (std::size_t i = 0; i < heads.size(); ++i) {
      out.records.push_back({b, heads[i], 0, weights[i].block(nv, 0, config_.text_len_max, nv)});
    }
  }
  const auto& fm = final_modulation_;
  const RowVector m = silu(temb) * fm;
  const int d = config_.embed_dim;
  const Matrix h = modulate(state.visual, m.segment(0, d), m.segment(d, d));
  out.velocity = h * visual_out_;
  return out;
}

io::GrayImage render_preview(const Matrix& latents, TokenGrid grid, int scale) {
  if (latents.rows() != grid.count()) throw Error(ErrorCode::kShapeMismatch, "latents do not match grid");
  const Eigen::VectorXd mean = latents.rowwise().mean();
  const double lo = mean.minCoeff();
  const double hi = mean.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  io::GrayImage img;
  img.width = grid.width * scale;
  img.height = grid.height * scale;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double v = (mean((y / scale) * grid.width + x / scale) - lo) / span;
      img.pixels[static_cast<std::size_t>(y) * img.width + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return img;
}

}  // namespace stitch::model
