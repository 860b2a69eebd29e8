// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stitch/model.hpp"

namespace stitch::model {

struct ModelConfig {
  TokenGrid latent_grid{8, 8};
  int latent_channels = 4;
  int embed_dim = 32;
  int num_blocks = 4;
  int num_heads = 4;
  int text_len_max = 16;
  int vocab_size = 512;
  int steps_default = 50;
  std::uint64_t seed = 0;
  /// Zero the attention-output and MLP-output projections so every block is
  /// the residual identity.
  bool zero_output_projections = false;

  void validate() const;
};

/// Hidden states of one block: visual rows and text rows, both N x d.
struct BlockState {
  Matrix visual;
  Matrix text;
};

/// Small randomly initialised joint-attention transformer (MMDiT layout):
/// separate per-modality projections, joint masked attention, adaLN timestep
/// modulation with gates, QK RMS-norm, GELU MLP. Weights come from the seed;
/// the model is untrained and exists to exercise the pipeline end to end.
class ToyMMDiT final : public ModelAdapter {
 public:
  explicit ToyMMDiT(ModelConfig config);

  std::string name() const override { return "toy-mmdit"; }
  TokenGrid grid() const override { return config_.latent_grid; }
  int latent_channels() const override { return config_.latent_channels; }
  int text_length() const override { return config_.text_len_max; }
  int num_blocks() const override { return config_.num_blocks; }
  int num_heads() const override { return config_.num_heads; }
  const ModelConfig& config() const { return config_; }

  /// Lowercased alphanumeric words hashed into [2, vocab), followed by an end
  /// token (id 1) and padding (id 0) up to text_len_max.
  TokenizedPrompt tokenize(std::string_view prompt) const override;

  VelocityOutput predict_velocity(const Matrix& latents, double tau, const TokenizedPrompt& prompt,
                                  const AttentionMask* mask, std::span<const HeadSelector> capture) const override;

  /// Input embeddings E_v(latents) and E_t(prompt).
  BlockState embed(const Matrix& latents, const TokenizedPrompt& prompt) const;
  RowVector time_embedding(double tau) const;

  /// One transformer block, updating state in place. Returns the full N x N
  /// attention weights of each head in capture_heads.
  std::vector<Matrix> forward_block(BlockState& state, const RowVector& temb, int block_index,
                                    const AttentionMask* mask, const std::vector<int>& capture_heads = {}) const;

 private:
  struct StreamWeights {
    Matrix modulation;  // d x 6d
    RowVector modulation_bias;
    Matrix q, k, v, o;  // d x d
    Matrix mlp_in;      // d x 2d
    Matrix mlp_out;     // 2d x d
  };
  struct BlockWeights {
    StreamWeights visual;
    StreamWeights text;
  };

  ModelConfig config_;
  Matrix visual_in_;   // C x d
  Matrix visual_pos_;  // N_v x d
  Matrix token_embed_; // vocab x d
  Matrix text_pos_;    // N_t x d
  Matrix time_mlp1_, time_mlp2_;
  Matrix final_modulation_;  // d x 2d
  Matrix visual_out_;        // d x C
  std::vector<BlockWeights> blocks_;
};

/// Grayscale rendering of latents (channel mean, min-max normalised), each
/// token drawn as a scale x scale square.
io::GrayImage render_preview(const Matrix& latents, TokenGrid grid, int scale = 8);

}  // namespace stitch::model
