// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stitch/io.hpp"

namespace stitch::model {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct TokenGrid {
  int height = 0;
  int width = 0;

  int count() const { return height * width; }
  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;
};

/// Text token ids plus a padding flag per position (true = padding).
struct TokenizedPrompt {
  std::vector<int> token_ids;
  std::vector<bool> pad_flags;

  int size() const { return static_cast<int>(token_ids.size()); }
  int non_padding() const;
};

struct HeadSelector {
  int block = 0;
  int head = 0;

  friend bool operator==(const HeadSelector&, const HeadSelector&) = default;
};

/// Additive attention mask over the joint sequence with entries restricted to
/// {0, -inf}. Stored as a dense flag matrix; blocked(q, k) means -inf.
///
/// Joint sequence order is visual tokens [0, N_v) followed by text tokens
/// [N_v, N_v + N_t).
class AttentionMask {
 public:
  explicit AttentionMask(int size) : size_(size), flags_(static_cast<std::size_t>(size) * size, 0) {}

  int size() const { return size_; }
  bool blocked(int query, int key) const { return flags_[index(query, key)] != 0; }
  void block(int query, int key) { flags_[index(query, key)] = 1; }
  double additive(int query, int key) const;
  std::size_t masked_count() const;
  bool is_zero() const { return masked_count() == 0; }

  /// 2-D tensor of 0/1 flags, 1 = masked.
  io::Tensor to_flag_tensor() const;
  static AttentionMask from_flag_tensor(const io::Tensor& tensor);

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t index(int q, int k) const { return static_cast<std::size_t>(q) * size_ + k; }

  int size_;
  std::vector<std::uint8_t> flags_;
};

struct AttentionResult {
  Matrix output;                // N x d, heads concatenated
  std::vector<Matrix> weights;  // N x N post-softmax weights, one per captured head
};

/// Multi-head scaled dot-product attention with an additive {0, -inf} mask.
/// Masked entries get exactly zero weight. Throws kFullyMaskedRow when some
/// query has every key masked. Weights of the heads listed in capture_heads
/// are returned in that order.
AttentionResult masked_attention(const Matrix& queries, const Matrix& keys, const Matrix& values, int num_heads,
                                 const AttentionMask* mask = nullptr, const std::vector<int>& capture_heads = {});

/// Text-query to visual-key attention of one head at one sampling step.
/// Rows are all text positions (padding included); columns are visual tokens.
struct AttentionRecord {
  int block_index = 0;
  int head_index = 0;
  int step_index = 0;
  Matrix text_to_visual;
};

struct VelocityOutput {
  Matrix velocity;  // same shape as the visual latents
  std::vector<AttentionRecord> records;  // block order, then selector order within a block
};

/// The surface the Stitch pipeline needs from a joint-attention flow model:
/// token partition sizes, an additive mask per evaluation, per-head
/// text-to-visual attention capture, and latents that callers may replace
/// between steps.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;

  virtual std::string name() const = 0;
  virtual TokenGrid grid() const = 0;
  virtual int latent_channels() const = 0;
  virtual int text_length() const = 0;
  virtual int num_blocks() const = 0;
  virtual int num_heads() const = 0;

  virtual TokenizedPrompt tokenize(std::string_view prompt) const = 0;

  /// Must be safe to call concurrently.
  virtual VelocityOutput predict_velocity(const Matrix& latents, double tau, const TokenizedPrompt& prompt,
                                          const AttentionMask* mask, std::span<const HeadSelector> capture) const = 0;

  virtual std::vector<double> schedule(int steps) const;

  int visual_length() const { return grid().count(); }
  int sequence_length() const { return visual_length() + text_length(); }
};

// ---------------------------------------------------------------------------
// Sampling.

using Schedule = std::vector<double>;

/// tau_i = i / steps for i = 0..steps.
Schedule uniform_schedule(int steps);

/// Throws kInvalidArgument unless the schedule starts at 0, ends at 1 and is
/// strictly increasing with at least one step.
void validate_schedule(const Schedule& schedule);

struct LatentState {
  Matrix visual;
  double tau = 0.0;
  int step = 0;  // number of Euler updates applied
};

using VelocityFn = std::function<Matrix(const Matrix& x, double tau, int step)>;

/// Explicit Euler over schedule steps [first_step, last_step):
///   x_{i+1} = x_i + (tau_{i+1} - tau_i) * v(x_i, tau_i)
/// When trajectory is given, the state after every update is appended.
Matrix euler_integrate(Matrix x, const Schedule& schedule, int first_step, int last_step, const VelocityFn& velocity,
                       std::vector<LatentState>* trajectory = nullptr);

using MaskProvider = std::function<const AttentionMask*(int step)>;

struct CaptureOptions {
  int after_step = 0;              // capture once this many updates are applied
  std::vector<HeadSelector> heads;
  const AttentionMask* mask = nullptr;
};

struct SampleOptions {
  int first_step = 0;
  int last_step = -1;  // -1 = end of schedule
  MaskProvider masks;  // null or returning nullptr = unmasked
  std::optional<CaptureOptions> capture;
};

struct Trajectory {
  std::vector<LatentState> states;  // states.front() is the starting state
  std::vector<AttentionRecord> records;

  const LatentState& final() const { return states.back(); }
  const LatentState& at_step(int step) const;
};

/// Model-driven Euler sampling. When capture is set, the model is evaluated
/// once more on the state reached after capture->after_step updates and the
/// requested heads are recorded (with step_index = after_step).
Trajectory sample(const ModelAdapter& model, Matrix initial, const TokenizedPrompt& prompt, const Schedule& schedule,
                  const SampleOptions& options = {});

/// Standard-normal latents drawn from the named substream of seed.
Matrix gaussian_latents(int rows, int cols, std::uint64_t seed, std::string_view stream);

io::Tensor to_tensor(const Matrix& m);
Matrix from_tensor(const io::Tensor& t);

}  // namespace stitch::model
