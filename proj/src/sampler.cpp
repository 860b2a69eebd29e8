// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/error.hpp"
#include "stitch/model.hpp"
#include "stitch/rng.hpp"

namespace stitch::model {

int TokenizedPrompt::non_padding() const {
  int n = 0;
  for (bool pad : pad_flags) n += pad ? 0 : 1;
  return n;
}

std::vector<double> ModelAdapter::schedule(int steps) const { return uniform_schedule(steps); }

Schedule uniform_schedule(int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one sampling step");
  Schedule s(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) s[i] = static_cast<double>(i) / steps;
  return s;
}

void validate_schedule(const Schedule& schedule) {
  if (schedule.size() < 2) throw Error(ErrorCode::kInvalidArgument, "schedule needs at least one step");
  if (schedule.front() != 0.0 || schedule.back() != 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "schedule must run from 0 to 1");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) throw Error(ErrorCode::kInvalidArgument, "schedule must increase");
  }
}

Matrix euler_integrate(Matrix x, const Schedule& schedule, int first_step, int last_step, const VelocityFn& velocity,
                       std::vector<LatentState>* trajectory) {
  const int steps = static_cast<int>(schedule.size()) - 1;
  if (first_step < 0 || last_step > steps || first_step > last_step) {
    throw Error(ErrorCode::kInvalidArgument, "step range outside the schedule");
  }
  for (int i = first_step; i < last_step; ++i) {
    const double dt = schedule[i + 1] - schedule[i];
    const Matrix v = velocity(x, schedule[i], i);
    if (v.rows() != x.rows() || v.cols() != x.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "velocity shape differs from state shape");
    }
    x += dt * v;
    if (trajectory != nullptr) trajectory->push_back({x, schedule[i + 1], i + 1});
  }
  return x;
}

const LatentState& Trajectory::at_step(int step) const {
  for (const auto& s : states) {
    if (s.step == step) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "trajectory has no state for step " + std::to_string(step));
}

Trajectory sample(const ModelAdapter& model, Matrix initial, const TokenizedPrompt& prompt, const Schedule& schedule,
                  const SampleOptions& options) {
  validate_schedule(schedule);
  const int steps = static_cast<int>(schedule.size()) - 1;
  const int last = options.last_step < 0 ? steps : options.last_step;
  if (options.capture && (options.capture->after_step < options.first_step || options.capture->after_step > last)) {
    throw Error(ErrorCode::kInvalidArgument, "capture step outside the sampled range");
  }

  Trajectory traj;
  traj.states.push_back({initial, schedule[options.first_step], options.first_step});

  auto mask_at = [&](int step) -> const AttentionMask* { return options.masks ? options.masks(step) : nullptr; };
  auto capture_at = [&](const Matrix& x, int step) {
    const auto& cap = *options.capture;
    auto out = model.predict_velocity(x, schedule[step], prompt, cap.mask, cap.heads);
    for (auto& r : out.records) {
      r.step_index = step;
      traj.records.push_back(std::move(r));
    }
  };

  VelocityFn velocity = [&](const Matrix& x, double tau, int step) {
    if (options.capture && options.capture->after_step == step) capture_at(x, step);
    return model.predict_velocity(x, tau, prompt, mask_at(step), {}).velocity;
  };
  Matrix final = euler_integrate(std::move(initial), schedule, options.first_step, last, velocity, &traj.states);
  if (options.capture && options.capture->after_step == last) capture_at(final, last);
  return traj;
}

Matrix gaussian_latents(int rows, int cols, std::uint64_t seed, std::string_view stream) {
  auto rng = Rng::substream(seed, stream);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

io::Tensor to_tensor(const Matrix& m) {
  io::Tensor t;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.data.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) t.data[i] = static_cast<float>(m.data()[i]);
  return t;
}

Matrix from_tensor(const io::Tensor& t) {
  if (t.dims.size() != 2) throw Error(ErrorCode::kShapeMismatch, "expected a rank-2 tensor");
  Matrix m(t.dims[0], t.dims[1]);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = t.data[i];
  return m;
}

}  // namespace stitch::model
