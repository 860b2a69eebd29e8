// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "stitch/error.hpp"
#include "stitch/io.hpp"
#include "stitch/toy_model.hpp"
#include "stitch/version.hpp"
#include "stitch/vocab.hpp"

namespace stitch::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, message);
}

std::string noise_stream(const StitchConfig& cfg, int branch) {
  return cfg.shared_noise ? "noise/shared" : "noise/branch/" + std::to_string(branch);
}

BranchResult run_branch(int k, const layout::LayoutPlan& plan, const model::ModelAdapter& model,
                        const StitchConfig& cfg, const model::Schedule& schedule) {
  const auto start = Clock::now();
  BranchResult out;
  out.prompt = k == 0 ? plan.background_prompt : plan.objects[k - 1].prompt;
  out.box = k == 0 ? layout::BoundingBox::full(plan.canvas_size) : plan.objects[k - 1].box;

  const auto tokens = model.tokenize(out.prompt);
  out.initial = model::gaussian_latents(model.visual_length(), model.latent_channels(), cfg.seed, noise_stream(cfg, k));

  model::SampleOptions options;
  options.last_step = cfg.s_steps;
  std::optional<model::AttentionMask> mask;
  if (k > 0) {
    out.partition = region::partition_tokens(model.grid(), out.box, plan.canvas_size, tokens.pad_flags);
    mask = region::build_rb_mask(*out.partition);
    const model::AttentionMask* m = &*mask;
    options.masks = [m](int) { return m; };
    options.capture = model::CaptureOptions{cfg.s_steps, {cfg.cutout_head}, m};
  }
  auto traj = model::sample(model, out.initial, tokens, schedule, options);
  out.step_s = traj.final().visual;
  out.tau_s = traj.final().tau;

  if (k > 0) {
    const auto weights = cutout::aggregate_text_attention(traj.records.at(0), tokens.pad_flags);
    auto cut = cutout::make_cutout(weights, model.grid(), cfg.eta, cfg.kappa);
    if (cfg.restrict_to_box) cut = cutout::restrict_to_box(cut, *out.partition);
    out.cutout = std::move(cut);
  }
  out.seconds = seconds_since(start);
  return out;
}

std::vector<BranchResult> run_branches(const layout::LayoutPlan& plan, const model::ModelAdapter& model,
                                       const StitchConfig& cfg, const model::Schedule& schedule) {
  const int count = static_cast<int>(plan.objects.size()) + 1;
  std::vector<BranchResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](int k) {
    try {
      results[k] = run_branch(k, plan, model, cfg, schedule);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const int workers = cfg.threads == 0 ? count : std::min(cfg.threads, count);
  if (workers <= 1) {
    for (int k = 0; k < count; ++k) work(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int k = next++; k < count; k = next++) work(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace

void StitchConfig::validate() const {
  require(s_steps >= 1 && s_steps < t_steps,
          "need 1 <= s_steps < t_steps, got s_steps=" + std::to_string(s_steps) +
              " t_steps=" + std::to_string(t_steps));
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1], got " + std::to_string(eta));
  require(select_eta > 0.0 && select_eta <= 1.0, "select_eta must lie in (0, 1]");
  require(kappa >= 1 && kappa % 2 == 1, "kappa must be a positive odd integer, got " + std::to_string(kappa));
  require(canvas >= 1, "canvas must be positive");
  require(cutout_head.block >= 0 && cutout_head.head >= 0, "cutout head indices must be non-negative");
  require(threads >= 0, "threads must be non-negative");
}

StitchConfig StitchConfig::profile(std::string_view model_name) {
  StitchConfig cfg;
  if (model_name == "flux") {
    cfg.cutout_head = {14, 20};
  } else if (model_name == "sd3.5") {
    cfg.cutout_head = {14, 34};
  } else if (model_name == "qwen-image") {
    cfg.s_steps = 6;
    cfg.eta = 0.90;
    cfg.select_eta = 0.90;
    cfg.cutout_head = {25, 1};
  } else {
    throw Error(ErrorCode::kInvalidConfig, "no profile for model \"" + std::string(model_name) + "\"");
  }
  return cfg;
}

CompositeLatent compose_latents(const model::Matrix& background, std::span<const Overlay> overlays) {
  CompositeLatent c{background, std::vector<int>(static_cast<std::size_t>(background.rows()), 0)};
  for (std::size_t k = 0; k < overlays.size(); ++k) {
    const auto& o = overlays[k];
    if (o.tokens->rows() != background.rows() || o.tokens->cols() != background.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "overlay " + std::to_string(k + 1) + " tokens differ in shape");
    }
    if (static_cast<Eigen::Index>(o.mask->selected.size()) != background.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "overlay " + std::to_string(k + 1) + " mask is not on the token grid");
    }
    for (Eigen::Index i = 0; i < background.rows(); ++i) {
      if (!o.mask->selected[i]) continue;
      c.visual.row(i) = o.tokens->row(i);
      c.provenance[i] = static_cast<int>(k) + 1;
    }
  }
  return c;
}

StitchResult run_stitch(std::string_view prompt, const layout::LayoutPlan& plan, const model::ModelAdapter& model,
                        const StitchConfig& cfg) {
  cfg.validate();
  if (cfg.cutout_head.block >= model.num_blocks() || cfg.cutout_head.head >= model.num_heads()) {
    throw Error(ErrorCode::kInvalidConfig, "cutout head (" + std::to_string(cfg.cutout_head.block) + ", " +
                                               std::to_string(cfg.cutout_head.head) + ") is not in model " +
                                               model.name());
  }
  for (const auto& o : plan.objects) {
    if (!o.box.is_valid(plan.canvas_size)) {
      throw Error(ErrorCode::kInvalidArgument, "box of \"" + o.prompt + "\" lies outside the canvas");
    }
  }
  const std::string full_prompt = prompt.empty() ? plan.full_prompt : std::string(prompt);
  const auto schedule = model.schedule(cfg.t_steps);
  model::validate_schedule(schedule);
  if (static_cast<int>(schedule.size()) != cfg.t_steps + 1) {
    throw Error(ErrorCode::kBranchDivergence, "model schedule does not have t_steps steps");
  }

  StitchResult result;
  auto start = Clock::now();
  result.branches = run_branches(plan, model, cfg, schedule);
  result.branch_seconds = seconds_since(start);
  for (const auto& b : result.branches) {
    if (b.tau_s != result.branches.front().tau_s) {
      throw Error(ErrorCode::kBranchDivergence, "branches stopped at different schedule positions");
    }
  }

  std::vector<Overlay> overlays;
  for (std::size_t k = 1; k < result.branches.size(); ++k) {
    overlays.push_back({&result.branches[k].cutout->mask, &result.branches[k].step_s});
  }
  result.composite = compose_latents(result.branches.front().step_s, overlays);

  start = Clock::now();
  model::SampleOptions options;
  options.first_step = cfg.s_steps;
  const auto traj = model::sample(model, result.composite.visual, model.tokenize(full_prompt), schedule, options);
  result.final_latents = traj.final().visual;
  result.continuation_seconds = seconds_since(start);
  return result;
}

// ---------------------------------------------------------------------------
// Run directory.

nlohmann::ordered_json config_to_json(const StitchConfig& cfg) {
  nlohmann::ordered_json j;
  j["s_steps"] = cfg.s_steps;
  j["t_steps"] = cfg.t_steps;
  j["eta"] = cfg.eta;
  j["select_eta"] = cfg.select_eta;
  j["kappa"] = cfg.kappa;
  j["canvas"] = cfg.canvas;
  j["cutout_block"] = cfg.cutout_head.block;
  j["cutout_head"] = cfg.cutout_head.head;
  j["shared_noise"] = cfg.shared_noise;
  j["seed"] = cfg.seed;
  j["restrict_to_box"] = cfg.restrict_to_box;
  return j;
}

RunManifest write_run(const std::filesystem::path& dir, std::string_view prompt, const layout::LayoutPlan& plan,
                      const model::ModelAdapter& model, const StitchConfig& cfg, const StitchResult& result) {
  namespace fs = std::filesystem;
  RunManifest m;
  m.config = config_to_json(cfg);
  m.model_name = model.name();
  m.branch_seconds = result.branch_seconds;
  m.continuation_seconds = result.continuation_seconds;

  auto put = [&](const std::string& rel, const std::string& bytes) {
    io::write_file_atomic(dir / rel, bytes);
    m.artifacts.push_back({rel, io::sha256_hex(bytes)});
  };

  const std::string layout_bytes = layout::layout_to_json(plan).dump(2) + "\n";
  put("layout.json", layout_bytes);
  m.layout_sha256 = io::sha256_hex(layout_bytes);
  m.prompt_sha256 = io::sha256_hex(prompt.empty() ? plan.full_prompt : std::string(prompt));

  const std::string step = "step_" + std::to_string(cfg.s_steps) + ".tnsr";
  for (std::size_t k = 0; k < result.branches.size(); ++k) {
    const auto& b = result.branches[k];
    put("branch_" + std::to_string(k) + "/" + step, io::encode_tensor(model::to_tensor(b.step_s)));
    if (b.cutout) put("masks/obj_" + std::to_string(k) + ".pgm", io::encode_pgm(cutout::to_pgm(b.cutout->mask)));
  }
  put("composite.tnsr", io::encode_tensor(model::to_tensor(result.composite.visual)));
  put("final.tnsr", io::encode_tensor(model::to_tensor(result.final_latents)));
  put("preview.pgm", io::encode_pgm(model::render_preview(result.final_latents, model.grid())));

  nlohmann::ordered_json meta;
  meta["config"] = m.config;
  meta["versions"] = {{"stitch", kVersion}, {"model", m.model_name}};
  meta["inputs"] = {{"prompt_sha256", m.prompt_sha256}, {"layout_sha256", m.layout_sha256}};
  auto artifacts = nlohmann::ordered_json::array();
  for (const auto& a : m.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}});
  meta["artifacts"] = artifacts;
  meta["timings"] = {{"branches_seconds", m.branch_seconds}, {"continuation_seconds", m.continuation_seconds}};
  io::write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  return m;
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_file(dir / "meta.json"));
    RunManifest m;
    m.config = meta.at("config");
    m.model_name = meta.at("versions").at("model").get<std::string>();
    m.prompt_sha256 = meta.at("inputs").at("prompt_sha256").get<std::string>();
    m.layout_sha256 = meta.at("inputs").at("layout_sha256").get<std::string>();
    for (const auto& a : meta.at("artifacts")) {
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
    }
    m.branch_seconds = meta.at("timings").at("branches_seconds").get<double>();
    m.continuation_seconds = meta.at("timings").at("continuation_seconds").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, (dir / "meta.json").string() + ": " + e.what());
  }
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  const auto m = read_manifest(dir);
  for (const auto& a : m.artifacts) {
    const auto path = dir / a.path;
    if (!std::filesystem::exists(path)) {
      problems.push_back(a.path + ": missing");
    } else if (io::sha256_file(path) != a.sha256) {
      problems.push_back(a.path + ": hash mismatch");
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Cutout head selection.

std::string probe_prompt(const std::string& object) { return "a photo of " + with_article(object); }

std::vector<cutout::ProbeSample> collect_probes(const model::ModelAdapter& model,
                                                std::span<const std::string> objects,
                                                const std::filesystem::path& references, const StitchConfig& cfg,
                                                std::vector<std::string>* skipped) {
  cfg.validate();
  const auto schedule = model.schedule(cfg.t_steps);
  std::vector<model::HeadSelector> heads;
  for (int b = 0; b < model.num_blocks(); ++b) {
    for (int h = 0; h < model.num_heads(); ++h) heads.push_back({b, h});
  }

  std::vector<cutout::ProbeSample> corpus;
  for (const auto& object : objects) {
    const auto ref_path = references / (object + ".pgm");
    if (!std::filesystem::exists(ref_path)) {
      if (skipped != nullptr) skipped->push_back(object);
      continue;
    }
    cutout::ProbeSample sample;
    sample.reference = cutout::from_pgm(io::read_pgm(ref_path));
    if (sample.reference.grid != model.grid()) {
      throw Error(ErrorCode::kShapeMismatch, "reference mask for \"" + object + "\" is not " +
                                                 std::to_string(model.grid().height) + "x" +
                                                 std::to_string(model.grid().width));
    }
    const auto tokens = model.tokenize(probe_prompt(object));
    model::SampleOptions options;
    options.last_step = cfg.s_steps;
    options.capture = model::CaptureOptions{cfg.s_steps, heads, nullptr};
    auto traj = model::sample(
        model, model::gaussian_latents(model.visual_length(), model.latent_channels(), cfg.seed, "probe/" + object),
        tokens, schedule, options);
    sample.records = std::move(traj.records);
    sample.pad_flags = tokens.pad_flags;
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace stitch::pipeline
