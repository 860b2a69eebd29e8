// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stitch/cutout.hpp"
#include "stitch/layout.hpp"
#include "stitch/model.hpp"
#include "stitch/region_binding.hpp"

namespace stitch::pipeline {

struct StitchConfig {
  int s_steps = 10;
  int t_steps = 50;
  /// Operational cutout threshold.
  double eta = 0.95;
  /// Threshold at which the cutout head was chosen; recorded, not used.
  double select_eta = 0.75;
  int kappa = 5;
  int canvas = 32;
  model::HeadSelector cutout_head{0, 0};
  bool shared_noise = true;
  std::uint64_t seed = 0;
  /// Intersect each cutout mask with its object's scaled box.
  bool restrict_to_box = true;
  /// Branch workers: 0 = one per branch, 1 = sequential.
  int threads = 0;

  /// Throws kInvalidConfig unless 1 <= S < T, 0 < eta <= 1, kappa odd and
  /// positive, canvas >= 1, threads >= 0.
  void validate() const;

  /// Published per-model settings: "flux", "sd3.5", "qwen-image".
  static StitchConfig profile(std::string_view model_name);

  friend bool operator==(const StitchConfig&, const StitchConfig&) = default;
};

/// Composite latent: background step-S tokens with object tokens spliced in.
struct CompositeLatent {
  model::Matrix visual;
  std::vector<int> provenance;  // per visual token, 0 = background, k = object k
};

struct Overlay {
  const cutout::GridMask* mask = nullptr;
  const model::Matrix* tokens = nullptr;
};

/// Starts from the background and, for k = 1..K in order, copies branch k's
/// tokens at its mask positions. Later overlays win contested tokens.
CompositeLatent compose_latents(const model::Matrix& background, std::span<const Overlay> overlays);

struct BranchResult {
  std::string prompt;
  layout::BoundingBox box;
  model::Matrix initial;
  model::Matrix step_s;  // latents after S updates
  double tau_s = 0.0;
  std::optional<region::TokenPartition> partition;  // objects only
  std::optional<cutout::CutoutMask> cutout;         // objects only
  double seconds = 0.0;
};

struct StitchResult {
  std::vector<BranchResult> branches;  // [0] is the background
  CompositeLatent composite;
  model::Matrix final_latents;
  double branch_seconds = 0.0;
  double continuation_seconds = 0.0;
};

/// Runs the full two-phase generation. prompt overrides plan.full_prompt when
/// non-empty. Throws kBranchDivergence if branches end phase one at different
/// schedule positions.
StitchResult run_stitch(std::string_view prompt, const layout::LayoutPlan& plan, const model::ModelAdapter& model,
                        const StitchConfig& cfg);

// ---------------------------------------------------------------------------
// Run directory.

struct ArtifactEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::string model_name;
  std::string prompt_sha256;
  std::string layout_sha256;
  std::vector<ArtifactEntry> artifacts;
  double branch_seconds = 0.0;
  double continuation_seconds = 0.0;
};

nlohmann::ordered_json config_to_json(const StitchConfig& cfg);

/// Writes layout.json, branch_<k>/step_<S>.tnsr, masks/obj_<k>.pgm,
/// composite.tnsr, final.tnsr, preview.pgm and meta.json (written last).
RunManifest write_run(const std::filesystem::path& dir, std::string_view prompt, const layout::LayoutPlan& plan,
                      const model::ModelAdapter& model, const StitchConfig& cfg, const StitchResult& result);

RunManifest read_manifest(const std::filesystem::path& dir);

/// Empty when every listed artifact exists with a matching hash; otherwise
/// one message per problem.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Cutout head selection.

/// Runs "a photo of a <obj>" unmasked for S steps per object and records the
/// text-to-visual attention of every head at step S. References are read from
/// <references>/<obj>.pgm and must match the token grid; objects without a
/// reference file are skipped and listed in skipped (when given).
std::vector<cutout::ProbeSample> collect_probes(const model::ModelAdapter& model,
                                                std::span<const std::string> objects,
                                                const std::filesystem::path& references, const StitchConfig& cfg,
                                                std::vector<std::string>* skipped = nullptr);

std::string probe_prompt(const std::string& object);

}  // namespace stitch::pipeline
