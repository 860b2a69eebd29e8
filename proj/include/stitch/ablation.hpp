// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stitch/pipeline.hpp"
#include "stitch/poseval.hpp"

namespace stitch::pipeline {

struct AblationRow {
  int s_steps = 0;
  std::size_t images = 0;   // satisfiable records run
  std::size_t passed = 0;
  std::size_t skipped = 0;  // records with no fallback layout
  double accuracy = 0.0;
  std::filesystem::path dir;
};

/// Stand-in detector for toy runs: one detection per object spanning the
/// tokens the composite took from that object's branch, in canvas units.
/// Objects that lost every token are not detected.
std::vector<poseval::Detection> provenance_detections(const poseval::PromptRecord& record,
                                                      const CompositeLatent& composite, model::TokenGrid grid,
                                                      int canvas);

/// For each S (in input order): fallback layout per record, run_stitch,
/// artifacts under <out>/S_<S>/<index>/, then evaluate_image on
/// provenance_detections. Every S must satisfy the StitchConfig invariants.
std::vector<AblationRow> run_ablation_sweep(const std::vector<poseval::PromptRecord>& records,
                                            std::span<const int> s_values, const StitchConfig& cfg,
                                            const model::ModelAdapter& model, const std::filesystem::path& out_dir);

/// "S, Images, Passed, Skipped, Accuracy" TSV.
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace stitch::pipeline
