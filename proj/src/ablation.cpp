// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/ablation.hpp"

#include <algorithm>
#include <climits>
#include <cstdio>

#include "stitch/error.hpp"
#include "stitch/io.hpp"

namespace stitch::pipeline {

std::vector<poseval::Detection> provenance_detections(const poseval::PromptRecord& record,
                                                      const CompositeLatent& composite, model::TokenGrid grid,
                                                      int canvas) {
  if (static_cast<int>(composite.provenance.size()) != grid.count()) {
    throw Error(ErrorCode::kShapeMismatch, "provenance map is not on the token grid");
  }
  const double sx = static_cast<double>(canvas) / grid.width;
  const double sy = static_cast<double>(canvas) / grid.height;
  std::vector<poseval::Detection> out;
  for (std::size_t k = 1; k <= record.objects.size(); ++k) {
    int r0 = INT_MAX, r1 = -1, c0 = INT_MAX, c1 = -1;
    for (int i = 0; i < grid.count(); ++i) {
      if (composite.provenance[i] != static_cast<int>(k)) continue;
      const int r = i / grid.width;
      const int c = i % grid.width;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
    if (r1 < 0) continue;
    const auto& o = record.objects[k - 1];
    out.push_back({o.name, c0 * sx, r0 * sy, (c1 + 1) * sx, (r1 + 1) * sy, 1.0, o.attribute});
  }
  return out;
}

std::vector<AblationRow> run_ablation_sweep(const std::vector<poseval::PromptRecord>& records,
                                            std::span<const int> s_values, const StitchConfig& cfg,
                                            const model::ModelAdapter& model, const std::filesystem::path& out_dir) {
  for (int s : s_values) {
    StitchConfig c = cfg;
    c.s_steps = s;
    c.validate();
  }
  std::vector<AblationRow> rows;
  for (int s : s_values) {
    StitchConfig c = cfg;
    c.s_steps = s;
    AblationRow row;
    row.s_steps = s;
    row.dir = out_dir / ("S_" + std::to_string(s));
    for (const auto& record : records) {
      layout::LayoutPlan plan;
      try {
        plan = layout::fallback_plan(poseval::scene_for(record), c.canvas, record.prompt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnsatisfiableScene) throw;
        ++row.skipped;
        continue;
      }
      const auto result = run_stitch(record.prompt, plan, model, c);
      write_run(row.dir / std::to_string(record.index), record.prompt, plan, model, c, result);
      const auto detections = provenance_detections(record, result.composite, model.grid(), plan.canvas_size);
      ++row.images;
      if (poseval::evaluate_image(detections, record).pass) ++row.passed;
    }
    row.accuracy = row.images == 0 ? 0.0 : static_cast<double>(row.passed) / static_cast<double>(row.images);
    rows.push_back(row);
  }
  io::write_file_atomic(out_dir / "summary.tsv", format_ablation_table(rows));
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::string out = "S\tImages\tPassed\tSkipped\tAccuracy\n";
  for (const auto& r : rows) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.2f", r.accuracy);
    out += std::to_string(r.s_steps) + "\t" + std::to_string(r.images) + "\t" + std::to_string(r.passed) + "\t" +
           std::to_string(r.skipped) + "\t" + acc + "\n";
  }
  return out;
}

}  // namespace stitch::pipeline
