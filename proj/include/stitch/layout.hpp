// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stitch/geometry.hpp"

namespace stitch::layout {

/// Inclusive canvas-cell rectangle. x indexes columns, y indexes rows.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  Point center() const { return {(x_min + x_max + 1) / 2.0, (y_min + y_max + 1) / 2.0}; }
  bool contains(int x, int y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  bool intersects(const BoundingBox& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }
  bool is_valid(int canvas) const {
    return x_min <= x_max && y_min <= y_max && x_min >= 0 && y_min >= 0 && x_max < canvas && y_max < canvas;
  }
  static BoundingBox full(int canvas) { return {0, 0, canvas - 1, canvas - 1}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct LayoutObject {
  std::string prompt;
  BoundingBox box;

  friend bool operator==(const LayoutObject&, const LayoutObject&) = default;
};

/// Background prompt plus K (sub-prompt, box) pairs on a canvas x canvas grid.
/// The background box is implicit and always spans the canvas.
struct LayoutPlan {
  std::string full_prompt;
  std::string background_prompt;
  std::vector<LayoutObject> objects;
  int canvas_size = 32;

  friend bool operator==(const LayoutPlan&, const LayoutPlan&) = default;
};

struct SceneObject {
  std::string name;
  std::optional<std::string> attribute;

  std::string phrase() const { return attribute ? *attribute + " " + name : name; }
};

struct SceneRelation {
  int subject = 0;
  Relation relation = Relation::kLeftOf;
  int object = 0;
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  std::vector<SceneRelation> relations;
};

struct GridCell {
  int row = 0;
  int col = 0;

  int index() const { return row * 2 + col; }
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Assigns each object one cell of a 2x2 grid (at most 4 objects).
///
/// Candidates are scanned in lexicographic order of (cell of object 0, cell
/// of object 1, ...) with cells numbered row-major. Axis-aligned placements
/// (every relation holds with zero cross-axis offset) are preferred; when
/// none exists the first placement satisfying the dominant-axis center rule
/// is returned. Throws kUnsatisfiableScene when neither tier has a solution.
std::vector<GridCell> solve_grid_layout(const SceneSpec& scene);

/// Deterministic offline planner: solve_grid_layout, then one quadrant-sized
/// box per object. Background prompt is "background".
LayoutPlan fallback_plan(const SceneSpec& scene, int canvas, std::string full_prompt = {});

BoundingBox cell_box(GridCell cell, int canvas);

enum class FindingKind { kOverlap, kCoverage };

struct Finding {
  FindingKind kind;
  std::string message;
  int first = -1;
  int second = -1;
};

std::vector<Finding> validate_layout(const LayoutPlan& plan);

// ---------------------------------------------------------------------------
// LLM-backed planning.

struct ChatRequest {
  std::string system;
  std::string user;
};

/// Chat-style completion service. Implementations must be safe to call from
/// several threads at once.
class LayoutProvider {
 public:
  virtual ~LayoutProvider() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

std::string box_system_prompt(int canvas);
std::string background_system_prompt();
std::string user_prompt(std::string_view full_prompt);

/// Answers both system prompts offline by parsing the description into a
/// SceneSpec and running fallback_plan.
class FallbackLayoutProvider final : public LayoutProvider {
 public:
  explicit FallbackLayoutProvider(int canvas) : canvas_(canvas) {}
  std::string complete(const ChatRequest& request) override;
  std::string name() const override { return "fallback"; }

 private:
  int canvas_;
};

/// Replays recorded responses in order and keeps every request it saw.
class FixtureLayoutProvider final : public LayoutProvider {
 public:
  explicit FixtureLayoutProvider(std::vector<std::string> responses);
  std::string complete(const ChatRequest& request) override;
  std::string name() const override { return "fixture"; }
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> responses_;
  std::vector<ChatRequest> requests_;
};

inline constexpr const char* kApiKeyEnv = "STITCH_LLM_API_KEY";

struct LlmSettings {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-5";
  std::string api_key_env = kApiKeyEnv;  // fixed; the config accepts no other name
  int timeout_seconds = 120;
};

/// OpenAI-compatible POST {base_url}/chat/completions. A fresh connection is
/// opened per request, so concurrent calls are safe.
class HttpLayoutProvider final : public LayoutProvider {
 public:
  explicit HttpLayoutProvider(LlmSettings settings) : settings_(std::move(settings)) {}
  std::string complete(const ChatRequest& request) override;
  std::string name() const override { return "llm:" + settings_.model; }

 private:
  LlmSettings settings_;
};

/// Decomposes a prompt through the provider: one request with the box system
/// prompt (retried once when the reply holds no parseable JSON array) and one
/// with the background system prompt. Out-of-range coordinates are clamped.
LayoutPlan plan_layout(std::string_view prompt, int canvas, LayoutProvider& provider);

/// Extracts and validates the JSON object array from an LLM reply that may
/// carry free text around it.
std::vector<LayoutObject> parse_layout_reply(std::string_view reply, int canvas);

/// Best-effort parse of relation prompts ("a photo of a dog left of a cat",
/// "The cat is above the bird.", negated and same/other-side phrasings).
SceneSpec parse_scene(std::string_view prompt);

// Layout file: {"prompt", "canvas", "background", "objects": [appendix schema]}.
nlohmann::ordered_json layout_to_json(const LayoutPlan& plan);
LayoutPlan layout_from_json(const nlohmann::json& j);
void write_layout(const std::filesystem::path& path, const LayoutPlan& plan);
LayoutPlan read_layout(const std::filesystem::path& path);

}  // namespace stitch::layout
