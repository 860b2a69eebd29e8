// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/layout.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>

#include "stitch/error.hpp"
#include "stitch/io.hpp"

namespace stitch::layout {
namespace {

Point cell_center(GridCell c) { return {c.col + 0.5, c.row + 0.5}; }

bool aligned_relation_holds(GridCell a, Relation r, GridCell b) {
  const bool same_line = is_horizontal(r) ? a.row == b.row : a.col == b.col;
  return same_line && center_relation_holds(cell_center(a), r, cell_center(b));
}

bool dominant_relation_holds(GridCell a, Relation r, GridCell b) {
  return center_relation_holds(cell_center(a), r, cell_center(b));
}

using CellPredicate = std::function<bool(GridCell, Relation, GridCell)>;

// Depth-first over objects in order, cells in row-major order, so the first
// complete assignment found is the lexicographically smallest.
bool search(const SceneSpec& scene, const CellPredicate& holds, std::vector<GridCell>& assigned,
            std::array<bool, 4>& used) {
  const auto depth = static_cast<int>(assigned.size());
  if (depth == static_cast<int>(scene.objects.size())) return true;
  for (int cell = 0; cell < 4; ++cell) {
    if (used[cell]) continue;
    const GridCell candidate{cell / 2, cell % 2};
    bool ok = true;
    for (const auto& rel : scene.relations) {
      // Check each relation once both ends are placed, at the later one.
      const int later = std::max(rel.subject, rel.object);
      if (later != depth) continue;
      const GridCell a = rel.subject == depth ? candidate : assigned[rel.subject];
      const GridCell b = rel.object == depth ? candidate : assigned[rel.object];
      if (rel.subject == rel.object || !holds(a, rel.relation, b)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    used[cell] = true;
    assigned.push_back(candidate);
    if (search(scene, holds, assigned, used)) return true;
    assigned.pop_back();
    used[cell] = false;
  }
  return false;
}

void check_scene(const SceneSpec& scene) {
  if (scene.objects.size() > 4) {
    throw Error(ErrorCode::kUnsatisfiableScene, "a 2x2 grid holds at most 4 objects, got " +
                                                    std::to_string(scene.objects.size()));
  }
  const auto n = static_cast<int>(scene.objects.size());
  for (const auto& rel : scene.relations) {
    if (rel.subject < 0 || rel.subject >= n || rel.object < 0 || rel.object >= n) {
      throw Error(ErrorCode::kInvalidArgument, "scene relation references a missing object");
    }
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int coordinate(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw Error(ErrorCode::kMalformedLLMResponse, std::string("missing numeric \"") + key + "\"");
  }
  return static_cast<int>(std::lround(obj.at(key).get<double>()));
}

std::vector<LayoutObject> objects_from_array(const nlohmann::json& array, int canvas) {
  std::vector<LayoutObject> out;
  for (const auto& item : array) {
    if (!item.is_object() || !item.contains("prompt") || !item.at("prompt").is_string()) {
      throw Error(ErrorCode::kMalformedLLMResponse, "layout entry lacks a \"prompt\" string");
    }
    LayoutObject obj;
    obj.prompt = trim(item.at("prompt").get<std::string>());
    if (obj.prompt.empty()) throw Error(ErrorCode::kMalformedLLMResponse, "empty sub-prompt");
    auto clamp = [canvas](int v) { return std::clamp(v, 0, canvas - 1); };
    obj.box.x_min = clamp(coordinate(item, "x_min"));
    obj.box.y_min = clamp(coordinate(item, "y_min"));
    obj.box.x_max = clamp(coordinate(item, "x_max"));
    obj.box.y_max = clamp(coordinate(item, "y_max"));
    if (obj.box.x_min > obj.box.x_max) std::swap(obj.box.x_min, obj.box.x_max);
    if (obj.box.y_min > obj.box.y_max) std::swap(obj.box.y_min, obj.box.y_max);
    out.push_back(std::move(obj));
  }
  return out;
}

std::string first_word(std::string_view reply) {
  std::string word;
  for (char c : reply) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '\'') {
      word.push_back(c);
    } else if (!word.empty()) {
      break;
    }
  }
  return word;
}

}  // namespace

std::vector<GridCell> solve_grid_layout(const SceneSpec& scene) {
  check_scene(scene);
  for (const CellPredicate& holds : {CellPredicate(aligned_relation_holds), CellPredicate(dominant_relation_holds)}) {
    std::vector<GridCell> assigned;
    std::array<bool, 4> used{};
    if (search(scene, holds, assigned, used)) return assigned;
  }
  throw Error(ErrorCode::kUnsatisfiableScene, "no 2x2 placement satisfies every relation");
}

BoundingBox cell_box(GridCell cell, int canvas) {
  const int half = canvas / 2;
  BoundingBox box;
  box.x_min = cell.col == 0 ? 0 : half;
  box.x_max = cell.col == 0 ? half - 1 : canvas - 1;
  box.y_min = cell.row == 0 ? 0 : half;
  box.y_max = cell.row == 0 ? half - 1 : canvas - 1;
  return box;
}

LayoutPlan fallback_plan(const SceneSpec& scene, int canvas, std::string full_prompt) {
  if (canvas < 2) throw Error(ErrorCode::kInvalidArgument, "canvas must be at least 2");
  const auto cells = solve_grid_layout(scene);
  LayoutPlan plan;
  plan.full_prompt = std::move(full_prompt);
  plan.background_prompt = "background";
  plan.canvas_size = canvas;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    plan.objects.push_back({scene.objects[i].phrase(), cell_box(cells[i], canvas)});
  }
  return plan;
}

std::vector<Finding> validate_layout(const LayoutPlan& plan) {
  std::vector<Finding> findings;
  const auto& objs = plan.objects;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t j = i + 1; j < objs.size(); ++j) {
      if (objs[i].box.intersects(objs[j].box)) {
        findings.push_back({FindingKind::kOverlap,
                            "boxes of \"" + objs[i].prompt + "\" and \"" + objs[j].prompt + "\" overlap",
                            static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }
  const int w = plan.canvas_size;
  std::vector<bool> covered(static_cast<std::size_t>(w) * w, false);
  for (const auto& o : objs) {
    for (int y = std::max(0, o.box.y_min); y <= std::min(w - 1, o.box.y_max); ++y) {
      for (int x = std::max(0, o.box.x_min); x <= std::min(w - 1, o.box.x_max); ++x) covered[y * w + x] = true;
    }
  }
  const auto n_covered = std::count(covered.begin(), covered.end(), true);
  if (n_covered < static_cast<long>(covered.size())) {
    findings.push_back({FindingKind::kCoverage,
                        "object boxes cover " + std::to_string(n_covered) + " of " +
                            std::to_string(covered.size()) + " canvas cells",
                        -1, -1});
  }
  return findings;
}

std::string box_system_prompt(int canvas) {
  const std::string w = std::to_string(canvas);
  return "You have a canvas of size " + w + "x" + w +
         ". Decompose the given description \n"
         "into single objects. Do not merge multiple objects into one box. \n"
         "Fully cover the canvas with the object boxes. Avoid overlaps. \n"
         "Do not leave space for background. Write 3 sentence justification \n"
         "and then output just valid JSON in the format: \n"
         "[\n"
         "    {\"prompt\": \"<object with properties only mentioned in the \n"
         "    description>\", \"x_min\": , \"y_min\": , \"x_max\": , \"y_max\": }, \n"
         "    ...\n"
         "]";
}

std::string background_system_prompt() {
  return "Provide a simple fitting background description for this scene. \n"
         "The background must not mention any of the specific objects or \n"
         "elements from the prompt. The background must not mention any\n"
         "other specific objects or people. Return only ONE word of the \n"
         "background text, nothing else.  ";
}

std::string user_prompt(std::string_view full_prompt) { return "Description: " + std::string(full_prompt); }

std::vector<LayoutObject> parse_layout_reply(std::string_view reply, int canvas) {
  // Replies carry a free-text justification before the array; try every
  // '[' ... ']' span, earliest start and widest extent first.
  for (std::size_t start = reply.find('['); start != std::string_view::npos; start = reply.find('[', start + 1)) {
    for (std::size_t end = reply.rfind(']'); end != std::string_view::npos && end > start;
         end = end == 0 ? std::string_view::npos : reply.rfind(']', end - 1)) {
      auto parsed = nlohmann::json::parse(reply.substr(start, end - start + 1), nullptr, false);
      if (!parsed.is_discarded() && parsed.is_array()) return objects_from_array(parsed, canvas);
    }
  }
  throw Error(ErrorCode::kMalformedLLMResponse, "no JSON array in reply");
}

LayoutPlan plan_layout(std::string_view prompt, int canvas, LayoutProvider& provider) {
  if (canvas < 2) throw Error(ErrorCode::kInvalidArgument, "canvas must be at least 2");
  const ChatRequest box_request{box_system_prompt(canvas), user_prompt(prompt)};
  LayoutPlan plan;
  plan.full_prompt = std::string(prompt);
  plan.canvas_size = canvas;
  for (int attempt = 0;; ++attempt) {
    try {
      plan.objects = parse_layout_reply(provider.complete(box_request), canvas);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedLLMResponse || attempt >= 1) throw;
    }
  }
  if (plan.objects.empty()) throw Error(ErrorCode::kEmptyLayout, "provider returned no objects");

  const auto background = first_word(provider.complete({background_system_prompt(), user_prompt(prompt)}));
  plan.background_prompt = background.empty() ? "background" : background;
  return plan;
}

FixtureLayoutProvider::FixtureLayoutProvider(std::vector<std::string> responses)
    : responses_(responses.begin(), responses.end()) {}

std::string FixtureLayoutProvider::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  if (responses_.empty()) throw Error(ErrorCode::kProviderUnavailable, "fixture provider exhausted");
  auto reply = std::move(responses_.front());
  responses_.pop_front();
  return reply;
}

std::vector<ChatRequest> FixtureLayoutProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::string FallbackLayoutProvider::complete(const ChatRequest& request) {
  if (request.system == background_system_prompt()) return "background";
  constexpr std::string_view kPrefix = "Description: ";
  std::string_view description = request.user;
  if (description.starts_with(kPrefix)) description.remove_prefix(kPrefix.size());
  const auto scene = parse_scene(description);
  if (scene.objects.empty()) return "No objects could be identified. []";
  const auto plan = fallback_plan(scene, canvas_, std::string(description));
  nlohmann::ordered_json array = layout_to_json(plan)["objects"];
  return "Objects were placed on a 2x2 grid. Each relation is satisfied by cell centers. "
         "Unused cells are left empty.\n" +
         array.dump(4);
}

nlohmann::ordered_json layout_to_json(const LayoutPlan& plan) {
  nlohmann::ordered_json j;
  j["prompt"] = plan.full_prompt;
  j["canvas"] = plan.canvas_size;
  j["background"] = plan.background_prompt;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : plan.objects) {
    nlohmann::ordered_json e;
    e["prompt"] = o.prompt;
    e["x_min"] = o.box.x_min;
    e["y_min"] = o.box.y_min;
    e["x_max"] = o.box.x_max;
    e["y_max"] = o.box.y_max;
    objects.push_back(std::move(e));
  }
  j["objects"] = std::move(objects);
  return j;
}

LayoutPlan layout_from_json(const nlohmann::json& j) {
  LayoutPlan plan;
  if (j.is_array()) {
    plan.background_prompt = "background";
    plan.objects = objects_from_array(j, plan.canvas_size);
    return plan;
  }
  if (!j.is_object() || !j.contains("objects")) throw Error(ErrorCode::kFormat, "layout file lacks \"objects\"");
  plan.canvas_size = j.value("canvas", 32);
  if (plan.canvas_size < 2) throw Error(ErrorCode::kFormat, "layout canvas must be at least 2");
  plan.full_prompt = j.value("prompt", std::string{});
  plan.background_prompt = j.value("background", std::string("background"));
  for (const auto& item : j.at("objects")) {
    LayoutObject o;
    o.prompt = item.at("prompt").get<std::string>();
    o.box = {item.at("x_min").get<int>(), item.at("y_min").get<int>(), item.at("x_max").get<int>(),
             item.at("y_max").get<int>()};
    if (!o.box.is_valid(plan.canvas_size)) {
      throw Error(ErrorCode::kFormat, "box for \"" + o.prompt + "\" is outside the canvas");
    }
    plan.objects.push_back(std::move(o));
  }
  return plan;
}

void write_layout(const std::filesystem::path& path, const LayoutPlan& plan) {
  io::write_file_atomic(path, layout_to_json(plan).dump(2) + "\n");
}

LayoutPlan read_layout(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kFormat, "layout file is not valid JSON: " + path.string());
  try {
    return layout_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("layout file: ") + e.what());
  }
}

}  // namespace stitch::layout
