// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stitch/geometry.hpp"
#include "stitch/layout.hpp"
#include "stitch/vocab.hpp"

namespace stitch::poseval {

enum class Task { kTwoObj, kThreeObj, kFourObj, kPAB, kNeg, kRel };

/// Report column order.
inline constexpr std::array<Task, 6> kAllTasks = {Task::kTwoObj, Task::kThreeObj, Task::kFourObj,
                                                  Task::kNeg,    Task::kRel,      Task::kPAB};

/// File identifier: two_obj, three_obj, four_obj, pab, neg, rel.
std::string_view task_id(Task task);
/// Report column label: "2 Obj", "3 Obj", "4 Obj", "Neg", "Rel", "PAB".
std::string_view task_label(Task task);
/// Accepts identifiers, labels and short aliases ("2obj", "negative", ...).
/// Throws kUnknownTask.
Task parse_task(std::string_view text);

enum class RelVariant { kSame, kOpposite };

struct ObjectSpec {
  std::string name;
  std::optional<std::string> attribute;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

struct StatedRelation {
  int subject = 0;
  Relation relation = Relation::kLeftOf;
  int object = 0;

  friend bool operator==(const StatedRelation&, const StatedRelation&) = default;
};

/// One benchmark prompt with machine-readable ground truth.
///
/// Relation layout per task:
///   TwoObj, PAB:  (0, r, 1)
///   ThreeObj:     (0, r01, 1), (1, r12, 2)
///   FourObj:      (0, r01, 1), (1, r12, 2), (2, r23, 3), (3, r30, 0)
///   Neg:          (0, r, 1) where r is the relation that must NOT hold
///   Rel:          (0, r, 1), (2, r', 1) with r' = r (same) or inverse(r)
struct PromptRecord {
  Task task = Task::kTwoObj;
  std::string prompt;
  std::vector<ObjectSpec> objects;
  std::vector<StatedRelation> relations;
  std::optional<RelVariant> rel_variant;
  std::uint64_t seed = 0;
  int index = 0;

  /// Throws kInvalidArgument when the record breaks its task's shape.
  void validate() const;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

/// Deterministic in (task, n, seed, vocab). Every record draws from the
/// substream "poseval/<task_id>/<index>"; the Rel same/opposite split is a
/// shuffle of the substream "poseval/rel/variants". Throws kInsufficientVocab.
std::vector<PromptRecord> gen_prompts(Task task, int n, std::uint64_t seed, const Vocabulary& vocab);

/// "a photo of a <X> <r> a <Y>".
PromptRecord make_two_obj(const std::string& subject, Relation relation, const std::string& object);

/// Neg record keeping the source's target image: the stated relation becomes
/// "not inverse(r)".
PromptRecord derive_negation(const PromptRecord& two_obj);

std::string record_to_jsonl(const PromptRecord& record);
PromptRecord record_from_json(const nlohmann::json& j);
void write_records(const std::filesystem::path& path, const std::vector<PromptRecord>& records);
std::vector<PromptRecord> read_records(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Verification.

/// Pixel rectangle, y grows downward.
struct Detection {
  std::string class_name;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double confidence = 1.0;
  std::optional<std::string> attribute;

  Point center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

struct EvalParams {
  /// Detections below this confidence are ignored.
  double min_confidence = 0.3;
};

bool relation_holds(const Detection& a, Relation relation, const Detection& b, const EvalParams& params = {});

struct Verdict {
  bool pass = false;
  std::vector<std::string> reasons;
};

/// Throws kMissingClassMetadata when a record object has no class or a PAB
/// object has no attribute.
Verdict evaluate_image(const std::vector<Detection>& detections, const PromptRecord& record,
                       const EvalParams& params = {});

/// Relation the scene must realise: Neg uses the inverse of the negated
/// relation, every other task its stated relations.
layout::SceneSpec scene_for(const PromptRecord& record);

/// One detection per object at its layout box (canvas units, exclusive max
/// edge) with confidence 1 and the record's attribute. Throws kMisaligned
/// unless the layout lists the record's objects in order.
std::vector<Detection> oracle_detector(const PromptRecord& record, const layout::LayoutPlan& plan);

// ---------------------------------------------------------------------------
// Detections and results files.

struct ImageDetections {
  std::string image;
  int prompt_index = 0;
  std::uint64_t seed = 0;
  std::vector<Detection> detections;
};

std::string detections_to_jsonl(const ImageDetections& d);
ImageDetections detections_from_json(const nlohmann::json& j);
std::vector<ImageDetections> read_detections(const std::filesystem::path& path);

struct ImageResult {
  Task task = Task::kTwoObj;
  int prompt_index = 0;
  std::uint64_t seed = 0;
  std::string image;
  Verdict verdict;
};

std::string result_to_jsonl(const ImageResult& r);
ImageResult result_from_json(const nlohmann::json& j);
std::vector<ImageResult> read_results(const std::filesystem::path& path);

/// Joins detections to prompts by prompt_index. Throws kMisaligned for an
/// index with no prompt.
std::vector<ImageResult> evaluate_all(const std::vector<PromptRecord>& prompts,
                                      const std::vector<ImageDetections>& detections, const EvalParams& params = {});

// ---------------------------------------------------------------------------
// Aggregation.

struct TaskScore {
  Task task;
  double mean = 0.0;
  double stddev = 0.0;  // population, across seeds
  std::size_t images = 0;
  std::size_t seeds = 0;
};

struct Report {
  std::string model;
  std::vector<TaskScore> scores;  // kAllTasks order, empty groups left out
  std::vector<std::string> warnings;

  double average() const;
};

Report aggregate(const std::vector<ImageResult>& results, std::string model_name = "model");

/// Header "Model, 2 Obj, 3 Obj, 4 Obj, Neg, Rel, PAB, Avg." (tab separated,
/// absent tasks dropped) and one row with "mean ± std" cells.
std::string format_report(const Report& report);

}  // namespace stitch::poseval
