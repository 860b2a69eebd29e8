// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "stitch/error.hpp"
#include "stitch/layout.hpp"

namespace stitch::layout {
namespace {

SceneSpec scene(std::vector<std::string> names, std::vector<SceneRelation> relations) {
  SceneSpec s;
  for (auto& n : names) s.objects.push_back({n, std::nullopt});
  s.relations = std::move(relations);
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected stitch::Error";
  return ErrorCode::kFormat;
}

TEST(SolveGrid, AboveUsesFirstColumn) {
  const auto cells = solve_grid_layout(scene({"A", "B"}, {{0, Relation::kAbove, 1}}));
  EXPECT_EQ(cells[0], (GridCell{0, 0}));
  EXPECT_EQ(cells[1], (GridCell{1, 0}));
}

TEST(SolveGrid, SingleObjectTakesFirstCell) {
  const auto cells = solve_grid_layout(scene({"A"}, {}));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0], (GridCell{0, 0}));
}

TEST(SolveGrid, LeftThenAbove) {
  const auto cells = solve_grid_layout(scene({"A", "B", "C"}, {{0, Relation::kLeftOf, 1}, {1, Relation::kAbove, 2}}));
  EXPECT_EQ(cells[0], (GridCell{0, 0}));
  EXPECT_EQ(cells[1], (GridCell{0, 1}));
  EXPECT_EQ(cells[2], (GridCell{1, 1}));
}

TEST(SolveGrid, ConsistentFourCycleUsesAllCells) {
  const auto s = scene({"A", "B", "C", "D"}, {{0, Relation::kLeftOf, 1},
                                               {1, Relation::kAbove, 2},
                                               {2, Relation::kRightOf, 3},
                                               {3, Relation::kBelow, 0}});
  const auto cells = solve_grid_layout(s);
  const auto expected = testing::solver_oracle(s);
  ASSERT_TRUE(expected.has_value());
  EXPECT_EQ(cells, *expected);
  std::set<int> used;
  for (auto c : cells) used.insert(c.index());
  EXPECT_EQ(used.size(), 4u);
}

TEST(SolveGrid, ContradictionIsUnsatisfiable) {
  const auto s = scene({"A", "B"}, {{0, Relation::kLeftOf, 1}, {1, Relation::kLeftOf, 0}});
  EXPECT_EQ(code_of([&] { solve_grid_layout(s); }), ErrorCode::kUnsatisfiableScene);
  EXPECT_EQ(code_of([&] { solve_grid_layout(scene({"A", "B", "C", "D", "E"}, {})); }),
            ErrorCode::kUnsatisfiableScene);
}

TEST(SolveGrid, MatchesExhaustiveOracleOnRandomScenes) {
  std::mt19937_64 gen(17);
  int satisfiable = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 4);
    SceneSpec s;
    for (int i = 0; i < n; ++i) s.objects.push_back({"o" + std::to_string(i), std::nullopt});
    const int m = n == 1 ? 0 : static_cast<int>(gen() % 4);
    for (int k = 0; k < m; ++k) {
      const int a = static_cast<int>(gen() % n);
      int b = static_cast<int>(gen() % n);
      if (b == a) b = (a + 1) % n;
      s.relations.push_back({a, kAllRelations[gen() % 4], b});
    }
    const auto expected = testing::solver_oracle(s);
    if (expected) {
      ++satisfiable;
      EXPECT_EQ(solve_grid_layout(s), *expected);
    } else {
      EXPECT_EQ(code_of([&] { solve_grid_layout(s); }), ErrorCode::kUnsatisfiableScene);
    }
  }
  EXPECT_GT(satisfiable, 100);
}

TEST(FallbackPlan, LeftOfSplitsCanvasInHalves) {
  const auto plan = fallback_plan(scene({"A", "B"}, {{0, Relation::kLeftOf, 1}}), 32, "A left of B");
  ASSERT_EQ(plan.objects.size(), 2u);
  EXPECT_EQ(plan.background_prompt, "background");
  EXPECT_EQ(plan.objects[0].box, (BoundingBox{0, 0, 15, 15}));
  EXPECT_EQ(plan.objects[1].box, (BoundingBox{16, 0, 31, 15}));
  EXPECT_EQ(plan.objects[0].box.x_max, 32 / 2 - 1);
}

TEST(FallbackPlan, BoxesSatisfyRelationsAndAreDeterministic) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 3);
    SceneSpec s;
    for (int i = 0; i < n; ++i) s.objects.push_back({"o" + std::to_string(i), std::nullopt});
    for (int k = 0; k + 1 < n; ++k) s.relations.push_back({k, kAllRelations[gen() % 4], k + 1});
    if (!testing::solver_oracle(s)) continue;
    for (int canvas : {2, 7, 32, 64}) {
      const auto plan = fallback_plan(s, canvas);
      EXPECT_EQ(plan, fallback_plan(s, canvas));
      for (const auto& o : plan.objects) EXPECT_TRUE(o.box.is_valid(canvas));
      for (const auto& r : s.relations) {
        EXPECT_TRUE(center_relation_holds(plan.objects[r.subject].box.center(), r.relation,
                                          plan.objects[r.object].box.center()));
      }
    }
  }
}

TEST(ValidateLayout, Findings) {
  LayoutPlan halves{"p", "bg", {{"a", {0, 0, 15, 31}}, {"b", {16, 0, 31, 31}}}, 32};
  EXPECT_TRUE(validate_layout(halves).empty());

  LayoutPlan same{"p", "bg", {{"a", {0, 0, 31, 31}}, {"b", {0, 0, 31, 31}}}, 32};
  const auto f = validate_layout(same);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].kind, FindingKind::kOverlap);

  LayoutPlan half{"p", "bg", {{"a", {0, 0, 15, 31}}}, 32};
  const auto g = validate_layout(half);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].kind, FindingKind::kCoverage);
  EXPECT_EQ(half, (LayoutPlan{"p", "bg", {{"a", {0, 0, 15, 31}}}, 32}));
}

TEST(Prompts, BoxSystemPromptIsExact) {
  const std::string expected =
      "You have a canvas of size 32x32. Decompose the given description \n"
      "into single objects. Do not merge multiple objects into one box. \n"
      "Fully cover the canvas with the object boxes. Avoid overlaps. \n"
      "Do not leave space for background. Write 3 sentence justification \n"
      "and then output just valid JSON in the format: \n"
      "[\n"
      "    {\"prompt\": \"<object with properties only mentioned in the \n"
      "    description>\", \"x_min\": , \"y_min\": , \"x_max\": , \"y_max\": }, \n"
      "    ...\n"
      "]";
  EXPECT_EQ(box_system_prompt(32), expected);
  EXPECT_NE(box_system_prompt(64).find("canvas of size 64x64."), std::string::npos);
}

TEST(Prompts, BackgroundAndUserPromptsAreExact) {
  EXPECT_EQ(background_system_prompt(),
            "Provide a simple fitting background description for this scene. \n"
            "The background must not mention any of the specific objects or \n"
            "elements from the prompt. The background must not mention any\n"
            "other specific objects or people. Return only ONE word of the \n"
            "background text, nothing else.  ");
  EXPECT_EQ(user_prompt("a cat"), "Description: a cat");
}

const char* kButterflyReply =
    "The butterfly sits in the upper half. The skateboard fills the lower half. Together they cover the canvas.\n"
    "[{\"prompt\": \"a butterfly\", \"x_min\": 0, \"y_min\": 0, \"x_max\": 31, \"y_max\": 15},\n"
    " {\"prompt\": \"a skateboard\", \"x_min\": 0, \"y_min\": 16, \"x_max\": 31, \"y_max\": 31}]";

TEST(PlanLayout, ButterflyAboveSkateboardFromRecordedReply) {
  FixtureLayoutProvider provider({kButterflyReply, "park"});
  const auto plan = plan_layout("a butterfly above a skateboard", 32, provider);
  ASSERT_EQ(plan.objects.size(), 2u);
  EXPECT_EQ(plan.background_prompt, "park");
  EXPECT_EQ(plan.full_prompt, "a butterfly above a skateboard");
  EXPECT_LT(plan.objects[0].box.y_max, plan.objects[1].box.y_min);
  EXPECT_TRUE(center_relation_holds(plan.objects[0].box.center(), Relation::kAbove, plan.objects[1].box.center()));

  const auto reqs = provider.requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].system, box_system_prompt(32));
  EXPECT_EQ(reqs[0].user, "Description: a butterfly above a skateboard");
  EXPECT_EQ(reqs[1].system, background_system_prompt());
}

TEST(PlanLayout, ButterflyAboveSkateboardOffline) {
  FallbackLayoutProvider provider(32);
  const auto plan = plan_layout("a butterfly above a skateboard", 32, provider);
  ASSERT_EQ(plan.objects.size(), 2u);
  EXPECT_NE(plan.objects[0].prompt.find("butterfly"), std::string::npos);
  EXPECT_NE(plan.objects[1].prompt.find("skateboard"), std::string::npos);
  EXPECT_LT(plan.objects[0].box.y_max, plan.objects[1].box.y_min);
  EXPECT_EQ(plan.background_prompt, "background");
}

TEST(PlanLayout, EmptyArrayIsEmptyLayout) {
  FixtureLayoutProvider provider({"Nothing to place. []", "park"});
  EXPECT_EQ(code_of([&] { plan_layout("anything", 32, provider); }), ErrorCode::kEmptyLayout);
}

TEST(PlanLayout, OutOfRangeCoordinatesAreClamped) {
  FixtureLayoutProvider provider(
      {"[{\"prompt\": \"a cat\", \"x_min\": -3, \"y_min\": 0, \"x_max\": 40, \"y_max\": 31}]", "room"});
  const auto plan = plan_layout("a cat", 32, provider);
  EXPECT_EQ(plan.objects[0].box.x_max, 31);
  EXPECT_EQ(plan.objects[0].box.x_min, 0);
}

TEST(PlanLayout, MalformedReplyIsRetriedOnce) {
  FixtureLayoutProvider ok({"sorry, no json", kButterflyReply, "park"});
  EXPECT_EQ(plan_layout("p", 32, ok).objects.size(), 2u);
  EXPECT_EQ(ok.requests().size(), 3u);

  FixtureLayoutProvider bad({"still nothing", "{\"prompt\": 1}", "park"});
  EXPECT_EQ(code_of([&] { plan_layout("p", 32, bad); }), ErrorCode::kMalformedLLMResponse);
  EXPECT_EQ(bad.requests().size(), 2u);
}

TEST(PlanLayout, FuzzedRepliesAlwaysYieldValidBoxes) {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> coord(-50, 90);
  for (int trial = 0; trial < 300; ++trial) {
    nlohmann::json arr = nlohmann::json::array();
    const int k = 1 + static_cast<int>(gen() % 4);
    for (int i = 0; i < k; ++i) {
      arr.push_back({{"prompt", "obj" + std::to_string(i)},
                     {"x_min", coord(gen)},
                     {"y_min", coord(gen)},
                     {"x_max", coord(gen)},
                     {"y_max", coord(gen)}});
    }
    const int canvas = 2 + static_cast<int>(gen() % 63);
    FixtureLayoutProvider provider({"Justification. " + arr.dump() + " Done.", "field"});
    const auto plan = plan_layout("p", canvas, provider);
    ASSERT_EQ(static_cast<int>(plan.objects.size()), k);
    for (const auto& o : plan.objects) EXPECT_TRUE(o.box.is_valid(canvas));
  }
}

TEST(ParseScene, RelationPrompts) {
  const auto s = parse_scene("a photo of a dog left of a cat");
  ASSERT_EQ(s.objects.size(), 2u);
  EXPECT_EQ(s.objects[0].name, "dog");
  EXPECT_EQ(s.objects[1].name, "cat");
  ASSERT_EQ(s.relations.size(), 1u);
  EXPECT_EQ(s.relations[0].relation, Relation::kLeftOf);

  const auto t = parse_scene("a photo of a red car above a blue bench");
  ASSERT_EQ(t.objects.size(), 2u);
  EXPECT_EQ(t.objects[0].attribute, "red");
  EXPECT_EQ(t.objects[1].name, "bench");
}

TEST(LayoutFile, RoundTripKeepsAppendixKeys) {
  const LayoutPlan plan{"a butterfly above a skateboard", "park",
                        {{"a butterfly", {0, 0, 31, 15}}, {"a skateboard", {0, 16, 31, 31}}}, 32};
  const auto j = layout_to_json(plan);
  EXPECT_EQ(j["background"], "park");
  for (const char* key : {"prompt", "x_min", "y_min", "x_max", "y_max"}) EXPECT_TRUE(j["objects"][0].contains(key));
  const auto path = std::filesystem::temp_directory_path() / "stitch_layout_test.json";
  write_layout(path, plan);
  EXPECT_EQ(read_layout(path), plan);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace stitch::layout
