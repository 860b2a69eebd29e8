// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "stitch/ablation.hpp"
#include "stitch/error.hpp"
#include "stitch/io.hpp"
#include "stitch/pipeline.hpp"
#include "stitch/toy_model.hpp"

namespace stitch::pipeline {
namespace {

namespace fs = std::filesystem;
using layout::BoundingBox;
using layout::LayoutPlan;
using model::Matrix;

const model::ToyMMDiT& toy() {
  static const model::ToyMMDiT m([] {
    model::ModelConfig c;
    c.embed_dim = 16;
    c.num_blocks = 2;
    c.num_heads = 2;
    return c;
  }());
  return m;
}

StitchConfig fast_config() {
  StitchConfig cfg;
  cfg.s_steps = 3;
  cfg.t_steps = 8;
  cfg.kappa = 3;
  return cfg;
}

LayoutPlan two_object_plan() {
  return {"a dog left of a cat", "park", {{"a dog", {0, 0, 15, 15}}, {"a cat", {16, 0, 31, 15}}}, 32};
}

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("stitch_pipeline_" + name);
  fs::remove_all(d);
  return d;
}

TEST(Config, DefaultsAndProfiles) {
  const StitchConfig d;
  EXPECT_EQ(d.s_steps, 10);
  EXPECT_EQ(d.t_steps, 50);
  EXPECT_EQ(d.eta, 0.95);
  EXPECT_EQ(d.kappa, 5);
  EXPECT_EQ(d.canvas, 32);
  EXPECT_NO_THROW(d.validate());
  for (const char* name : {"flux", "sd3.5"}) {
    const auto p = StitchConfig::profile(name);
    EXPECT_EQ(p.s_steps, 10);
    EXPECT_EQ(p.t_steps, 50);
    EXPECT_EQ(p.eta, 0.95);
    EXPECT_EQ(p.kappa, 5);
    EXPECT_EQ(p.canvas, 32);
    EXPECT_NO_THROW(p.validate());
  }
  EXPECT_EQ(StitchConfig::profile("flux").cutout_head, (model::HeadSelector{14, 20}));
  EXPECT_EQ(StitchConfig::profile("qwen-image").s_steps, 6);
  EXPECT_THROW(StitchConfig::profile("unknown"), Error);
}

TEST(Config, InvariantViolations) {
  auto bad = [](auto mutate) {
    StitchConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidConfig;
    }
    return false;
  };
  EXPECT_TRUE(bad([](StitchConfig& c) { c.s_steps = 50; }));
  EXPECT_TRUE(bad([](StitchConfig& c) { c.s_steps = 0; }));
  EXPECT_TRUE(bad([](StitchConfig& c) { c.eta = 0.0; }));
  EXPECT_TRUE(bad([](StitchConfig& c) { c.eta = 1.01; }));
  EXPECT_TRUE(bad([](StitchConfig& c) { c.kappa = 4; }));
}

TEST(Compose, EmptyDisjointOverlapping) {
  const Matrix bg = Matrix::Constant(4, 2, 0.0);
  const auto empty = compose_latents(bg, {});
  EXPECT_EQ(empty.visual, bg);
  EXPECT_EQ(empty.provenance, std::vector<int>(4, 0));

  const Matrix a = Matrix::Constant(4, 2, 1.0), b = Matrix::Constant(4, 2, 2.0);
  cutout::GridMask ma({2, 2}), mb({2, 2});
  ma.selected = {true, false, false, false};
  mb.selected = {false, false, false, true};
  const Overlay disjoint[] = {{&ma, &a}, {&mb, &b}};
  const auto c = compose_latents(bg, disjoint);
  EXPECT_EQ(c.provenance, (std::vector<int>{1, 0, 0, 2}));
  EXPECT_EQ(c.visual.row(0), a.row(0));
  EXPECT_EQ(c.visual.row(1), bg.row(1));
  EXPECT_EQ(c.visual.row(3), b.row(3));

  mb.selected = {true, true, false, false};
  const Overlay overlap[] = {{&ma, &a}, {&mb, &b}};
  const auto o = compose_latents(bg, overlap);
  EXPECT_EQ(o.provenance, (std::vector<int>{2, 2, 0, 0}));
  EXPECT_EQ(o.visual.row(0), b.row(0));

  const Matrix wrong = Matrix::Zero(3, 2);
  const Overlay bad[] = {{&ma, &wrong}};
  EXPECT_THROW(compose_latents(bg, bad), Error);
}

TEST(RunStitch, BackgroundOnlyPlanEqualsPlainSampling) {
  const auto cfg = fast_config();
  const LayoutPlan plan{"a quiet park", "park", {}, 32};
  const auto r = run_stitch("", plan, toy(), cfg);
  ASSERT_EQ(r.branches.size(), 1u);

  const auto sched = model::uniform_schedule(cfg.t_steps);
  const Matrix x0 = model::gaussian_latents(64, 4, cfg.seed, "noise/shared");
  model::SampleOptions a;
  a.last_step = cfg.s_steps;
  const auto first = model::sample(toy(), x0, toy().tokenize("park"), sched, a);
  model::SampleOptions b;
  b.first_step = cfg.s_steps;
  const auto second = model::sample(toy(), first.final().visual, toy().tokenize("a quiet park"), sched, b);
  EXPECT_EQ(r.final_latents, second.final().visual);
  EXPECT_EQ(r.composite.visual, first.final().visual);
}

TEST(RunStitch, ProvenanceHasThreeSourcesInsideBoxes) {
  const auto cfg = fast_config();
  const auto plan = two_object_plan();
  const auto r = run_stitch("", plan, toy(), cfg);
  ASSERT_EQ(r.branches.size(), 3u);
  std::set<int> sources(r.composite.provenance.begin(), r.composite.provenance.end());
  EXPECT_EQ(sources, (std::set<int>{0, 1, 2}));
  const auto grid = toy().grid();
  for (int k = 1; k <= 2; ++k) {
    const auto& obj = plan.objects[k - 1];
    const auto part = region::partition_tokens(grid, obj.box, 32, toy().tokenize(obj.prompt).pad_flags);
    for (int i = 0; i < grid.count(); ++i) {
      if (r.composite.provenance[i] == k) {
        EXPECT_TRUE(part.inside(i / grid.width, i % grid.width));
      }
    }
  }
  for (int i = 0; i < grid.count(); ++i) {
    const int k = r.composite.provenance[i];
    EXPECT_EQ(r.composite.visual.row(i), r.branches[k].step_s.row(i));
  }
}

TEST(RunStitch, FullCoverOverlayReproducesObjectBranch) {
  auto cfg = fast_config();
  cfg.eta = 1.0;
  const LayoutPlan plan{"a dog", "park", {{"a dog", BoundingBox::full(32)}}, 32};
  const auto r = run_stitch("", plan, toy(), cfg);
  EXPECT_EQ(r.branches[1].cutout->mask.count(), 64);
  EXPECT_EQ(r.composite.visual, r.branches[1].step_s);
}

TEST(RunStitch, ReplayAndThreadingAreDeterministic) {
  auto cfg = fast_config();
  const auto plan = two_object_plan();
  cfg.threads = 1;
  const auto a = run_stitch("", plan, toy(), cfg);
  cfg.threads = 0;
  const auto b = run_stitch("", plan, toy(), cfg);
  const auto c = run_stitch("", plan, toy(), cfg);
  EXPECT_EQ(a.final_latents, b.final_latents);
  EXPECT_EQ(b.final_latents, c.final_latents);
  cfg.seed = 1;
  EXPECT_NE(run_stitch("", plan, toy(), cfg).final_latents, a.final_latents);
}

TEST(RunStitch, SharedNoiseControlsInitialLatents) {
  auto cfg = fast_config();
  const auto plan = two_object_plan();
  const auto shared = run_stitch("", plan, toy(), cfg);
  EXPECT_EQ(shared.branches[0].initial, shared.branches[2].initial);
  cfg.shared_noise = false;
  const auto own = run_stitch("", plan, toy(), cfg);
  EXPECT_NE(own.branches[0].initial, own.branches[2].initial);
  EXPECT_EQ(own.branches[1].tau_s, own.branches[0].tau_s);
}

TEST(RunStitch, RejectsBadInputs) {
  auto cfg = fast_config();
  cfg.cutout_head = {9, 0};
  EXPECT_THROW(run_stitch("", two_object_plan(), toy(), cfg), Error);
  cfg = fast_config();
  cfg.s_steps = cfg.t_steps;
  EXPECT_THROW(run_stitch("", two_object_plan(), toy(), cfg), Error);
}

class DivergentModel final : public model::ModelAdapter {
 public:
  std::string name() const override { return "divergent"; }
  model::TokenGrid grid() const override { return toy().grid(); }
  int latent_channels() const override { return toy().latent_channels(); }
  int text_length() const override { return toy().text_length(); }
  int num_blocks() const override { return toy().num_blocks(); }
  int num_heads() const override { return toy().num_heads(); }
  model::TokenizedPrompt tokenize(std::string_view p) const override { return toy().tokenize(p); }
  model::VelocityOutput predict_velocity(const Matrix& x, double tau, const model::TokenizedPrompt& p,
                                         const model::AttentionMask* m,
                                         std::span<const model::HeadSelector> c) const override {
    return toy().predict_velocity(x, tau, p, m, c);
  }
  std::vector<double> schedule(int steps) const override {
    // Returns a schedule with the wrong number of steps.
    return model::uniform_schedule(steps + 1);
  }
};

TEST(RunStitch, ScheduleDisagreementIsBranchDivergence) {
  try {
    run_stitch("", two_object_plan(), DivergentModel{}, fast_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBranchDivergence);
  }
}

TEST(RunDir, WriteVerifyAndDetectTampering) {
  const auto cfg = fast_config();
  const auto plan = two_object_plan();
  const auto r = run_stitch("", plan, toy(), cfg);
  const auto dir = temp_dir("run");
  const auto m = write_run(dir, "", plan, toy(), cfg, r);
  for (const char* rel : {"layout.json", "branch_0/step_3.tnsr", "branch_2/step_3.tnsr", "masks/obj_1.pgm",
                          "masks/obj_2.pgm", "composite.tnsr", "final.tnsr", "preview.pgm", "meta.json"}) {
    EXPECT_TRUE(fs::exists(dir / rel)) << rel;
  }
  EXPECT_FALSE(fs::exists(dir / "masks/obj_0.pgm"));
  EXPECT_TRUE(verify_manifest(dir).empty());

  const auto back = read_manifest(dir);
  EXPECT_EQ(back.artifacts.size(), m.artifacts.size());
  EXPECT_EQ(back.config["s_steps"], 3);
  EXPECT_EQ(back.model_name, "toy-mmdit");
  EXPECT_EQ(layout::read_layout(dir / "layout.json"), plan);

  const auto final_tensor = io::read_tensor(dir / "final.tnsr");
  EXPECT_EQ(final_tensor.dims, (std::vector<std::uint32_t>{64, 4}));
  EXPECT_EQ(model::from_tensor(final_tensor), model::from_tensor(model::to_tensor(r.final_latents)));
  const auto mask = cutout::from_pgm(io::read_pgm(dir / "masks/obj_1.pgm"));
  EXPECT_EQ(mask, r.branches[1].cutout->mask);

  {
    std::ofstream f(dir / "composite.tnsr", std::ios::binary | std::ios::app);
    f << "x";
  }
  fs::remove(dir / "preview.pgm");
  EXPECT_EQ(verify_manifest(dir).size(), 2u);
  fs::remove_all(dir);
}

TEST(RunDir, SameInputsGiveSameArtifactHashes) {
  const auto cfg = fast_config();
  const auto plan = two_object_plan();
  const auto a = write_run(temp_dir("a"), "", plan, toy(), cfg, run_stitch("", plan, toy(), cfg));
  const auto b = write_run(temp_dir("b"), "", plan, toy(), cfg, run_stitch("", plan, toy(), cfg));
  ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    EXPECT_EQ(a.artifacts[i].path, b.artifacts[i].path);
    EXPECT_EQ(a.artifacts[i].sha256, b.artifacts[i].sha256);
  }
  fs::remove_all(temp_dir("a"));
  fs::remove_all(temp_dir("b"));
}

TEST(Probes, CollectAndRank) {
  const auto refs = temp_dir("refs");
  fs::create_directories(refs);
  cutout::GridMask ref({8, 8});
  for (int i = 0; i < 32; ++i) ref.selected[i] = true;
  io::write_pgm(refs / "dog.pgm", cutout::to_pgm(ref));
  io::write_pgm(refs / "cat.pgm", cutout::to_pgm(ref));
  const std::vector<std::string> objects = {"dog", "cat", "zebra"};
  std::vector<std::string> skipped;
  const auto corpus = collect_probes(toy(), objects, refs, fast_config(), &skipped);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(skipped, (std::vector<std::string>{"zebra"}));
  EXPECT_EQ(corpus[0].records.size(), static_cast<std::size_t>(toy().num_blocks() * toy().num_heads()));
  for (const auto& r : corpus[0].records) EXPECT_EQ(r.step_index, 3);
  EXPECT_EQ(probe_prompt("apple"), "a photo of an apple");
  const auto ranked = cutout::rank_heads(corpus, cutout::kDefaultEtaGrid);
  EXPECT_EQ(ranked.size(), 4u * cutout::kDefaultEtaGrid.size());
  fs::remove_all(refs);
}

TEST(Ablation, RowsInInputOrderAndStepsValidated) {
  const auto records = std::vector<poseval::PromptRecord>{poseval::make_two_obj("dog", Relation::kLeftOf, "cat"),
                                                          poseval::make_two_obj("cup", Relation::kAbove, "bowl")};
  auto cfg = fast_config();
  const auto out = temp_dir("ablate");
  const std::vector<int> s_values = {5, 2, 4};
  const auto rows = run_ablation_sweep(records, s_values, cfg, toy(), out);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].s_steps, s_values[i]);
    EXPECT_EQ(rows[i].images, 2u);
    EXPECT_TRUE(fs::exists(out / ("S_" + std::to_string(s_values[i]))));
  }
  EXPECT_TRUE(fs::exists(out / "summary.tsv"));
  const auto table = format_ablation_table(rows);
  EXPECT_EQ(table.substr(0, table.find('\n')), "S\tImages\tPassed\tSkipped\tAccuracy");

  const std::vector<int> bad = {2, 8};
  EXPECT_THROW(run_ablation_sweep(records, bad, cfg, toy(), temp_dir("ablate_bad")), Error);
  EXPECT_FALSE(fs::exists(temp_dir("ablate_bad") / "S_2"));
  fs::remove_all(out);
}

TEST(Ablation, ProvenanceDetectionsSpanOwnedTokens) {
  const auto rec = poseval::make_two_obj("dog", Relation::kLeftOf, "cat");
  CompositeLatent c{Matrix::Zero(16, 1), std::vector<int>(16, 0)};
  c.provenance[0] = 1;
  c.provenance[5] = 1;
  c.provenance[3] = 2;
  const auto d = provenance_detections(rec, c, {4, 4}, 32);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].class_name, "dog");
  EXPECT_EQ(d[0].x0, 0);
  EXPECT_EQ(d[0].x1, 16);
  EXPECT_EQ(d[0].y1, 16);
  EXPECT_EQ(d[1].x0, 24);
}

}  // namespace
}  // namespace stitch::pipeline
