// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include "stitch/ablation.hpp"
#include "stitch/config.hpp"
#include "stitch/error.hpp"
#include "stitch/io.hpp"
#include "stitch/layout.hpp"
#include "stitch/pipeline.hpp"
#include "stitch/poseval.hpp"
#include "stitch/toy_model.hpp"
#include "stitch/version.hpp"
#include "stitch/vocab.hpp"

namespace stitch::cli {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& text, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    std::istringstream in(item);
    in.imbue(std::locale::classic());
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad ") + what + " \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("empty ") + what + " list");
  return out;
}

/// A comma-separated list, or the lines of a file when the argument names one.
std::vector<std::string> list_or_file(const std::string& arg) {
  if (!fs::is_regular_file(arg)) return split_list(arg);
  std::vector<std::string> out;
  std::istringstream in(io::read_file(arg));
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    out.push_back(line.substr(b, line.find_last_not_of(" \t\r") - b + 1));
  }
  return out;
}

config::Settings settings_from(const std::string& path) {
  return path.empty() ? config::Settings{} : config::load_config(path);
}

std::unique_ptr<layout::LayoutProvider> make_provider(const std::string& kind, const config::Settings& s) {
  if (kind == "fallback") return std::make_unique<layout::FallbackLayoutProvider>(s.stitch.canvas);
  if (kind == "llm") return std::make_unique<layout::HttpLayoutProvider>(s.llm);
  throw Error(ErrorCode::kInvalidArgument, "unknown provider \"" + kind + "\"");
}

void emit(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
  } else {
    io::write_file_atomic(path, bytes);
  }
}

void warn_findings(const layout::LayoutPlan& plan, std::ostream& err) {
  for (const auto& f : layout::validate_layout(plan)) err << "warning: " << f.message << "\n";
}

std::vector<fs::path> jsonl_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      files.emplace_back(in);
    } else {
      throw Error(ErrorCode::kIo, in + ": no such file or directory");
    }
  }
  return files;
}

}  // namespace

std::unique_ptr<model::ModelAdapter> make_model(const std::string& name) {
  if (name == "toy" || name == "toy-mmdit") return std::make_unique<model::ToyMMDiT>(model::ModelConfig{});
  throw Error(ErrorCode::kInvalidConfig, "model \"" + name + "\" has no adapter in this build (available: toy)");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Positional text-to-image control with region-bound generation and latent stitching", "stitch"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // plan
  std::string prompt, provider = "fallback", config_path, out_path;
  int canvas = 0;
  auto* plan = app.add_subcommand("plan", "Decompose a prompt into a background prompt and object boxes");
  plan->add_option("--prompt", prompt, "Full prompt")->required();
  plan->add_option("--provider", provider, "Layout provider")->check(CLI::IsMember({"llm", "fallback"}));
  plan->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  plan->add_option("--canvas", canvas, "Grid size W (overrides config)")->check(CLI::PositiveNumber);
  plan->add_option("--out", out_path, "Layout JSON path (default stdout)");

  // generate
  std::string layout_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  auto* generate = app.add_subcommand("generate", "Run the full generation and write a run directory");
  generate->add_option("--prompt", prompt, "Full prompt (defaults to the layout's prompt)");
  generate->add_option("--layout", layout_path, "Layout JSON (planned with --provider when absent)")
      ->check(CLI::ExistingFile);
  generate->add_option("--provider", provider, "Layout provider when no layout is given")
      ->check(CLI::IsMember({"llm", "fallback"}));
  generate->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  generate->add_option("--seed", seed, "Seed (overrides config)");
  generate->add_option("--threads", threads, "Branch workers, 0 = one per branch (overrides config)");
  generate->add_option("--out", out_path, "Run directory")->required();

  // select-head
  std::string probe_objects, references, etas = "0.75,0.80,0.85,0.90,0.95,0.97,0.99";
  int kappa = 1;
  std::size_t top = 5;
  auto* select = app.add_subcommand("select-head", "Rank attention heads by cutout IoU against reference masks");
  select->add_option("--probe-objects", probe_objects, "Comma-separated objects or a file with one per line")
      ->required();
  select->add_option("--references", references, "Directory of <object>.pgm reference masks")
      ->required()
      ->check(CLI::ExistingDirectory);
  select->add_option("--etas", etas, "Comma-separated thresholds");
  select->add_option("--kappa", kappa, "Smoothing kernel used while ranking");
  select->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  select->add_option("--seed", seed, "Seed (overrides config)");
  select->add_option("--top", top, "Rows in the report, 0 = all");
  select->add_option("--out", out_path, "Report path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark prompt sets, detections and evaluation");
  bench->require_subcommand(1);
  std::string task, vocab_dir, prompts_path, detections_path, layouts_dir;
  int n = 100;
  double min_confidence = 0.3;
  auto* gen = bench->add_subcommand("gen", "Generate a prompt set");
  gen->add_option("--task", task, "two_obj, three_obj, four_obj, pab, neg or rel")->required();
  gen->add_option("--n", n, "Number of prompts")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--vocab", vocab_dir, "Directory with objects.txt, relations.txt, colors.txt")
      ->check(CLI::ExistingDirectory);
  gen->add_option("--out", out_path, "JSONL path (default stdout)");

  auto* bplan = bench->add_subcommand("plan", "Write a fallback layout per prompt as <out>/<index>.json");
  bplan->add_option("--prompts", prompts_path, "Prompt set JSONL")->required()->check(CLI::ExistingFile);
  bplan->add_option("--canvas", canvas, "Grid size W")->check(CLI::PositiveNumber);
  bplan->add_option("--out", out_path, "Output directory")->required();

  auto* eval = bench->add_subcommand("eval", "Verify detections against a prompt set");
  eval->add_option("--prompts", prompts_path, "Prompt set JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--detections", detections_path, "Detections JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--min-confidence", min_confidence, "Ignore detections below this confidence");
  eval->add_option("--out", out_path, "Results JSONL path (default stdout)");

  auto* oracle = bench->add_subcommand("oracle-detect", "Synthesize detections from layouts");
  oracle->add_option("--prompts", prompts_path, "Prompt set JSONL")->required()->check(CLI::ExistingFile);
  oracle->add_option("--layouts", layouts_dir, "Directory of <index>.json layouts")
      ->required()
      ->check(CLI::ExistingDirectory);
  oracle->add_option("--out", out_path, "Detections JSONL path (default stdout)");

  // report
  std::vector<std::string> inputs;
  std::string model_name = "model";
  auto* report = app.add_subcommand("report", "Aggregate evaluation results into an accuracy table");
  report->add_option("inputs", inputs, "Result files or directories of *.jsonl")->required();
  report->add_option("--model", model_name, "Row label");
  report->add_option("--out", out_path, "TSV path (default stdout)");

  // ablate-s
  std::string s_values;
  int limit = 0;
  auto* ablate = app.add_subcommand("ablate-s", "Sweep the number of constrained steps");
  ablate->add_option("--s-values", s_values, "Comma-separated S values")->required();
  ablate->add_option("--prompts", prompts_path, "Prompt set JSONL")->required()->check(CLI::ExistingFile);
  ablate->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  ablate->add_option("--limit", limit, "Use only the first N prompts, 0 = all")->check(CLI::NonNegativeNumber);
  ablate->add_option("--out", out_path, "Output directory")->required();

  // verify
  std::string run_dir;
  auto* verify = app.add_subcommand("verify", "Check a run directory against its manifest");
  verify->add_option("dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*plan) {
      auto s = settings_from(config_path);
      if (canvas > 0) s.stitch.canvas = canvas;
      auto p = make_provider(provider, s);
      const auto result = layout::plan_layout(prompt, s.stitch.canvas, *p);
      warn_findings(result, err);
      emit(out_path, layout::layout_to_json(result).dump(2) + "\n", out);
    } else if (*generate) {
      auto s = settings_from(config_path);
      if (seed) s.stitch.seed = *seed;
      if (threads) s.stitch.threads = *threads;
      s.stitch.validate();
      layout::LayoutPlan lp;
      if (!layout_path.empty()) {
        lp = layout::read_layout(layout_path);
      } else {
        if (prompt.empty()) throw CLI::RequiredError("--prompt or --layout");
        auto p = make_provider(provider, s);
        lp = layout::plan_layout(prompt, s.stitch.canvas, *p);
      }
      if (prompt.empty()) prompt = lp.full_prompt;
      if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "no prompt given and the layout has none");
      warn_findings(lp, err);
      const auto m = make_model(s.model);
      const auto result = pipeline::run_stitch(prompt, lp, *m, s.stitch);
      const auto manifest = pipeline::write_run(out_path, prompt, lp, *m, s.stitch, result);
      for (const auto& a : manifest.artifacts) {
        if (a.path == "final.tnsr") out << "final.tnsr " << a.sha256 << "\n";
      }
      out << "wrote " << out_path << "\n";
    } else if (*select) {
      auto s = settings_from(config_path);
      if (seed) s.stitch.seed = *seed;
      const auto objects = list_or_file(probe_objects);
      const auto eta_grid = parse_numbers<double>(etas, "eta");
      const auto m = make_model(s.model);
      std::vector<std::string> skipped;
      const auto corpus = pipeline::collect_probes(*m, objects, references, s.stitch, &skipped);
      for (const auto& o : skipped) err << "warning: no reference mask for \"" << o << "\", skipped\n";
      const auto ranked = cutout::rank_heads(corpus, eta_grid, kappa);
      emit(out_path, cutout::format_head_report(ranked, top), out);
    } else if (*gen) {
      const auto vocab = vocab_dir.empty() ? Vocabulary::builtin() : Vocabulary::load(vocab_dir);
      const auto records = poseval::gen_prompts(poseval::parse_task(task), n, seed.value_or(0), vocab);
      std::string bytes;
      for (const auto& r : records) bytes += poseval::record_to_jsonl(r) + "\n";
      emit(out_path, bytes, out);
    } else if (*bplan) {
      const int w = canvas > 0 ? canvas : 32;
      std::size_t skipped = 0;
      for (const auto& r : poseval::read_records(prompts_path)) {
        try {
          layout::write_layout(fs::path(out_path) / (std::to_string(r.index) + ".json"),
                               layout::fallback_plan(poseval::scene_for(r), w, r.prompt));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kUnsatisfiableScene) throw;
          ++skipped;
          err << "warning: prompt " << r.index << " has no grid layout\n";
        }
      }
      if (skipped > 0) err << "warning: " << skipped << " prompts skipped\n";
    } else if (*eval) {
      const auto results = poseval::evaluate_all(poseval::read_records(prompts_path),
                                                 poseval::read_detections(detections_path), {min_confidence});
      std::string bytes;
      for (const auto& r : results) bytes += poseval::result_to_jsonl(r) + "\n";
      emit(out_path, bytes, out);
    } else if (*oracle) {
      std::string bytes;
      for (const auto& r : poseval::read_records(prompts_path)) {
        const auto path = fs::path(layouts_dir) / (std::to_string(r.index) + ".json");
        if (!fs::exists(path)) {
          err << "warning: no layout for prompt " << r.index << "\n";
          continue;
        }
        const std::string image = std::string(poseval::task_id(r.task)) + "/" + std::to_string(r.index);
        bytes += poseval::detections_to_jsonl(
                     {image, r.index, r.seed, poseval::oracle_detector(r, layout::read_layout(path))}) +
                 "\n";
      }
      emit(out_path, bytes, out);
    } else if (*report) {
      std::vector<poseval::ImageResult> results;
      for (const auto& f : jsonl_inputs(inputs)) {
        auto part = poseval::read_results(f);
        results.insert(results.end(), part.begin(), part.end());
      }
      const auto rep = poseval::aggregate(results, model_name);
      for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
      emit(out_path, poseval::format_report(rep), out);
    } else if (*ablate) {
      const auto s = settings_from(config_path);
      auto records = poseval::read_records(prompts_path);
      if (limit > 0 && static_cast<std::size_t>(limit) < records.size()) {
        records.resize(static_cast<std::size_t>(limit));
      }
      const auto values = parse_numbers<int>(s_values, "S value");
      const auto m = make_model(s.model);
      const auto rows = pipeline::run_ablation_sweep(records, values, s.stitch, *m, out_path);
      out << pipeline::format_ablation_table(rows);
    } else if (*verify) {
      const auto problems = pipeline::verify_manifest(run_dir);
      for (const auto& p : problems) err << p << "\n";
      if (!problems.empty()) return kExitDomainError;
      out << "ok\n";
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace stitch::cli
