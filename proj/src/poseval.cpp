// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/poseval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "stitch/error.hpp"
#include "stitch/io.hpp"
#include "stitch/rng.hpp"

namespace stitch::poseval {
namespace {

constexpr std::array<const char*, 3> kOppositeForms = {"on the other side of", "on the opposite side of",
                                                       "on the contrary side of"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string rel(Relation r) { return std::string(relation_text(r)); }

std::vector<std::string> pick_distinct(Rng& rng, const std::vector<std::string>& pool, int k) {
  std::vector<std::size_t> chosen;
  while (static_cast<int>(chosen.size()) < k) {
    const auto i = static_cast<std::size_t>(rng.uniform(pool.size()));
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  std::vector<std::string> out;
  for (auto i : chosen) out.push_back(pool[i]);
  return out;
}

std::vector<Relation> vocab_relations(const Vocabulary& vocab) {
  std::vector<Relation> out;
  for (const auto& text : vocab.relations) {
    const auto r = parse_relation(lower(text));
    if (!r) throw Error(ErrorCode::kInsufficientVocab, "unsupported relation \"" + text + "\"");
    if (std::find(out.begin(), out.end(), *r) == out.end()) out.push_back(*r);
  }
  return out;
}

Relation pick(Rng& rng, const std::vector<Relation>& rels) {
  return rels[static_cast<std::size_t>(rng.uniform(rels.size()))];
}

// Relation of a cell to another on the 2x2 grid; the cells share a row or a column.
Relation cell_relation(layout::GridCell a, layout::GridCell b) {
  if (a.row == b.row) return a.col < b.col ? Relation::kLeftOf : Relation::kRightOf;
  return a.row < b.row ? Relation::kAbove : Relation::kBelow;
}

std::string listing(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += i + 1 == names.size() ? ", and " : ", ";
    out += with_article(names[i]);
  }
  return out;
}

PromptRecord make_chain(Rng& rng, int count, const Vocabulary& vocab) {
  static constexpr std::array<layout::GridCell, 4> kCycle = {{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  PromptRecord r;
  r.task = count == 3 ? Task::kThreeObj : Task::kFourObj;
  const auto names = pick_distinct(rng, vocab.objects, count);
  const int start = static_cast<int>(rng.uniform(4));
  const int step = rng.coin() ? 1 : 3;
  std::vector<layout::GridCell> cells;
  for (int i = 0; i < count; ++i) cells.push_back(kCycle[(start + step * i) % 4]);

  for (const auto& n : names) r.objects.push_back({n, std::nullopt});
  const int links = count == 3 ? 2 : 4;
  for (int i = 0; i < links; ++i) {
    const int j = (i + 1) % count;
    r.relations.push_back({i, cell_relation(cells[i], cells[j]), j});
  }

  auto shuffled = names;
  rng.shuffle(shuffled);
  std::vector<std::string> sentences;
  for (const auto& s : r.relations) {
    if (rng.coin()) {
      sentences.push_back("The " + names[s.subject] + " is " + rel(s.relation) + " the " + names[s.object] + ".");
    } else {
      sentences.push_back("The " + names[s.object] + " is " + rel(inverse(s.relation)) + " the " + names[s.subject] +
                          ".");
    }
  }
  rng.shuffle(sentences);
  r.prompt = "A photo of " + listing(shuffled) + ".";
  for (const auto& s : sentences) r.prompt += " " + s;
  return r;
}

PromptRecord make_pab(Rng& rng, const Vocabulary& vocab, const std::vector<Relation>& rels) {
  PromptRecord r;
  r.task = Task::kPAB;
  const auto names = pick_distinct(rng, vocab.objects, 2);
  const auto colors = pick_distinct(rng, vocab.colors, 2);
  const auto relation = pick(rng, rels);
  r.objects = {{names[0], colors[0]}, {names[1], colors[1]}};
  r.relations = {{0, relation, 1}};
  r.prompt = "a photo of " + with_article(colors[0] + " " + names[0]) + " " + rel(relation) + " " +
             with_article(colors[1] + " " + names[1]);
  return r;
}

PromptRecord make_rel(Rng& rng, const Vocabulary& vocab, const std::vector<Relation>& rels, RelVariant variant) {
  PromptRecord r;
  r.task = Task::kRel;
  const auto names = pick_distinct(rng, vocab.objects, 3);
  const auto relation = pick(rng, rels);
  r.objects = {{names[0], std::nullopt}, {names[1], std::nullopt}, {names[2], std::nullopt}};
  r.rel_variant = variant;
  const bool same = variant == RelVariant::kSame;
  r.relations = {{0, relation, 1}, {2, same ? relation : inverse(relation), 1}};
  const std::string form = same ? "on the same side of" : kOppositeForms[rng.uniform(kOppositeForms.size())];
  r.prompt = "a photo of " + with_article(names[0]) + " " + rel(relation) + " " + with_article(names[1]) + ", and " +
             with_article(names[2]) + " " + form + " the " + names[1] + (same ? " as" : " for") + " the " + names[0];
  return r;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::filesystem::path& path, Parse parse) {
  std::istringstream in(io::read_file(path));
  std::vector<T> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

Relation relation_from(const nlohmann::json& j) {
  const auto text = j.get<std::string>();
  const auto r = parse_relation(lower(text));
  if (!r) throw Error(ErrorCode::kFormat, "unknown relation \"" + text + "\"");
  return *r;
}

}  // namespace

std::string_view task_id(Task task) {
  switch (task) {
    case Task::kTwoObj: return "two_obj";
    case Task::kThreeObj: return "three_obj";
    case Task::kFourObj: return "four_obj";
    case Task::kPAB: return "pab";
    case Task::kNeg: return "neg";
    case Task::kRel: return "rel";
  }
  return "";
}

std::string_view task_label(Task task) {
  switch (task) {
    case Task::kTwoObj: return "2 Obj";
    case Task::kThreeObj: return "3 Obj";
    case Task::kFourObj: return "4 Obj";
    case Task::kPAB: return "PAB";
    case Task::kNeg: return "Neg";
    case Task::kRel: return "Rel";
  }
  return "";
}

Task parse_task(std::string_view text) {
  static const std::map<std::string, Task> kAliases = {
      {"two_obj", Task::kTwoObj},     {"2obj", Task::kTwoObj},       {"2_obj", Task::kTwoObj},
      {"2 obj", Task::kTwoObj},       {"twoobj", Task::kTwoObj},     {"position", Task::kTwoObj},
      {"three_obj", Task::kThreeObj}, {"3obj", Task::kThreeObj},     {"3_obj", Task::kThreeObj},
      {"3 obj", Task::kThreeObj},     {"threeobj", Task::kThreeObj}, {"four_obj", Task::kFourObj},
      {"4obj", Task::kFourObj},       {"4_obj", Task::kFourObj},     {"4 obj", Task::kFourObj},
      {"fourobj", Task::kFourObj},    {"pab", Task::kPAB},           {"neg", Task::kNeg},
      {"negative", Task::kNeg},       {"rel", Task::kRel},           {"relative", Task::kRel},
  };
  const auto it = kAliases.find(lower(text));
  if (it == kAliases.end()) throw Error(ErrorCode::kUnknownTask, "unknown task \"" + std::string(text) + "\"");
  return it->second;
}

void PromptRecord::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(task_id(task)) + " record " + std::to_string(index) + ": " + why);
  };
  std::size_t want_objects = 2, want_relations = 1;
  if (task == Task::kThreeObj || task == Task::kRel) want_objects = 3, want_relations = 2;
  if (task == Task::kFourObj) want_objects = 4, want_relations = 4;
  if (objects.size() != want_objects) fail("expected " + std::to_string(want_objects) + " objects");
  if (relations.size() != want_relations) fail("expected " + std::to_string(want_relations) + " relations");
  for (const auto& r : relations) {
    const int n = static_cast<int>(objects.size());
    if (r.subject < 0 || r.subject >= n || r.object < 0 || r.object >= n || r.subject == r.object) {
      fail("relation refers to a missing object");
    }
  }
  if (task == Task::kFourObj) {
    for (int i = 0; i < 4; ++i) {
      if (relations[i].subject != i || relations[i].object != (i + 1) % 4) fail("relations must form the cycle");
    }
  }
  if (task == Task::kRel) {
    if (!rel_variant) fail("missing rel_variant");
    const auto& a = relations[0];
    const auto& b = relations[1];
    if (a.subject != 0 || a.object != 1 || b.subject != 2 || b.object != 1) fail("unexpected relation pairs");
    const auto want = *rel_variant == RelVariant::kSame ? a.relation : inverse(a.relation);
    if (b.relation != want) fail("second relation disagrees with rel_variant");
  } else if (rel_variant) {
    fail("rel_variant is only valid for rel records");
  }
}

PromptRecord make_two_obj(const std::string& subject, Relation relation, const std::string& object) {
  PromptRecord r;
  r.task = Task::kTwoObj;
  r.objects = {{subject, std::nullopt}, {object, std::nullopt}};
  r.relations = {{0, relation, 1}};
  r.prompt = "a photo of " + with_article(subject) + " " + rel(relation) + " " + with_article(object);
  return r;
}

PromptRecord derive_negation(const PromptRecord& two_obj) {
  if (two_obj.task != Task::kTwoObj) throw Error(ErrorCode::kInvalidArgument, "negation needs a two_obj source");
  two_obj.validate();
  PromptRecord r = two_obj;
  r.task = Task::kNeg;
  const auto negated = inverse(two_obj.relations[0].relation);
  r.relations = {{0, negated, 1}};
  const auto a = with_article(r.objects[0].name);
  const auto b = with_article(r.objects[1].name);
  r.prompt = "a photo of " + a + " and " + b + ", " + a + " is not " + rel(negated) + " " + b;
  return r;
}

std::vector<PromptRecord> gen_prompts(Task task, int n, std::uint64_t seed, const Vocabulary& vocab) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "prompt count must be non-negative");
  const auto rels = vocab_relations(vocab);
  const std::size_t need_objects = task == Task::kFourObj ? 4 : (task == Task::kThreeObj || task == Task::kRel) ? 3 : 2;
  if (vocab.objects.size() < need_objects) {
    throw Error(ErrorCode::kInsufficientVocab, std::string(task_id(task)) + " needs " + std::to_string(need_objects) +
                                                   " object classes, vocabulary has " +
                                                   std::to_string(vocab.objects.size()));
  }
  if (rels.empty()) throw Error(ErrorCode::kInsufficientVocab, "vocabulary has no relations");
  if ((task == Task::kThreeObj || task == Task::kFourObj) && rels.size() < kAllRelations.size()) {
    throw Error(ErrorCode::kInsufficientVocab, "chain tasks need all four relations");
  }
  if (task == Task::kPAB && vocab.colors.size() < 2) {
    throw Error(ErrorCode::kInsufficientVocab, "pab needs at least two colors");
  }

  std::vector<RelVariant> variants;
  if (task == Task::kRel) {
    for (int i = 0; i < n; ++i) variants.push_back(i < n / 2 ? RelVariant::kSame : RelVariant::kOpposite);
    auto rng = Rng::substream(seed, "poseval/rel/variants");
    rng.shuffle(variants);
  }

  std::vector<PromptRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto rng = Rng::substream(seed, "poseval/" + std::string(task_id(task)) + "/" + std::to_string(i));
    PromptRecord r;
    switch (task) {
      case Task::kTwoObj: {
        const auto names = pick_distinct(rng, vocab.objects, 2);
        r = make_two_obj(names[0], pick(rng, rels), names[1]);
        break;
      }
      case Task::kNeg: {
        const auto names = pick_distinct(rng, vocab.objects, 2);
        r = derive_negation(make_two_obj(names[0], pick(rng, rels), names[1]));
        break;
      }
      case Task::kThreeObj: r = make_chain(rng, 3, vocab); break;
      case Task::kFourObj: r = make_chain(rng, 4, vocab); break;
      case Task::kPAB: r = make_pab(rng, vocab, rels); break;
      case Task::kRel: r = make_rel(rng, vocab, rels, variants[i]); break;
    }
    r.seed = seed;
    r.index = i;
    out.push_back(std::move(r));
  }
  return out;
}

std::string record_to_jsonl(const PromptRecord& record) {
  nlohmann::ordered_json j;
  j["task"] = task_id(record.task);
  j["index"] = record.index;
  j["seed"] = record.seed;
  j["prompt"] = record.prompt;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : record.objects) {
    nlohmann::ordered_json e;
    e["class"] = o.name;
    e["attribute"] = o.attribute ? nlohmann::ordered_json(*o.attribute) : nlohmann::ordered_json();
    objects.push_back(e);
  }
  j["objects"] = objects;
  auto relations = nlohmann::ordered_json::array();
  for (const auto& r : record.relations) {
    relations.push_back({{"subject", r.subject}, {"relation", relation_text(r.relation)}, {"object", r.object}});
  }
  j["relations"] = relations;
  if (record.rel_variant) {
    j["rel_variant"] = *record.rel_variant == RelVariant::kSame ? "same" : "opposite";
  } else {
    j["rel_variant"] = nullptr;
  }
  return j.dump();
}

PromptRecord record_from_json(const nlohmann::json& j) {
  PromptRecord r;
  r.task = parse_task(j.at("task").get<std::string>());
  r.index = j.value("index", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.prompt = j.at("prompt").get<std::string>();
  for (const auto& o : j.at("objects")) {
    r.objects.push_back({o.at("class").get<std::string>(), optional_string(o, "attribute")});
  }
  for (const auto& e : j.at("relations")) {
    r.relations.push_back({e.at("subject").get<int>(), relation_from(e.at("relation")), e.at("object").get<int>()});
  }
  if (const auto v = optional_string(j, "rel_variant")) {
    if (*v == "same") {
      r.rel_variant = RelVariant::kSame;
    } else if (*v == "opposite") {
      r.rel_variant = RelVariant::kOpposite;
    } else {
      throw Error(ErrorCode::kFormat, "unknown rel_variant \"" + *v + "\"");
    }
  }
  r.validate();
  return r;
}

void write_records(const std::filesystem::path& path, const std::vector<PromptRecord>& records) {
  std::string bytes;
  for (const auto& r : records) bytes += record_to_jsonl(r) + "\n";
  io::write_file_atomic(path, bytes);
}

std::vector<PromptRecord> read_records(const std::filesystem::path& path) {
  return read_jsonl<PromptRecord>(path, record_from_json);
}

// ---------------------------------------------------------------------------
// Verification.

bool relation_holds(const Detection& a, Relation relation, const Detection& b, const EvalParams&) {
  return center_relation_holds(a.center(), relation, b.center());
}

Verdict evaluate_image(const std::vector<Detection>& detections, const PromptRecord& record,
                       const EvalParams& params) {
  for (const auto& o : record.objects) {
    if (o.name.empty()) throw Error(ErrorCode::kMissingClassMetadata, "record object without a class name");
    if (record.task == Task::kPAB && !o.attribute) {
      throw Error(ErrorCode::kMissingClassMetadata, "pab object \"" + o.name + "\" has no attribute");
    }
  }
  for (const auto& d : detections) {
    if (d.class_name.empty()) throw Error(ErrorCode::kMissingClassMetadata, "detection without a class name");
  }
  record.validate();

  // Candidate instances per record object.
  std::vector<std::vector<const Detection*>> candidates(record.objects.size());
  for (std::size_t i = 0; i < record.objects.size(); ++i) {
    const auto& o = record.objects[i];
    for (const auto& d : detections) {
      if (d.confidence < params.min_confidence || d.class_name != o.name) continue;
      if (record.task == Task::kPAB && d.attribute != o.attribute) continue;
      candidates[i].push_back(&d);
    }
  }

  Verdict v;
  for (std::size_t i = 0; i < record.objects.size(); ++i) {
    if (candidates[i].empty()) {
      v.reasons.push_back(record.task == Task::kPAB
                              ? "missing attributed instance: " + *record.objects[i].attribute + " " +
                                    record.objects[i].name
                              : "missing class: " + record.objects[i].name);
    }
  }
  if (!v.reasons.empty()) return v;

  auto describe = [&](const StatedRelation& s, bool held) {
    return record.objects[s.subject].name + (held ? " is " : " is not ") + rel(s.relation) + " " +
           record.objects[s.object].name;
  };

  switch (record.task) {
    case Task::kPAB:
    case Task::kNeg: {
      const auto& s = record.relations[0];
      bool any = false;
      for (const auto* a : candidates[s.subject]) {
        for (const auto* b : candidates[s.object]) any = any || relation_holds(*a, s.relation, *b, params);
      }
      if (record.task == Task::kPAB && !any) v.reasons.push_back(describe(s, false));
      if (record.task == Task::kNeg && any) v.reasons.push_back(describe(s, true));
      break;
    }
    default: {
      std::vector<const Detection*> best(record.objects.size());
      for (std::size_t i = 0; i < best.size(); ++i) {
        const auto by_confidence = [](const Detection* a, const Detection* b) { return a->confidence < b->confidence; };
        best[i] = *std::max_element(candidates[i].begin(), candidates[i].end(), by_confidence);
      }
      auto relations = record.relations;
      if (record.task == Task::kRel) {
        const auto r = relations[0].relation;
        relations[1].relation = *record.rel_variant == RelVariant::kSame ? r : inverse(r);
      }
      for (const auto& s : relations) {
        if (!relation_holds(*best[s.subject], s.relation, *best[s.object], params)) {
          v.reasons.push_back(describe(s, false));
        }
      }
      break;
    }
  }
  v.pass = v.reasons.empty();
  return v;
}

layout::SceneSpec scene_for(const PromptRecord& record) {
  layout::SceneSpec scene;
  for (const auto& o : record.objects) scene.objects.push_back({o.name, o.attribute});
  for (const auto& r : record.relations) {
    scene.relations.push_back({r.subject, record.task == Task::kNeg ? inverse(r.relation) : r.relation, r.object});
  }
  return scene;
}

std::vector<Detection> oracle_detector(const PromptRecord& record, const layout::LayoutPlan& plan) {
  if (plan.objects.empty() || plan.objects.size() != record.objects.size()) {
    throw Error(ErrorCode::kMisaligned, "layout has " + std::to_string(plan.objects.size()) +
                                            " objects, record has " + std::to_string(record.objects.size()));
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < record.objects.size(); ++i) {
    const auto& o = record.objects[i];
    const auto& lo = plan.objects[i];
    if (lower(lo.prompt).find(lower(o.name)) == std::string::npos) {
      throw Error(ErrorCode::kMisaligned, "layout object " + std::to_string(i) + " (\"" + lo.prompt +
                                              "\") does not name \"" + o.name + "\"");
    }
    out.push_back({o.name, static_cast<double>(lo.box.x_min), static_cast<double>(lo.box.y_min),
                   static_cast<double>(lo.box.x_max + 1), static_cast<double>(lo.box.y_max + 1), 1.0, o.attribute});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detections and results files.

std::string detections_to_jsonl(const ImageDetections& d) {
  nlohmann::ordered_json j;
  j["image"] = d.image;
  j["prompt_index"] = d.prompt_index;
  j["seed"] = d.seed;
  auto dets = nlohmann::ordered_json::array();
  for (const auto& x : d.detections) {
    nlohmann::ordered_json e;
    e["class"] = x.class_name;
    e["box"] = {x.x0, x.y0, x.x1, x.y1};
    e["confidence"] = x.confidence;
    e["attribute"] = x.attribute ? nlohmann::ordered_json(*x.attribute) : nlohmann::ordered_json();
    dets.push_back(e);
  }
  j["detections"] = dets;
  return j.dump();
}

ImageDetections detections_from_json(const nlohmann::json& j) {
  ImageDetections d;
  d.image = j.value("image", std::string());
  d.prompt_index = j.at("prompt_index").get<int>();
  d.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.at("detections")) {
    Detection x;
    x.class_name = e.at("class").get<std::string>();
    const auto& box = e.at("box");
    if (!box.is_array() || box.size() != 4) throw Error(ErrorCode::kFormat, "detection box needs 4 numbers");
    x.x0 = box[0].get<double>();
    x.y0 = box[1].get<double>();
    x.x1 = box[2].get<double>();
    x.y1 = box[3].get<double>();
    if (!(x.x0 < x.x1 && x.y0 < x.y1)) throw Error(ErrorCode::kFormat, "detection box must have x0<x1 and y0<y1");
    x.confidence = e.value("confidence", 1.0);
    x.attribute = optional_string(e, "attribute");
    d.detections.push_back(std::move(x));
  }
  return d;
}

std::vector<ImageDetections> read_detections(const std::filesystem::path& path) {
  return read_jsonl<ImageDetections>(path, detections_from_json);
}

std::string result_to_jsonl(const ImageResult& r) {
  nlohmann::ordered_json j;
  j["task"] = task_id(r.task);
  j["prompt_index"] = r.prompt_index;
  j["seed"] = r.seed;
  j["image"] = r.image;
  j["pass"] = r.verdict.pass;
  j["reasons"] = r.verdict.reasons;
  return j.dump();
}

ImageResult result_from_json(const nlohmann::json& j) {
  ImageResult r;
  r.task = parse_task(j.at("task").get<std::string>());
  r.prompt_index = j.at("prompt_index").get<int>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.image = j.value("image", std::string());
  r.verdict.pass = j.at("pass").get<bool>();
  r.verdict.reasons = j.value("reasons", std::vector<std::string>{});
  return r;
}

std::vector<ImageResult> read_results(const std::filesystem::path& path) {
  return read_jsonl<ImageResult>(path, result_from_json);
}

std::vector<ImageResult> evaluate_all(const std::vector<PromptRecord>& prompts,
                                      const std::vector<ImageDetections>& detections, const EvalParams& params) {
  std::map<int, const PromptRecord*> by_index;
  for (const auto& p : prompts) by_index[p.index] = &p;
  std::vector<ImageResult> out;
  for (const auto& d : detections) {
    const auto it = by_index.find(d.prompt_index);
    if (it == by_index.end()) {
      throw Error(ErrorCode::kMisaligned, "detections refer to prompt " + std::to_string(d.prompt_index));
    }
    auto verdict = evaluate_image(d.detections, *it->second, params);
    out.push_back({it->second->task, d.prompt_index, d.seed, d.image, std::move(verdict)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation.

double Report::average() const {
  if (scores.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : scores) sum += s.mean;
  return sum / static_cast<double>(scores.size());
}

Report aggregate(const std::vector<ImageResult>& results, std::string model_name) {
  Report report;
  report.model = std::move(model_name);
  for (auto task : kAllTasks) {
    std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> per_seed;  // seed -> (passed, total)
    std::size_t images = 0;
    for (const auto& r : results) {
      if (r.task != task) continue;
      auto& c = per_seed[r.seed];
      c.first += r.verdict.pass ? 1 : 0;
      c.second += 1;
      ++images;
    }
    if (per_seed.empty()) {
      report.warnings.push_back("no results for task " + std::string(task_label(task)) + "; column omitted");
      continue;
    }
    std::vector<double> acc;
    for (const auto& [seed, c] : per_seed) acc.push_back(static_cast<double>(c.first) / static_cast<double>(c.second));
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    var /= static_cast<double>(acc.size());
    report.scores.push_back({task, mean, std::sqrt(var), images, acc.size()});
  }
  return report;
}

std::string format_report(const Report& report) {
  std::string header = "Model";
  std::string row = report.model;
  for (const auto& s : report.scores) {
    header += "\t" + std::string(task_label(s.task));
    row += "\t" + fixed2(s.mean) + " \xC2\xB1 " + fixed2(s.stddev);
  }
  header += "\tAvg.";
  row += "\t" + fixed2(report.average());
  return header + "\n" + row + "\n";
}

}  // namespace stitch::poseval
