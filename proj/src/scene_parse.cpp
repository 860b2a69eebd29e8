// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <optional>

#include "stitch/layout.hpp"
#include "stitch/vocab.hpp"

namespace stitch::layout {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

bool strip_prefix(std::string& s, std::string_view prefix) {
  if (!s.starts_with(prefix)) return false;
  s.erase(0, prefix.size());
  return true;
}

bool strip_suffix(std::string& s, std::string_view suffix) {
  if (!s.ends_with(suffix)) return false;
  s.erase(s.size() - suffix.size());
  return true;
}

struct NounPhrase {
  std::string name;
  std::optional<std::string> attribute;
};

std::optional<NounPhrase> noun_phrase(std::string text) {
  text = trim(std::move(text));
  for (bool changed = true; changed;) {
    changed = false;
    for (std::string_view p : {"and ", "a photo of ", "an image of ", "a picture of ", "photo of ", "a ", "an ",
                               "the "}) {
      if (strip_prefix(text, p)) {
        text = trim(std::move(text));
        changed = true;
      }
    }
  }
  for (std::string_view s : {" is", " are"}) strip_suffix(text, s);
  text = trim(std::move(text));
  if (text.empty()) return std::nullopt;
  NounPhrase np;
  const auto space = text.find(' ');
  if (space != std::string::npos) {
    const auto& colors = Vocabulary::builtin().colors;
    const auto head = text.substr(0, space);
    if (std::find(colors.begin(), colors.end(), head) != colors.end()) {
      np.attribute = head;
      text = trim(text.substr(space + 1));
    }
  }
  np.name = text;
  return np;
}

class SceneBuilder {
 public:
  int add(const NounPhrase& np) {
    for (std::size_t i = 0; i < scene_.objects.size(); ++i) {
      if (scene_.objects[i].name == np.name) {
        if (!scene_.objects[i].attribute && np.attribute) scene_.objects[i].attribute = np.attribute;
        return static_cast<int>(i);
      }
    }
    scene_.objects.push_back({np.name, np.attribute});
    return static_cast<int>(scene_.objects.size() - 1);
  }

  void relate(int subject, Relation r, int object) {
    if (subject != object) scene_.relations.push_back({subject, r, object});
  }

  std::optional<Relation> relation_between(int subject, int object) const {
    for (const auto& rel : scene_.relations) {
      if (rel.subject == subject && rel.object == object) return rel.relation;
      if (rel.subject == object && rel.object == subject) return inverse(rel.relation);
    }
    return std::nullopt;
  }

  SceneSpec take() { return std::move(scene_); }

 private:
  SceneSpec scene_;
};

struct RelativeClause {
  int subject;
  bool same;
  int anchor;
  int reference;
};

// "<subj> on the same side of <anchor> as <reference>"
std::optional<RelativeClause> parse_relative(const std::string& clause, SceneBuilder& builder) {
  static constexpr std::pair<std::string_view, bool> kForms[] = {{" on the same side of ", true},
                                                                 {" on the other side of ", false},
                                                                 {" on the opposite side of ", false},
                                                                 {" on the contrary side of ", false}};
  const std::string padded = " " + clause;
  for (const auto& [form, same] : kForms) {
    const auto pos = padded.find(form);
    if (pos == std::string::npos) continue;
    const auto rest = padded.substr(pos + form.size());
    std::size_t split = std::string::npos;
    std::size_t split_len = 0;
    for (std::string_view prep : {" as ", " for ", " from ", " to "}) {
      const auto p = rest.find(prep);
      if (p != std::string::npos && p < split) {
        split = p;
        split_len = prep.size();
      }
    }
    if (split == std::string::npos) return std::nullopt;
    auto subj = noun_phrase(padded.substr(0, pos));
    auto anchor = noun_phrase(rest.substr(0, split));
    auto ref = noun_phrase(rest.substr(split + split_len));
    if (!subj || !anchor || !ref) return std::nullopt;
    return RelativeClause{builder.add(*subj), same, builder.add(*anchor), builder.add(*ref)};
  }
  return std::nullopt;
}

bool parse_relation_clause(const std::string& clause, SceneBuilder& builder) {
  const std::string padded = " " + clause + " ";
  std::size_t best = std::string::npos;
  Relation rel = Relation::kLeftOf;
  for (auto r : kAllRelations) {
    const auto pos = padded.find(" " + std::string(relation_text(r)) + " ");
    if (pos != std::string::npos && pos < best) {
      best = pos;
      rel = r;
    }
  }
  if (best == std::string::npos) return false;
  auto left = trim(padded.substr(0, best));
  const auto right = padded.substr(best + relation_text(rel).size() + 2);
  bool negated = false;
  for (std::string_view neg : {" is not", " are not", " not"}) {
    if (strip_suffix(left, neg)) {
      negated = true;
      break;
    }
  }
  auto subj = noun_phrase(left);
  auto obj = noun_phrase(right);
  if (!subj || !obj) return false;
  const int s = builder.add(*subj);
  const int o = builder.add(*obj);
  builder.relate(s, negated ? inverse(rel) : rel, o);
  return true;
}

}  // namespace

SceneSpec parse_scene(std::string_view prompt) {
  std::string text = lower(prompt);
  replace_all(text, "to the left of", "left of");
  replace_all(text, "to the right of", "right of");
  replace_all(text, "on the left of", "left of");
  replace_all(text, "on the right of", "right of");
  replace_all(text, "on top of", "above");
  for (char& c : text) {
    if (c == '.' || c == ';' || c == '\n' || c == '!') c = ',';
  }

  SceneBuilder builder;
  std::vector<RelativeClause> relatives;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const auto clause = trim(text.substr(start, end - start));
    start = end + 1;
    if (clause.empty()) continue;
    if (auto rc = parse_relative(clause, builder)) {
      relatives.push_back(*rc);
      continue;
    }
    if (parse_relation_clause(clause, builder)) continue;
    std::string list = " " + clause + " ";
    replace_all(list, " and ", ",");
    std::size_t s = 0;
    while (s < list.size()) {
      auto e = list.find(',', s);
      if (e == std::string::npos) e = list.size();
      if (auto np = noun_phrase(list.substr(s, e - s))) builder.add(*np);
      s = e + 1;
    }
  }
  // Relative clauses may precede the relation they refer to.
  for (const auto& rc : relatives) {
    if (auto base = builder.relation_between(rc.reference, rc.anchor)) {
      builder.relate(rc.subject, rc.same ? *base : inverse(*base), rc.anchor);
    }
  }
  return builder.take();
}

}  // namespace stitch::layout
