// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stitch {

/// Object classes, relations and color attributes used for prompt generation.
/// The built-in default is the 80-class COCO object list, the four positional
/// relations and ten basic colors; the same lists ship as data/vocab/*.txt.
struct Vocabulary {
  std::vector<std::string> objects;
  std::vector<std::string> relations;
  std::vector<std::string> colors;

  static const Vocabulary& builtin();

  /// Reads objects.txt, relations.txt and colors.txt (one entry per line,
  /// blank lines and '#' comments ignored). Missing files keep the builtin list.
  static Vocabulary load(const std::filesystem::path& dir);
};

/// "a dog", "an apple".
std::string with_article(const std::string& noun);

}  // namespace stitch
