// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/vocab.hpp"

#include <cctype>
#include <fstream>

namespace stitch {
namespace {

std::vector<std::string> read_list(const std::filesystem::path& path, std::vector<std::string> fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    line = line.substr(start);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace

const Vocabulary& Vocabulary::builtin() {
  static const Vocabulary vocab{
      {
      "person",
      "bicycle",
      "car",
      "motorcycle",
      "airplane",
      "bus",
      "train",
      "truck",
      "boat",
      "traffic light",
      "fire hydrant",
      "stop sign",
      "parking meter",
      "bench",
      "bird",
      "cat",
      "dog",
      "horse",
      "sheep",
      "cow",
      "elephant",
      "bear",
      "zebra",
      "giraffe",
      "backpack",
      "umbrella",
      "handbag",
      "tie",
      "suitcase",
      "frisbee",
      "skis",
      "snowboard",
      "sports ball",
      "kite",
      "baseball bat",
      "baseball glove",
      "skateboard",
      "surfboard",
      "tennis racket",
      "bottle",
      "wine glass",
      "cup",
      "fork",
      "knife",
      "spoon",
      "bowl",
      "banana",
      "apple",
      "sandwich",
      "orange",
      "broccoli",
      "carrot",
      "hot dog",
      "pizza",
      "donut",
      "cake",
      "chair",
      "couch",
      "potted plant",
      "bed",
      "dining table",
      "toilet",
      "tv",
      "laptop",
      "computer mouse",
      "tv remote",
      "computer keyboard",
      "cell phone",
      "microwave",
      "oven",
      "toaster",
      "sink",
      "refrigerator",
      "book",
      "clock",
      "vase",
      "scissors",
      "teddy bear",
      "hair drier",
      "toothbrush",
      },
      {"left of", "right of", "above", "below"},
      {"red", "orange", "yellow", "green", "blue", "purple", "pink", "brown", "black", "white"},
  };
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& dir) {
  const auto& base = builtin();
  return Vocabulary{read_list(dir / "objects.txt", base.objects), read_list(dir / "relations.txt", base.relations),
                    read_list(dir / "colors.txt", base.colors)};
}

std::string with_article(const std::string& noun) {
  if (noun.empty()) return noun;
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun.front())));
  const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  return (vowel ? "an " : "a ") + noun;
}

}  // namespace stitch
