// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/geometry.hpp"

#include <cmath>

namespace stitch {

std::string_view relation_text(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return "left of";
    case Relation::kRightOf: return "right of";
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
  }
  return "";
}

std::optional<Relation> parse_relation(std::string_view text) {
  for (auto r : kAllRelations) {
    if (relation_text(r) == text) return r;
  }
  return std::nullopt;
}

Relation inverse(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return Relation::kRightOf;
    case Relation::kRightOf: return Relation::kLeftOf;
    case Relation::kAbove: return Relation::kBelow;
    case Relation::kBelow: return Relation::kAbove;
  }
  return r;
}

bool is_horizontal(Relation r) { return r == Relation::kLeftOf || r == Relation::kRightOf; }

bool center_relation_holds(Point a, Relation r, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double adx = std::abs(dx);
  const double ady = std::abs(dy);
  switch (r) {
    case Relation::kLeftOf: return dx > 0 && adx >= ady;
    case Relation::kRightOf: return dx < 0 && adx >= ady;
    case Relation::kAbove: return dy > 0 && ady >= adx;
    case Relation::kBelow: return dy < 0 && ady >= adx;
  }
  return false;
}

}  // namespace stitch
