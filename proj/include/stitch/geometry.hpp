// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace stitch {

enum class Relation { kLeftOf, kRightOf, kAbove, kBelow };

inline constexpr std::array<Relation, 4> kAllRelations = {Relation::kLeftOf, Relation::kRightOf, Relation::kAbove,
                                                           Relation::kBelow};

std::string_view relation_text(Relation r);
std::optional<Relation> parse_relation(std::string_view text);
Relation inverse(Relation r);
bool is_horizontal(Relation r);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Dominant-axis center rule, image coordinates (y grows downward).
///
/// With dx = b.x - a.x and dy = b.y - a.y:
///   a left of b   iff dx > 0 and |dx| >= |dy|
///   a right of b  iff dx < 0 and |dx| >= |dy|
///   a above b     iff dy > 0 and |dy| >= |dx|
///   a below b     iff dy < 0 and |dy| >= |dx|
/// Coincident centers satisfy nothing.
bool center_relation_holds(Point a, Relation r, Point b);

}  // namespace stitch
