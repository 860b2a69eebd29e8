// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace stitch {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace stitch
