// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stitch/layout.hpp"
#include "stitch/pipeline.hpp"

namespace stitch::config {

struct Settings {
  pipeline::StitchConfig stitch;
  std::string model = "toy";
  layout::LlmSettings llm;
};

/// Flat key/value text:
///
///   # comment            (also ';')
///   s_steps = 6
///   [llm]                (section prefix for the keys that follow)
///   base_url = "http://localhost:8000/v1"
///
/// Keys: s_steps, t_steps, eta, select_eta, kappa, canvas, cutout_block, cutout_head,
/// shared_noise, seed, restrict_to_box, threads, model, llm.base_url,
/// llm.model, llm.api_key_env. "[llm] model" and "llm.model" are the same key.
/// Throws kUnknownKey, kTypeMismatch (bad value or per-key range) and
/// kInvalidConfig (cross-key invariants such as s_steps < t_steps).
Settings parse_config(std::string_view text, std::string_view source = "<config>");
Settings load_config(const std::filesystem::path& path);

/// Canonical text that parses back to the same settings.
std::string format_config(const Settings& settings);

}  // namespace stitch::config
