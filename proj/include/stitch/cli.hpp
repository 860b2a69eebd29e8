// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "stitch/model.hpp"

namespace stitch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Domain errors are
/// reported on err and give 1; usage errors print the synopsis on err and
/// give 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Adapter for a config "model" value. Only the toy model ("toy",
/// "toy-mmdit") is runnable in this build.
std::unique_ptr<model::ModelAdapter> make_model(const std::string& name);

}  // namespace stitch::cli
