// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "stitch/error.hpp"
#include "stitch/io.hpp"

namespace stitch::config {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Context {
  std::string source;
  int line = 0;
  std::string key;

  [[noreturn]] void fail(ErrorCode code, const std::string& why) const {
    throw Error(code, source + ":" + std::to_string(line) + ": " + key + ": " + why);
  }
};

long long parse_int(const Context& ctx, const std::string& v, long long lo, long long hi) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    ctx.fail(ErrorCode::kTypeMismatch, "expected an integer, got \"" + v + "\"");
  }
  if (out < lo || out > hi) {
    ctx.fail(ErrorCode::kTypeMismatch,
             "value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return out;
}

std::uint64_t parse_u64(const Context& ctx, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    ctx.fail(ErrorCode::kTypeMismatch, "expected a non-negative integer, got \"" + v + "\"");
  }
  return out;
}

double parse_real(const Context& ctx, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof()) ctx.fail(ErrorCode::kTypeMismatch, "expected a number, got \"" + v + "\"");
  return out;
}

bool parse_bool(const Context& ctx, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  ctx.fail(ErrorCode::kTypeMismatch, "expected a boolean, got \"" + v + "\"");
}

std::string unquote(const Context& ctx, const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
    if (v.back() != v.front()) ctx.fail(ErrorCode::kTypeMismatch, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  return v;
}

using Setter = std::function<void(Settings&, const Context&, const std::string&)>;

Setter int_key(int pipeline::StitchConfig::*field, long long lo, long long hi) {
  return [=](Settings& s, const Context& c, const std::string& v) {
    s.stitch.*field = static_cast<int>(parse_int(c, v, lo, hi));
  };
}

Setter head_key(int model::HeadSelector::*field) {
  return [=](Settings& s, const Context& c, const std::string& v) {
    s.stitch.cutout_head.*field = static_cast<int>(parse_int(c, v, 0, 1 << 20));
  };
}

Setter bool_key(bool pipeline::StitchConfig::*field) {
  return [=](Settings& s, const Context& c, const std::string& v) { s.stitch.*field = parse_bool(c, v); };
}

Setter string_key(std::string Settings::*field) {
  return [=](Settings& s, const Context& c, const std::string& v) { s.*field = unquote(c, v); };
}

Setter llm_key(std::string layout::LlmSettings::*field) {
  return [=](Settings& s, const Context& c, const std::string& v) { s.llm.*field = unquote(c, v); };
}

const std::map<std::string, Setter>& setters() {
  using pipeline::StitchConfig;
  constexpr long long kMaxSteps = 100000;
  static const std::map<std::string, Setter> table = {
      {"s_steps", int_key(&StitchConfig::s_steps, 1, kMaxSteps)},
      {"t_steps", int_key(&StitchConfig::t_steps, 2, kMaxSteps)},
      {"eta",
       [](Settings& s, const Context& c, const std::string& v) {
         const double eta = parse_real(c, v);
         if (!(eta > 0.0 && eta <= 1.0)) c.fail(ErrorCode::kTypeMismatch, "eta must lie in (0, 1], got " + v);
         s.stitch.eta = eta;
       }},
      {"select_eta",
       [](Settings& s, const Context& c, const std::string& v) {
         const double eta = parse_real(c, v);
         if (!(eta > 0.0 && eta <= 1.0)) c.fail(ErrorCode::kTypeMismatch, "select_eta must lie in (0, 1], got " + v);
         s.stitch.select_eta = eta;
       }},
      {"kappa",
       [](Settings& s, const Context& c, const std::string& v) {
         const auto k = parse_int(c, v, 1, 999);
         if (k % 2 == 0) c.fail(ErrorCode::kTypeMismatch, "kappa must be odd, got " + v);
         s.stitch.kappa = static_cast<int>(k);
       }},
      {"canvas", int_key(&StitchConfig::canvas, 2, 4096)},
      {"cutout_block", head_key(&model::HeadSelector::block)},
      {"cutout_head", head_key(&model::HeadSelector::head)},
      {"shared_noise", bool_key(&StitchConfig::shared_noise)},
      {"seed", [](Settings& s, const Context& c, const std::string& v) { s.stitch.seed = parse_u64(c, v); }},
      {"restrict_to_box", bool_key(&StitchConfig::restrict_to_box)},
      {"threads", int_key(&StitchConfig::threads, 0, 1024)},
      {"model", string_key(&Settings::model)},
      {"llm.base_url", llm_key(&layout::LlmSettings::base_url)},
      {"llm.model", llm_key(&layout::LlmSettings::model)},
      {"llm.api_key_env",
       [](Settings& s, const Context& c, const std::string& v) {
         const auto name = unquote(c, v);
         if (name != layout::kApiKeyEnv) {
           c.fail(ErrorCode::kInvalidConfig, std::string("the API key is read only from ") + layout::kApiKeyEnv);
         }
         s.llm.api_key_env = name;
       }},
  };
  return table;
}

}  // namespace

Settings parse_config(std::string_view text, std::string_view source) {
  Settings settings;
  Context ctx{std::string(source), 0, {}};
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++ctx.line;
    ctx.key.clear();
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail(ErrorCode::kFormat, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail(ErrorCode::kFormat, "expected key = value");
    const auto name = trim(std::string_view(line).substr(0, eq));
    ctx.key = section.empty() ? name : section + "." + name;
    const auto it = setters().find(ctx.key);
    if (it == setters().end()) ctx.fail(ErrorCode::kUnknownKey, "unknown key");
    auto value = trim(std::string_view(line).substr(eq + 1));
    // Trailing comments on unquoted values.
    if (!value.empty() && value.front() != '"' && value.front() != '\'') {
      const auto hash = value.find(" #");
      if (hash != std::string::npos) value = trim(std::string_view(value).substr(0, hash));
    }
    it->second(settings, ctx, value);
  }
  settings.stitch.validate();
  return settings;
}

Settings load_config(const std::filesystem::path& path) { return parse_config(io::read_file(path), path.string()); }

std::string format_config(const Settings& s) {
  char eta[32];
  std::snprintf(eta, sizeof eta, "%.17g", s.stitch.eta);
  const auto& c = s.stitch;
  std::string out;
  out += "s_steps = " + std::to_string(c.s_steps) + "\n";
  out += "t_steps = " + std::to_string(c.t_steps) + "\n";
  out += std::string("eta = ") + eta + "\n";
  std::snprintf(eta, sizeof eta, "%.17g", s.stitch.select_eta);
  out += std::string("select_eta = ") + eta + "\n";
  out += "kappa = " + std::to_string(c.kappa) + "\n";
  out += "canvas = " + std::to_string(c.canvas) + "\n";
  out += "cutout_block = " + std::to_string(c.cutout_head.block) + "\n";
  out += "cutout_head = " + std::to_string(c.cutout_head.head) + "\n";
  out += std::string("shared_noise = ") + (c.shared_noise ? "true" : "false") + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += std::string("restrict_to_box = ") + (c.restrict_to_box ? "true" : "false") + "\n";
  out += "threads = " + std::to_string(c.threads) + "\n";
  out += "model = \"" + s.model + "\"\n";
  out += "\n[llm]\n";
  out += "base_url = \"" + s.llm.base_url + "\"\n";
  out += "model = \"" + s.llm.model + "\"\n";
  out += "api_key_env = \"" + s.llm.api_key_env + "\"\n";
  return out;
}

}  // namespace stitch::config
