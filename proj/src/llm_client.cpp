// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <cstdlib>

#include "stitch/error.hpp"
#include "stitch/layout.hpp"

namespace stitch::layout {

std::string HttpLayoutProvider::complete(const ChatRequest& request) {
  // Split "https://host:port/v1" into the origin and the path prefix.
  const auto& url = settings_.base_url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(origin);
  client.set_connection_timeout(settings_.timeout_seconds);
  client.set_read_timeout(settings_.timeout_seconds);

  httplib::Headers headers;
  if (const char* key = std::getenv(kApiKeyEnv); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const nlohmann::json body = {
      {"model", settings_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                              {{"role", "user"}, {"content", request.user}}})},
  };
  auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kProviderUnavailable,
                "request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kProviderUnavailable, "LLM service returned HTTP " + std::to_string(res->status));
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
    throw Error(ErrorCode::kMalformedLLMResponse, "chat completion lacks choices");
  }
  const auto& message = reply["choices"][0]["message"];
  if (!message.contains("content") || !message["content"].is_string()) {
    throw Error(ErrorCode::kMalformedLLMResponse, "chat completion lacks message content");
  }
  return message["content"].get<std::string>();
}

}  // namespace stitch::layout
