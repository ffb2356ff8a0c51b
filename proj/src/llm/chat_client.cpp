// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "forge/hash.hpp"
#include "forge/logging.hpp"

namespace forge::llm {

using Json = nlohmann::json;

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw InvalidArgument("base_url must start with http:// or https://: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw InvalidArgument("unsupported scheme in base_url: " + url);
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  const std::string authority = url.substr(host_start, path_start - host_start);
  if (authority.empty() || authority.front() == ':')
    throw InvalidArgument("base_url has no host: " + url);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {scheme + "://" + authority, path};
}

std::string next_request_id() {
  static const std::uint64_t process_salt = std::random_device{}();
  static std::atomic<std::uint64_t> counter{0};
  const auto n = counter.fetch_add(1);
  return "req-" + to_hex(fnv1a64(std::to_string(process_salt) + ":" + std::to_string(n)))
                      .substr(0, 12);
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::optional<std::string> env(const char* name) {
  if (const char* v = std::getenv(name); v && *v) return std::string(v);
  return std::nullopt;
}

}  // namespace

EndpointConfig EndpointConfig::from_env() {
  EndpointConfig c;
  c.base_url = env("FORGE_API_BASE").value_or("");
  c.model_name = env("FORGE_MODEL").value_or("");
  c.api_key = env("FORGE_API_KEY");
  return c;
}

void EndpointConfig::validate() const {
  parse_base_url(base_url);
  if (model_name.empty()) throw InvalidArgument("endpoint model name is empty");
  if (timeout_seconds <= 0) throw InvalidArgument("timeout_seconds must be positive");
  if (max_retries < 0) throw InvalidArgument("max_retries must be non-negative");
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index,
                                        double unit_random) {
  const double nominal = static_cast<double>(policy.base_delay.count()) *
                         std::pow(policy.multiplier, retry_index);
  const double jittered = nominal * (1.0 + policy.jitter * std::clamp(unit_random, 0.0, 1.0));
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(jittered)));
}

ConcurrencyLimiter& ConcurrencyLimiter::global() {
  static ConcurrencyLimiter limiter(4);
  return limiter;
}

void ConcurrencyLimiter::set_limit(std::size_t limit) {
  {
    std::lock_guard lock(mutex_);
    limit_ = limit ? limit : 1;
  }
  cv_.notify_all();
}

std::size_t ConcurrencyLimiter::limit() const {
  std::lock_guard lock(mutex_);
  return limit_;
}

std::size_t ConcurrencyLimiter::in_flight() const {
  std::lock_guard lock(mutex_);
  return in_flight_;
}

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return in_flight_ < limit_; });
  ++in_flight_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

HttpChatClient::HttpChatClient(EndpointConfig config, RetryPolicy policy, Sleeper sleeper,
                               ConcurrencyLimiter* limiter)
    : config_(std::move(config)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      limiter_(limiter ? limiter : &ConcurrencyLimiter::global()),
      rng_(policy.seed) {
  config_.validate();
  auto url = parse_base_url(config_.base_url);
  scheme_host_port_ = std::move(url.scheme_host_port);
  path_ = url.path + "/chat/completions";
}

double HttpChatClient::next_jitter() {
  std::lock_guard lock(rng_mutex_);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

ChatExchange HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw InvalidArgument("chat request needs at least one message");
  if (messages.back().role != Role::User)
    throw InvalidArgument("the last chat message must have role user");

  ChatExchange exchange;
  exchange.request_messages = messages;
  exchange.request_id = next_request_id();

  Json body = {{"model", config_.model_name}, {"temperature", config_.temperature}};
  Json msgs = Json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  const std::string payload = body.dump(-1, ' ', false, Json::error_handler_t::replace);

  httplib::Headers headers = {{"X-Request-Id", exchange.request_id}};
  if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);

  log::debug("POST " + scheme_host_port_ + path_ + " model=" + config_.model_name +
             " messages=" + std::to_string(messages.size()) + " request_id=" +
             exchange.request_id + (config_.api_key ? " auth=Bearer <redacted>" : ""));

  const auto started = std::chrono::steady_clock::now();
  std::chrono::milliseconds previous_delay{0};
  std::string last_failure;
  const int max_attempts = config_.max_retries + 1;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    exchange.attempt_count = attempt;
    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      ConcurrencyLimiter::Permit permit(*limiter_);
      httplib::Client http(scheme_host_port_);
      http.set_connection_timeout(config_.timeout_seconds, 0);
      http.set_read_timeout(config_.timeout_seconds, 0);
      http.set_write_timeout(config_.timeout_seconds, 0);
      res = http.Post(path_, headers, payload, "application/json");
    }

    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
    } else if (retryable_status(res->status)) {
      last_failure = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
    } else if (res->status < 200 || res->status >= 300) {
      throw ProtocolError("HTTP " + std::to_string(res->status) + " from " + config_.model_name +
                              " (" + exchange.request_id + "): " + excerpt(res->body),
                          exchange.request_id, res->status, attempt);
    } else {
      Json reply;
      try {
        reply = Json::parse(res->body);
      } catch (const Json::parse_error&) {
        throw ProtocolError("response is not JSON (" + exchange.request_id +
                                "): " + excerpt(res->body),
                            exchange.request_id, res->status, attempt);
      }
      if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
          reply["choices"].empty())
        throw ProtocolError("response has no choices (" + exchange.request_id + ")",
                            exchange.request_id, res->status, attempt);
      const Json& choice = reply["choices"][0];
      const Json* content = nullptr;
      if (choice.contains("message") && choice["message"].is_object() &&
          choice["message"].contains("content"))
        content = &choice["message"]["content"];
      if (!content || !(content->is_string() || content->is_null()))
        throw ProtocolError("first choice has no message content (" + exchange.request_id + ")",
                            exchange.request_id, res->status, attempt);
      exchange.response_text = content->is_string() ? content->get<std::string>() : "";
      exchange.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
      return exchange;
    }

    if (attempt == max_attempts) break;
    auto delay = std::max(previous_delay, backoff_delay(policy_, attempt - 1, next_jitter()));
    previous_delay = delay;
    log::warn("request " + exchange.request_id + " attempt " + std::to_string(attempt) +
              " failed (" + last_failure + "); retrying in " + std::to_string(delay.count()) +
              " ms");
    sleeper_(delay);
  }
  throw TransportError("request " + exchange.request_id + " to " + config_.model_name +
                           " failed after " + std::to_string(exchange.attempt_count) +
                           " attempts: " + last_failure,
                       exchange.request_id, exchange.attempt_count);
}

ChatExchange chat_complete(const EndpointConfig& config, const std::vector<ChatMessage>& messages) {
  HttpChatClient client(config);
  return client.complete(messages);
}

}  // namespace forge::llm
