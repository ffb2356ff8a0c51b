// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"

namespace forge::llm {

struct EndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model_name;
  std::optional<std::string> api_key;
  int timeout_seconds = 60;
  int max_retries = 3;
  double temperature = 0.0;

  /// Reads FORGE_API_BASE, FORGE_API_KEY and FORGE_MODEL. Unset variables
  /// leave the corresponding field empty.
  static EndpointConfig from_env();

  /// Throws InvalidArgument on a malformed base_url or out-of-range field.
  void validate() const;
};

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatExchange {
  std::vector<ChatMessage> request_messages;
  std::string response_text;
  std::int64_t latency_ms = 0;
  int attempt_count = 0;
  std::string request_id;
};

/// Retries exhausted on connection failures, timeouts, HTTP 5xx or 429.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, std::string request_id, int attempts)
      : Error(message), request_id_(std::move(request_id)), attempts_(attempts) {}
  const std::string& request_id() const { return request_id_; }
  int attempts() const { return attempts_; }

 private:
  std::string request_id_;
  int attempts_;
};

/// Non-retryable response: 4xx other than 429, unparsable JSON, no choices.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& message, std::string request_id, int status, int attempts)
      : Error(message), request_id_(std::move(request_id)), status_(status), attempts_(attempts) {}
  const std::string& request_id() const { return request_id_; }
  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  std::string request_id_;
  int status_;
  int attempts_;
};

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double multiplier = 2.0;
  double jitter = 0.5;  // fraction of the nominal delay, in [0, 1]
  std::uint64_t seed = 0x5eed;
};

/// Nominal delay before retry `retry_index` (0-based) scaled by
/// (1 + jitter * unit_random). With multiplier >= 1 + jitter the sequence is
/// non-decreasing for any random draws.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index,
                                        double unit_random);

/// Process-wide cap on in-flight requests.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t limit) : limit_(limit ? limit : 1) {}

  static ConcurrencyLimiter& global();  // default limit 4

  void set_limit(std::size_t limit);
  std::size_t limit() const;
  std::size_t in_flight() const;

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& owner) : owner_(&owner) { owner_->acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { owner_->release(); }

   private:
    ConcurrencyLimiter* owner_;
  };

 private:
  void acquire();
  void release();

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t in_flight_ = 0;
};

/// Anything that can answer a chat request. Implementations must be safe to
/// call from several threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatExchange complete(const std::vector<ChatMessage>& messages) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// OpenAI-compatible `POST {base_url}/chat/completions` client.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config, RetryPolicy policy = {}, Sleeper sleeper = {},
                          ConcurrencyLimiter* limiter = nullptr);

  ChatExchange complete(const std::vector<ChatMessage>& messages) override;

  const EndpointConfig& config() const { return config_; }

 private:
  double next_jitter();

  EndpointConfig config_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  ConcurrencyLimiter* limiter_;
  std::string scheme_host_port_;
  std::string path_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

/// One-shot helper around HttpChatClient with the default retry policy.
ChatExchange chat_complete(const EndpointConfig& config, const std::vector<ChatMessage>& messages);

}  // namespace forge::llm
