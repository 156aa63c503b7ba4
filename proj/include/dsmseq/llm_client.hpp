#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dsmseq {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  /// Forwarded verbatim into the request body (temperature, max_tokens...).
  /// Empty means provider defaults.
  nlohmann::json params = nlohmann::json::object();

  static ChatRequest single_turn(std::string model, std::string prompt, nlohmann::json params = nlohmann::json::object());
};

struct ChatUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int total_tokens = 0;
  /// Transport-level retries spent on this call.
  int retries = 0;
};

struct ChatResponse {
  std::string text;
  ChatUsage usage;
};

class LlmError : public std::runtime_error {
 public:
  enum class Kind { Auth, Timeout, Transport, RateLimited, ServerError, Malformed, ScriptExhausted, Config };

  LlmError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Chat-completion backend. Implementations must be safe to call from
/// independent optimization runs concurrently.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Replays a fixed list of responses in order and records every prompt it
/// receives. The (n+1)-th call on an n-response script throws ScriptExhausted.
class ScriptedProvider final : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}

  ChatResponse complete(const ChatRequest& request) override;

  /// Text of the user message of every call so far.
  std::vector<std::string> recorded_prompts() const;
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

std::shared_ptr<ScriptedProvider> scripted_stub(std::vector<std::string> responses);

struct ProviderConfig {
  /// Base URL of an OpenAI-compatible API, e.g. "https://api.openai.com/v1".
  std::string endpoint;
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 4;
  std::chrono::milliseconds backoff{1000};
  /// 0 disables client-side rate limiting.
  double requests_per_minute = 0.0;

  void validate() const;
};

inline constexpr const char* kEndpointEnv = "DSMSEQ_LLM_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "DSMSEQ_LLM_API_KEY";
inline constexpr const char* kModelEnv = "DSMSEQ_LLM_MODEL";

/// Reads endpoint, key and model from DSMSEQ_LLM_ENDPOINT, DSMSEQ_LLM_API_KEY
/// and DSMSEQ_LLM_MODEL. Throws LlmError(Config) when endpoint or model is unset.
ProviderConfig provider_config_from_env();

/// Token bucket: `capacity` burst, refilled at `rate_per_minute`.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double rate_per_minute, double capacity = 1.0);

  /// Blocks until a token is available (no-op when the rate is 0).
  void acquire();
  /// Non-blocking variant; returns the wait needed, zero when a token was taken.
  Clock::duration try_acquire(Clock::time_point now);

 private:
  std::mutex mu_;
  double rate_per_second_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

/// Replaces every occurrence of `secret` in `text` with "[REDACTED]".
std::string redact(std::string text, const std::string& secret);

/// OpenAI-compatible chat-completions client over HTTP(S). Retries transport
/// errors, timeouts, HTTP 429 and 5xx with exponential backoff; 401/403 fail
/// immediately.
class OpenAiProvider final : public ChatProvider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit OpenAiProvider(ProviderConfig config, Sleeper sleeper = {});

  ChatResponse complete(const ChatRequest& request) override;

  const ProviderConfig& config() const noexcept { return config_; }

  /// Audit mode: every request and response body is passed to `sink` with
  /// the API key redacted.
  void set_audit_sink(std::function<void(const std::string&)> sink) { audit_ = std::move(sink); }

  /// Request body as sent on the wire.
  static nlohmann::json request_body(const ChatRequest& request, const std::string& default_model);
  /// Extracts the first choice text and usage; throws LlmError(Malformed).
  static ChatResponse parse_response_body(const std::string& body);

 private:
  ProviderConfig config_;
  Sleeper sleep_;
  RateLimiter limiter_;
  std::function<void(const std::string&)> audit_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace dsmseq
