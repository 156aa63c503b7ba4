#include "dsmseq/llm_client.hpp"

#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace dsmseq {

ChatRequest ChatRequest::single_turn(std::string model, std::string prompt, nlohmann::json params) {
  ChatRequest r;
  r.model = std::move(model);
  r.messages.push_back({"user", std::move(prompt)});
  r.params = std::move(params);
  return r;
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  std::string prompt;
  for (const auto& m : request.messages)
    if (m.role == "user") prompt = m.content;
  prompts_.push_back(std::move(prompt));
  if (next_ >= responses_.size()) {
    throw LlmError(LlmError::Kind::ScriptExhausted,
                   "script exhausted after " + std::to_string(responses_.size()) + " responses");
  }
  return {responses_[next_++], {}};
}

std::vector<std::string> ScriptedProvider::recorded_prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return prompts_.size();
}

std::shared_ptr<ScriptedProvider> scripted_stub(std::vector<std::string> responses) {
  return std::make_shared<ScriptedProvider>(std::move(responses));
}

void ProviderConfig::validate() const {
  if (endpoint.empty()) throw LlmError(LlmError::Kind::Config, "provider endpoint is not set");
  if (max_retries < 0) throw LlmError(LlmError::Kind::Config, "max_retries must be >= 0");
  if (timeout.count() <= 0) throw LlmError(LlmError::Kind::Config, "timeout must be positive");
  if (backoff.count() < 0) throw LlmError(LlmError::Kind::Config, "backoff must be non-negative");
}

ProviderConfig provider_config_from_env() {
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  ProviderConfig cfg;
  cfg.endpoint = get(kEndpointEnv);
  cfg.api_key = get(kApiKeyEnv);
  cfg.model = get(kModelEnv);
  if (cfg.endpoint.empty()) throw LlmError(LlmError::Kind::Config, std::string(kEndpointEnv) + " is not set");
  if (cfg.model.empty()) throw LlmError(LlmError::Kind::Config, std::string(kModelEnv) + " is not set");
  return cfg;
}

RateLimiter::RateLimiter(double rate_per_minute, double capacity)
    : rate_per_second_(rate_per_minute / 60.0), capacity_(capacity), tokens_(capacity), last_(Clock::now()) {}

RateLimiter::Clock::duration RateLimiter::try_acquire(Clock::time_point now) {
  std::lock_guard lock(mu_);
  if (rate_per_second_ <= 0.0) return Clock::duration::zero();
  const std::chrono::duration<double> elapsed = now - last_;
  if (elapsed.count() > 0) {
    tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_per_second_);
    last_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return Clock::duration::zero();
  }
  const std::chrono::duration<double> wait((1.0 - tokens_) / rate_per_second_);
  return std::chrono::duration_cast<Clock::duration>(wait) + Clock::duration(1);
}

void RateLimiter::acquire() {
  for (;;) {
    const auto wait = try_acquire(Clock::now());
    if (wait == Clock::duration::zero()) return;
    std::this_thread::sleep_for(wait);
  }
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  static const std::string kMask = "[REDACTED]";
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + kMask.size())) {
    text.replace(pos, secret.size(), kMask);
  }
  return text;
}

namespace {

// Splits "https://host:port/base/path" into ("https://host:port", "/base/path").
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw LlmError(LlmError::Kind::Config, "endpoint must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

}  // namespace

OpenAiProvider::OpenAiProvider(ProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      sleep_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      limiter_(config_.requests_per_minute) {
  config_.validate();
  std::tie(scheme_host_port_, path_) = split_endpoint(config_.endpoint);
}

nlohmann::json OpenAiProvider::request_body(const ChatRequest& request, const std::string& default_model) {
  nlohmann::json body = request.params.is_object() ? request.params : nlohmann::json::object();
  body["model"] = request.model.empty() ? default_model : request.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  return body;
}

ChatResponse OpenAiProvider::parse_response_body(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw LlmError(LlmError::Kind::Malformed, "provider response is not JSON");
  }
  const auto* content = [&]() -> const nlohmann::json* {
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) return nullptr;
    const auto& choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) return nullptr;
    return &choice["message"]["content"];
  }();
  if (content == nullptr || !content->is_string()) {
    throw LlmError(LlmError::Kind::Malformed, "provider response has no choices[0].message.content string");
  }
  ChatResponse out;
  out.text = content->get<std::string>();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    const auto& u = doc["usage"];
    out.usage.prompt_tokens = u.value("prompt_tokens", 0);
    out.usage.completion_tokens = u.value("completion_tokens", 0);
    out.usage.total_tokens = u.value("total_tokens", 0);
  }
  return out;
}

ChatResponse OpenAiProvider::complete(const ChatRequest& request) {
  const auto body = request_body(request, config_.model).dump();
  if (audit_) audit_(redact("request " + body, config_.api_key));

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  LlmError last(LlmError::Kind::Transport, "no attempt made");
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) sleep_(config_.backoff * (1LL << std::min(attempt - 1, 20)));
    limiter_.acquire();

    auto res = client.Post(path_ + "/chat/completions", headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timeout = err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout;
      last = LlmError(timeout ? LlmError::Kind::Timeout : LlmError::Kind::Transport,
                      "request failed: " + httplib::to_string(err));
      continue;
    }
    if (audit_) audit_(redact("response " + std::to_string(res->status) + " " + res->body, config_.api_key));
    if (res->status == 401 || res->status == 403) {
      throw LlmError(LlmError::Kind::Auth, "authentication failed (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429) {
      last = LlmError(LlmError::Kind::RateLimited, "rate limited (HTTP 429)");
      continue;
    }
    if (res->status >= 500) {
      last = LlmError(LlmError::Kind::ServerError, "server error (HTTP " + std::to_string(res->status) + ")");
      continue;
    }
    if (res->status != 200) {
      throw LlmError(LlmError::Kind::Malformed, "unexpected HTTP status " + std::to_string(res->status));
    }
    auto out = parse_response_body(res->body);
    out.usage.retries = attempt;
    return out;
  }
  throw LlmError(last.kind(), std::string(last.what()) + " after " + std::to_string(config_.max_retries) + " retries");
}

}  // namespace dsmseq
