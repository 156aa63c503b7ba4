#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "doctest.h"

#include "dsmseq/llm_client.hpp"

using namespace dsmseq;
using namespace std::chrono_literals;

namespace {

const char* kOkBody =
    R"({"choices":[{"message":{"role":"assistant","content":"<order> a, b </order>"}}],)"
    R"("usage":{"prompt_tokens":11,"completion_tokens":5,"total_tokens":16}})";

// Local chat-completions stand-in. `handler` decides the status per call.
class FakeServer {
 public:
  explicit FakeServer(std::function<int(int call, const httplib::Request&)> status) : status_(std::move(status)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int call = calls_++;
      {
        std::lock_guard lock(mu_);
        auth_headers_.push_back(req.get_header_value("Authorization"));
        bodies_.push_back(req.body);
      }
      res.status = status_(call, req);
      res.set_content(res.status == 200 ? kOkBody : R"({"error":"nope"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int calls() const { return calls_; }
  std::vector<std::string> auth_headers() {
    std::lock_guard lock(mu_);
    return auth_headers_;
  }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }

 private:
  std::function<int(int, const httplib::Request&)> status_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  std::mutex mu_;
  std::vector<std::string> auth_headers_, bodies_;
};

ProviderConfig config_for(const FakeServer& s) {
  ProviderConfig cfg;
  cfg.endpoint = s.endpoint();
  cfg.api_key = "sk-test-secret-123";
  cfg.model = "test-model";
  cfg.timeout = 5000ms;
  cfg.max_retries = 4;
  cfg.backoff = 100ms;
  return cfg;
}

}  // namespace

TEST_CASE("scripted provider replays, records and then exhausts") {
  ScriptedProvider p({"one", "two"});
  CHECK(p.complete(ChatRequest::single_turn("m", "first")).text == "one");
  CHECK(p.complete(ChatRequest::single_turn("m", "second")).text == "two");
  try {
    p.complete(ChatRequest::single_turn("m", "third"));
    FAIL("expected ScriptExhausted");
  } catch (const LlmError& e) {
    CHECK(e.kind() == LlmError::Kind::ScriptExhausted);
    CHECK(std::string(e.what()) == "script exhausted after 2 responses");
  }
  CHECK(p.recorded_prompts() == std::vector<std::string>{"first", "second", "third"});
  CHECK(p.calls() == 3);
}

TEST_CASE("429 twice then 200 succeeds with two retries and exponential backoff") {
  FakeServer server([](int call, const httplib::Request&) { return call < 2 ? 429 : 200; });
  std::vector<std::chrono::milliseconds> sleeps;
  OpenAiProvider provider(config_for(server), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const auto r = provider.complete(ChatRequest::single_turn("", "hello"));
  CHECK(r.text == "<order> a, b </order>");
  CHECK(r.usage.retries == 2);
  CHECK(r.usage.total_tokens == 16);
  CHECK(server.calls() == 3);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{100ms, 200ms});
  for (const auto& h : server.auth_headers()) CHECK(h == "Bearer sk-test-secret-123");
  const auto body = nlohmann::json::parse(server.bodies().front());
  CHECK(body["model"] == "test-model");
  CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("5xx exhausts the retry budget") {
  FakeServer server([](int, const httplib::Request&) { return 503; });
  auto cfg = config_for(server);
  cfg.max_retries = 2;
  OpenAiProvider provider(cfg, [](auto) {});
  try {
    provider.complete(ChatRequest::single_turn("", "x"));
    FAIL("expected ServerError");
  } catch (const LlmError& e) {
    CHECK(e.kind() == LlmError::Kind::ServerError);
  }
  CHECK(server.calls() == 3);
}

TEST_CASE("401 fails immediately and the key never leaks") {
  FakeServer server([](int, const httplib::Request&) { return 401; });
  std::vector<std::string> audit;
  OpenAiProvider provider(config_for(server), [](auto) {});
  provider.set_audit_sink([&](const std::string& s) { audit.push_back(s); });
  try {
    provider.complete(ChatRequest::single_turn("", "prompt mentioning sk-test-secret-123"));
    FAIL("expected Auth");
  } catch (const LlmError& e) {
    CHECK(e.kind() == LlmError::Kind::Auth);
    CHECK(std::string(e.what()).find("sk-test-secret-123") == std::string::npos);
  }
  CHECK(server.calls() == 1);
  REQUIRE_FALSE(audit.empty());
  for (const auto& line : audit) CHECK(line.find("sk-test-secret-123") == std::string::npos);
  CHECK(audit.front().find("[REDACTED]") != std::string::npos);
}

TEST_CASE("unreachable endpoint is a transport error after retries") {
  ProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.model = "m";
  cfg.max_retries = 1;
  cfg.timeout = 500ms;
  int sleeps = 0;
  OpenAiProvider provider(cfg, [&](auto) { ++sleeps; });
  try {
    provider.complete(ChatRequest::single_turn("", "x"));
    FAIL("expected failure");
  } catch (const LlmError& e) {
    CHECK((e.kind() == LlmError::Kind::Transport || e.kind() == LlmError::Kind::Timeout));
  }
  CHECK(sleeps == 1);
}

TEST_CASE("response parsing") {
  const auto r = OpenAiProvider::parse_response_body(kOkBody);
  CHECK(r.text == "<order> a, b </order>");
  CHECK(r.usage.prompt_tokens == 11);
  CHECK_THROWS_AS(OpenAiProvider::parse_response_body("not json"), LlmError);
  CHECK_THROWS_AS(OpenAiProvider::parse_response_body(R"({"choices":[]})"), LlmError);
}

TEST_CASE("request body forwards params") {
  auto req = ChatRequest::single_turn("", "p", {{"temperature", 0.7}});
  const auto body = OpenAiProvider::request_body(req, "fallback");
  CHECK(body["model"] == "fallback");
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"][0]["role"] == "user");
}

TEST_CASE("config from environment") {
  ::setenv(kEndpointEnv, "https://example.invalid/v1", 1);
  ::setenv(kApiKeyEnv, "k", 1);
  ::setenv(kModelEnv, "m1", 1);
  const auto cfg = provider_config_from_env();
  CHECK(cfg.endpoint == "https://example.invalid/v1");
  CHECK(cfg.model == "m1");
  ::unsetenv(kModelEnv);
  CHECK_THROWS_AS(provider_config_from_env(), LlmError);
  ::unsetenv(kEndpointEnv);
  ::unsetenv(kApiKeyEnv);
  ProviderConfig bad;
  CHECK_THROWS_AS(bad.validate(), LlmError);
}

TEST_CASE("redact") {
  CHECK(redact("a secret b secret", "secret") == "a [REDACTED] b [REDACTED]");
  CHECK(redact("nothing", "") == "nothing");
}

TEST_CASE("rate limiter token bucket") {
  RateLimiter limiter(60.0);  // one per second
  const auto t0 = RateLimiter::Clock::now() + 10s;
  CHECK(limiter.try_acquire(t0) == RateLimiter::Clock::duration::zero());
  const auto wait = limiter.try_acquire(t0);
  CHECK(wait > 900ms);
  CHECK(wait <= 1001ms);
  CHECK(limiter.try_acquire(t0 + 1s) == RateLimiter::Clock::duration::zero());

  RateLimiter off(0.0);
  for (int i = 0; i < 5; ++i) CHECK(off.try_acquire(RateLimiter::Clock::now()) == RateLimiter::Clock::duration::zero());
}
