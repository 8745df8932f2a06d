#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "aml/errors.hpp"
#include "aml/prompt.hpp"
#include "aml/typology.hpp"

namespace aml {

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  /// Never printed or written to reports.
  std::string api_key;
  double temperature = 0.0;
  unsigned max_output_tokens = 512;
  std::chrono::milliseconds request_timeout{60'000};
  unsigned max_retries = 3;
  unsigned max_concurrency = 4;
  std::chrono::milliseconds backoff_base{1'000};

  static constexpr unsigned kMaxConcurrency = 256;

  void validate() const;
  /// Defaults overlaid with LLM_API_KEY, LLM_BASE_URL and LLM_MODEL when set.
  static LlmConfig from_env();
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;
  std::int64_t total = 0;
  bool operator==(const TokenUsage&) const = default;
};

struct Completion {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::optional<TokenUsage> usage;
  unsigned attempts = 1;
};

struct LlmError : Error {
  using Error::Error;
};
/// 401 / 403.
struct AuthError : LlmError {
  using LlmError::LlmError;
};
/// The last attempt timed out.
struct TimeoutError : LlmError {
  using LlmError::LlmError;
};
/// Retries exhausted on 429.
struct RateLimitError : LlmError {
  using LlmError::LlmError;
};
/// Connection failures, 5xx after retries, other unexpected statuses.
struct TransportError : LlmError {
  using LlmError::LlmError;
};
/// 2xx whose body is not a chat-completions response.
struct MalformedResponseError : LlmError {
  using LlmError::LlmError;
};

struct HttpRequest {
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{60'000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One HTTP exchange. Implementations throw TimeoutError or TransportError
/// when no response arrives; any HTTP status is returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& req) = 0;
};

/// cpp-httplib backed transport; https needs OpenSSL (linked by default).
std::shared_ptr<Transport> make_http_transport();

/// Chat-completions client. Each call is a single stateless request with one
/// user message. Retries transport failures, 429 and 5xx up to max_retries
/// times with full-jitter backoff (base * 2^retry). Thread-safe; at most
/// max_concurrency requests are in flight at once.
class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmClient(LlmConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper = {},
            std::uint64_t jitter_seed = 0);

  Completion complete(std::string_view prompt);
  Completion complete(const PromptBundle& prompt) { return complete(prompt.text); }

  const LlmConfig& config() const noexcept { return cfg_; }

  /// JSON request body for a prompt.
  static std::string request_body(const LlmConfig& cfg, std::string_view prompt);
  /// Reads choices[0].message.content and usage; throws MalformedResponseError.
  static Completion parse_response(std::string_view body);

 private:
  std::chrono::milliseconds backoff(unsigned retry);

  LlmConfig cfg_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  std::counting_semaphore<LlmConfig::kMaxConcurrency> slots_;
  std::mutex rng_mutex_;
  std::uint64_t rng_state_;
};

/// Offline model: parses the test section of the prompt, runs detect, and
/// answers in the prompt's answer format. "Suspicious" iff any match, with
/// the detected kinds as the observed patterns. Throws InvalidArgument or
/// ParseError when the prompt carries no parseable test subgraph.
Completion stub_complete(std::string_view prompt, const DetectorConfig& cfg = {});
inline Completion stub_complete(const PromptBundle& prompt, const DetectorConfig& cfg = {}) {
  return stub_complete(prompt.text, cfg);
}

}  // namespace aml
