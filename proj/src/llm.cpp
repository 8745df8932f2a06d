#include "aml/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "aml/rng.hpp"
#include "aml/serialize.hpp"
#include "aml/verdict.hpp"

namespace aml {

void LlmConfig::validate() const {
  if (base_url.empty()) throw InvalidArgument("base_url is empty");
  if (model.empty()) throw InvalidArgument("model is empty");
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (max_output_tokens == 0) throw InvalidArgument("max_output_tokens must be positive");
  if (request_timeout.count() <= 0) throw InvalidArgument("request_timeout must be positive");
  if (max_concurrency < 1 || max_concurrency > kMaxConcurrency) {
    throw InvalidArgument("max_concurrency must lie in [1, " + std::to_string(kMaxConcurrency) + "]");
  }
}

LlmConfig LlmConfig::from_env() {
  LlmConfig cfg;
  if (const char* v = std::getenv("LLM_API_KEY"); v && *v) cfg.api_key = v;
  if (const char* v = std::getenv("LLM_BASE_URL"); v && *v) cfg.base_url = v;
  if (const char* v = std::getenv("LLM_MODEL"); v && *v) cfg.model = v;
  return cfg;
}

LlmClient::LlmClient(LlmConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper,
                     std::uint64_t jitter_seed)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      slots_((cfg_.validate(), static_cast<std::ptrdiff_t>(cfg_.max_concurrency))),
      rng_state_(jitter_seed) {
  if (!transport_) throw InvalidArgument("LlmClient needs a transport");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string LlmClient::request_body(const LlmConfig& cfg, std::string_view prompt) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_output_tokens;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  return body.dump();
}

Completion LlmClient::parse_response(std::string_view body) {
  const auto json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded()) throw MalformedResponseError("response body is not JSON");
  Completion c;
  try {
    const auto& content = json.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponseError("message content is not a string");
    c.text = content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(std::string("missing choices[0].message.content: ") + e.what());
  }
  if (const auto it = json.find("usage"); it != json.end() && it->is_object()) {
    TokenUsage u;
    u.prompt = it->value("prompt_tokens", std::int64_t{0});
    u.completion = it->value("completion_tokens", std::int64_t{0});
    u.total = it->value("total_tokens", u.prompt + u.completion);
    c.usage = u;
  }
  return c;
}

std::chrono::milliseconds LlmClient::backoff(unsigned retry) {
  const std::int64_t cap = cfg_.backoff_base.count() << std::min(retry, 20u);
  std::uint64_t r;
  {
    std::lock_guard lock(rng_mutex_);
    rng_state_ += 0x9E3779B97F4A7C15ULL;
    r = mix_seed(rng_state_);
  }
  return std::chrono::milliseconds(cap <= 0 ? 0 : static_cast<std::int64_t>(r % static_cast<std::uint64_t>(cap + 1)));
}

Completion LlmClient::complete(std::string_view prompt) {
  HttpRequest req;
  std::string base = cfg_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  req.url = base + "/chat/completions";
  req.body = request_body(cfg_, prompt);
  req.timeout = cfg_.request_timeout;
  req.headers.emplace_back("Content-Type", "application/json");
  if (!cfg_.api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + cfg_.api_key);

  enum class Failure { Timeout, RateLimit, Transport };
  Failure last = Failure::Transport;
  std::string last_message;
  const auto start = std::chrono::steady_clock::now();
  const unsigned attempts = 1 + cfg_.max_retries;
  for (unsigned attempt = 1; attempt <= attempts; ++attempt) {
    std::optional<HttpResponse> resp;
    slots_.acquire();
    try {
      resp = transport_->post(req);
    } catch (const TimeoutError& e) {
      last = Failure::Timeout;
      last_message = e.what();
    } catch (const TransportError& e) {
      last = Failure::Transport;
      last_message = e.what();
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();

    if (resp) {
      if (resp->status >= 200 && resp->status < 300) {
        Completion c = parse_response(resp->body);
        c.attempts = attempt;
        c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        return c;
      }
      if (resp->status == 401 || resp->status == 403) {
        throw AuthError("authentication failed (HTTP " + std::to_string(resp->status) + ")");
      }
      if (resp->status == 429) {
        last = Failure::RateLimit;
        last_message = "HTTP 429";
      } else if (resp->status >= 500) {
        last = Failure::Transport;
        last_message = "HTTP " + std::to_string(resp->status);
      } else {
        throw TransportError("unexpected HTTP " + std::to_string(resp->status) + ": " + resp->body.substr(0, 200));
      }
    }
    if (attempt < attempts) sleeper_(backoff(attempt - 1));
  }
  const std::string msg = last_message + " (gave up after " + std::to_string(attempts) + " attempts)";
  switch (last) {
    case Failure::Timeout: throw TimeoutError(msg);
    case Failure::RateLimit: throw RateLimitError(msg);
    case Failure::Transport: break;
  }
  throw TransportError(msg);
}

Completion stub_complete(std::string_view prompt, const DetectorConfig& cfg) {
  const Subgraph sub = parse_serialized(test_section(prompt));
  const auto matches = detect(sub, cfg);
  Verdict v;
  v.observed_patterns = detected_kinds(matches);
  if (v.observed_patterns.empty()) {
    v.label = VerdictLabel::NotSuspicious;
    v.explanation = "No typology rule matched the " + std::to_string(sub.transfers.size()) +
                    " transfers among " + std::to_string(sub.accounts.size()) +
                    " accounts. The flows look like routine payments.";
  } else {
    v.label = VerdictLabel::Suspicious;
    for (PatternKind k : v.observed_patterns) {
      const auto first = std::find_if(matches.begin(), matches.end(), [&](const PatternMatch& m) { return m.kind == k; });
      if (!v.explanation.empty()) v.explanation += ' ';
      v.explanation += "A " + std::string(pattern_name(k)) + " structure links " +
                       std::to_string(first->participants.size()) + " accounts through " +
                       std::to_string(first->evidence.size()) + " transfers.";
    }
  }
  Completion c;
  c.text = format_verdict(v);
  return c;
}

}  // namespace aml
