#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "evoforge/core.hpp"

namespace evoforge {

// Chat-completion access over an OpenAI-compatible wire protocol, with a
// persistent response cache and request/token accounting.

enum class Purpose { operator_call = 0, task_eval = 1 };
std::string_view to_string(Purpose p);

struct ChatMessage {
  std::string role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

/// Sampling defaults: operators use top-p decoding, task evaluation is greedy.
inline constexpr double kOperatorTemperature = 0.5;
inline constexpr double kOperatorTopP = 0.95;
inline constexpr double kEvalTemperature = 0.0;

struct CompletionRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 256;
  Purpose purpose = Purpose::task_eval;
  /// Distinguishes deliberate re-draws of the same request (operator retries).
  /// Part of the cache key, never sent on the wire.
  int sample_index = 0;

  void validate() const;
};

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  bool operator==(const Usage&) const = default;
};

struct Completion {
  std::string text;
  Usage usage;
  std::string request_id;
};

std::string sha256_hex(std::string_view data);

/// Hex SHA-256 over the canonical JSON of every field that affects the
/// completion (model, messages, temperature, top_p, max_tokens, sample_index).
std::string cache_key(const CompletionRequest& request);

/// JSON body for POST {base_url}/v1/chat/completions.
nlohmann::json request_body(const CompletionRequest& request);

/// Reads choices[0].message.content and usage from a response body.
Completion parse_completion_body(const std::string& body);

struct BudgetLedger {
  std::array<std::uint64_t, 2> requests{};  // indexed by Purpose; includes cache hits
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::uint64_t cache_hits = 0;

  std::uint64_t requests_for(Purpose p) const { return requests[static_cast<std::size_t>(p)]; }
  std::uint64_t total_requests() const { return requests[0] + requests[1]; }
  std::uint64_t network_requests() const { return total_requests() - cache_hits; }

  bool operator==(const BudgetLedger&) const = default;
};

void to_json(nlohmann::json& j, const BudgetLedger& b);
void from_json(const nlohmann::json& j, BudgetLedger& b);

/// Thread-safe accumulator behind a BudgetLedger.
class BudgetTracker {
 public:
  void record(Purpose purpose, const Usage& usage, bool cache_hit);
  BudgetLedger snapshot() const;

 private:
  mutable std::mutex mu_;
  BudgetLedger ledger_;
};

/// Total API requests for a run: N * T * (1 + |D|).
std::uint64_t expected_requests(std::uint64_t population_size, std::uint64_t iterations,
                                std::uint64_t dev_size);

struct BudgetReport {
  BudgetLedger ledger;
  double cache_hit_rate = 0.0;
  std::optional<std::uint64_t> expected;
  /// Requests that reached the network, compared against `expected`.
  std::uint64_t actual = 0;
  bool within_expected = true;
};

BudgetReport budget_report(const BudgetLedger& ledger,
                           std::optional<std::uint64_t> expected = std::nullopt);
nlohmann::json to_json(const BudgetReport& report);

/// Sends one request to a backend; no caching or accounting.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual Completion send(const CompletionRequest& request) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using Clock = std::function<std::chrono::steady_clock::time_point()>;

/// Token bucket admitting at most `requests_per_minute`; 0 disables limiting.
/// Callers are admitted one at a time.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute, Clock clock = {}, Sleeper sleeper = {});
  void acquire();

 private:
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  Clock clock_;
  Sleeper sleeper_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};
};

struct HttpTransportOptions {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;   // taken from the environment; never written to disk
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  double requests_per_minute = 0.0;
  Sleeper sleeper;  // defaults to std::this_thread::sleep_for
};

/// POSTs to {base_url}/v1/chat/completions. Retries transport failures, 429
/// (honouring Retry-After) and 5xx with exponential backoff; other statuses
/// fail immediately.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(HttpTransportOptions options);
  ~HttpChatTransport() override;
  Completion send(const CompletionRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Request-key to completion map, persisted as append-only JSONL lines
/// {key, response, usage}. Safe for concurrent lookup/insert.
class ResponseCache {
 public:
  ResponseCache() = default;
  /// Loads existing entries from `path` and appends new ones to it.
  explicit ResponseCache(std::string path);

  std::optional<Completion> lookup(const std::string& key) const;
  void insert(const std::string& key, const Completion& completion);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Completion> entries_;
};

/// Front door for all model calls: cache lookup, transport, accounting.
class ChatClient {
 public:
  /// `cache` may be null to disable caching.
  ChatClient(ChatTransport& transport, BudgetTracker& budget, ResponseCache* cache);

  std::string complete(const CompletionRequest& request);
  Completion complete_full(const CompletionRequest& request);

  BudgetTracker& budget() { return budget_; }

 private:
  ChatTransport& transport_;
  BudgetTracker& budget_;
  ResponseCache* cache_;
};

}  // namespace evoforge
