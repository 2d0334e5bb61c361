#include "evoforge/provider.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <thread>

#include "evoforge/text.hpp"

namespace evoforge {

using nlohmann::json;

std::string_view to_string(Purpose p) {
  return p == Purpose::operator_call ? "operator" : "task_eval";
}

void CompletionRequest::validate() const {
  if (model.empty()) throw ConfigError("provider.model: empty");
  if (messages.empty()) throw Error("completion request has no messages");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

json request_body(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"top_p", request.top_p},
              {"max_tokens", request.max_tokens}};
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string cache_key(const CompletionRequest& request) {
  json keyed = request_body(request);
  keyed["sample_index"] = request.sample_index;
  return sha256_hex(keyed.dump());  // object keys are sorted
}

Completion parse_completion_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed response body: ") + e.what());
  }
  Completion c;
  try {
    c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError("response lacks choices[0].message.content");
  }
  if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
    c.usage.prompt_tokens = it->value("prompt_tokens", std::uint64_t{0});
    c.usage.completion_tokens = it->value("completion_tokens", std::uint64_t{0});
  }
  if (auto it = j.find("id"); it != j.end() && it->is_string()) c.request_id = *it;
  return c;
}

void to_json(json& j, const BudgetLedger& b) {
  j = json{{"requests",
            {{"operator", b.requests_for(Purpose::operator_call)},
             {"task_eval", b.requests_for(Purpose::task_eval)}}},
           {"prompt_tokens", b.prompt_tokens},
           {"completion_tokens", b.completion_tokens},
           {"cache_hits", b.cache_hits}};
}

void from_json(const json& j, BudgetLedger& b) {
  b.requests[static_cast<std::size_t>(Purpose::operator_call)] =
      j.at("requests").at("operator").get<std::uint64_t>();
  b.requests[static_cast<std::size_t>(Purpose::task_eval)] =
      j.at("requests").at("task_eval").get<std::uint64_t>();
  b.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
  b.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
  b.cache_hits = j.at("cache_hits").get<std::uint64_t>();
}

void BudgetTracker::record(Purpose purpose, const Usage& usage, bool cache_hit) {
  std::lock_guard lock(mu_);
  ++ledger_.requests[static_cast<std::size_t>(purpose)];
  if (cache_hit) {
    ++ledger_.cache_hits;
  } else {
    ledger_.prompt_tokens += usage.prompt_tokens;
    ledger_.completion_tokens += usage.completion_tokens;
  }
}

BudgetLedger BudgetTracker::snapshot() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

std::uint64_t expected_requests(std::uint64_t population_size, std::uint64_t iterations,
                                std::uint64_t dev_size) {
  return population_size * iterations * (1 + dev_size);
}

BudgetReport budget_report(const BudgetLedger& ledger, std::optional<std::uint64_t> expected) {
  BudgetReport r;
  r.ledger = ledger;
  const auto total = ledger.total_requests();
  r.cache_hit_rate = total == 0 ? 0.0 : static_cast<double>(ledger.cache_hits) / total;
  r.expected = expected;
  r.actual = ledger.network_requests();
  r.within_expected = !expected || r.actual <= *expected;
  return r;
}

json to_json(const BudgetReport& report) {
  json j{{"ledger", report.ledger},
         {"cache_hit_rate", report.cache_hit_rate},
         {"network_requests", report.actual},
         {"within_expected", report.within_expected}};
  j["expected_requests"] = report.expected ? json(*report.expected) : json(nullptr);
  return j;
}

RateLimiter::RateLimiter(double requests_per_minute, Clock clock, Sleeper sleeper)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      last_(clock_()) {
  if (requests_per_minute < 0.0) throw ConfigError("provider.requests_per_minute must be >= 0");
}

void RateLimiter::acquire() {
  if (rate_per_sec_ <= 0.0) return;
  std::lock_guard lock(mu_);
  while (true) {
    const auto now = clock_();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait_s = (1.0 - tokens_) / rate_per_sec_;
    sleeper_(std::chrono::milliseconds(static_cast<long long>(std::ceil(wait_s * 1000.0))));
  }
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;  // created on first insert
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      Completion c;
      c.text = j.at("response").get<std::string>();
      c.usage.prompt_tokens = j.at("usage").value("prompt_tokens", std::uint64_t{0});
      c.usage.completion_tokens = j.at("usage").value("completion_tokens", std::uint64_t{0});
      entries_.insert_or_assign(j.at("key").get<std::string>(), std::move(c));
    } catch (const json::exception& e) {
      throw IoError(path_ + ":" + std::to_string(lineno) + ": bad cache entry: " + e.what());
    }
  }
}

std::optional<Completion> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::insert(const std::string& key, const Completion& completion) {
  std::lock_guard lock(mu_);
  entries_.insert_or_assign(key, completion);
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to cache file " + path_);
  json line{{"key", key},
            {"response", completion.text},
            {"usage",
             {{"prompt_tokens", completion.usage.prompt_tokens},
              {"completion_tokens", completion.usage.completion_tokens}}}};
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed on cache file " + path_);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

ChatClient::ChatClient(ChatTransport& transport, BudgetTracker& budget, ResponseCache* cache)
    : transport_(transport), budget_(budget), cache_(cache) {}

Completion ChatClient::complete_full(const CompletionRequest& request) {
  request.validate();
  std::string key;
  if (cache_ != nullptr) {
    key = cache_key(request);
    if (auto hit = cache_->lookup(key)) {
      budget_.record(request.purpose, hit->usage, true);
      return *hit;
    }
  }
  Completion c = transport_.send(request);
  budget_.record(request.purpose, c.usage, false);
  if (cache_ != nullptr) cache_->insert(key, c);
  return c;
}

std::string ChatClient::complete(const CompletionRequest& request) {
  return complete_full(request).text;
}

}  // namespace evoforge
