#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "evoforge/provider.hpp"

namespace evoforge {
namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("provider.base_url: expected scheme://host[:port], got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) p.path_prefix = url.substr(path_start);
  while (!p.path_prefix.empty() && p.path_prefix.back() == '/') p.path_prefix.pop_back();
  return p;
}

std::atomic<std::uint64_t> g_local_request_counter{0};

}  // namespace

struct HttpChatTransport::Impl {
  HttpTransportOptions options;
  ParsedUrl url;
  RateLimiter limiter;
  std::mutex client_mu;
  httplib::Client client;

  explicit Impl(HttpTransportOptions opts)
      : options(std::move(opts)),
        url(parse_base_url(options.base_url)),
        limiter(options.requests_per_minute, {}, options.sleeper),
        client(url.scheme_host_port) {
    if (!options.sleeper) {
      options.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_write_timeout(options.timeout);
  }
};

HttpChatTransport::HttpChatTransport(HttpTransportOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->options.retry.max_attempts < 1) {
    throw ConfigError("provider.max_attempts must be >= 1");
  }
}

HttpChatTransport::~HttpChatTransport() = default;

Completion HttpChatTransport::send(const CompletionRequest& request) {
  auto& im = *impl_;
  const std::string path = im.url.path_prefix + "/v1/chat/completions";
  const std::string body = request_body(request).dump();
  httplib::Headers headers;
  if (!im.options.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + im.options.api_key);
  }

  const auto& policy = im.options.retry;
  auto backoff = policy.initial_backoff;
  std::string last_error;
  std::string request_id = "local-" + std::to_string(++g_local_request_counter);

  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    im.limiter.acquire();
    httplib::Result res;
    {
      std::lock_guard lock(im.client_mu);
      res = im.client.Post(path, headers, body, "application/json");
    }

    auto delay = backoff;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else {
      if (res->has_header("x-request-id")) request_id = res->get_header_value("x-request-id");
      const int status = res->status;
      if (status >= 200 && status < 300) {
        Completion c = parse_completion_body(res->body);
        if (c.request_id.empty()) c.request_id = request_id;
        return c;
      }
      last_error = "HTTP " + std::to_string(status);
      if (status == 429) {
        if (res->has_header("Retry-After")) {
          try {
            const double secs = std::stod(res->get_header_value("Retry-After"));
            delay = std::chrono::milliseconds(static_cast<long long>(std::max(0.0, secs) * 1000.0));
          } catch (const std::exception&) {
            // HTTP-date form is not supported; keep the exponential delay.
          }
        }
      } else if (status < 500) {
        throw ProviderError(last_error + ": " + res->body.substr(0, 200), request_id);
      }
    }
    if (attempt < policy.max_attempts) {
      im.options.sleeper(delay);
      backoff = std::min(policy.max_backoff,
                         std::chrono::milliseconds(static_cast<long long>(
                             static_cast<double>(backoff.count()) * policy.multiplier)));
    }
  }
  throw ProviderError(last_error + " after " + std::to_string(policy.max_attempts) + " attempts",
                      request_id);
}

}  // namespace evoforge
