#include "mock_server.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace evoforge::testing {

MockReply chat_reply(const std::string& content, std::size_t prompt_tokens,
                     std::size_t completion_tokens) {
  nlohmann::json body{
      {"id", "mock"},
      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
      {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
  return {200, body.dump(), {}};
}

struct MockChatServer::Impl {
  Handler handler;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<std::size_t> count{0};
  mutable std::mutex mu;
  std::string authorization;
};

MockChatServer::MockChatServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  auto* im = impl_.get();
  im->server.Post(R"(.*/v1/chat/completions)",
                  [im](const httplib::Request& req, httplib::Response& res) {
                    ++im->count;
                    {
                      std::lock_guard lock(im->mu);
                      im->authorization = req.get_header_value("Authorization");
                    }
                    MockReply reply;
                    try {
                      reply = im->handler(nlohmann::json::parse(req.body));
                    } catch (const std::exception& e) {
                      reply = {500, e.what(), {}};
                    }
                    res.status = reply.status;
                    for (const auto& [k, v] : reply.headers) res.set_header(k, v);
                    res.set_content(reply.body, "application/json");
                  });
  im->port = im->server.bind_to_any_port("127.0.0.1");
  if (im->port <= 0) throw std::runtime_error("mock server: bind failed");
  im->thread = std::thread([im] { im->server.listen_after_bind(); });
  for (int i = 0; i < 500 && !im->server.is_running(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

MockChatServer::~MockChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::size_t MockChatServer::request_count() const { return impl_->count.load(); }

std::string MockChatServer::last_authorization() const {
  std::lock_guard lock(impl_->mu);
  return impl_->authorization;
}

}  // namespace evoforge::testing
