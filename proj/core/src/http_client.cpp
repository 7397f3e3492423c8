#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>

#include "causalqa/answerer.hpp"

namespace causalqa {

struct HttpChatClient::Impl {
  RemoteConfig cfg;
  std::string token;
  std::counting_semaphore<> slots;

  explicit Impl(RemoteConfig c)
      : cfg(std::move(c)), slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(cfg.max_in_flight, 1))) {
    if (!cfg.token_env.empty()) {
      if (const char* t = std::getenv(cfg.token_env.c_str())) token = t;
    }
  }

  std::string post_once(const std::string& body) {
    httplib::Client client(cfg.base_url);
    const auto secs = std::chrono::duration<double>(cfg.timeout_seconds);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(us);
    client.set_read_timeout(us);
    client.set_write_timeout(us);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = client.Post(cfg.path, headers, body, "application/json");
    if (!res) throw TransportError("request to " + cfg.base_url + cfg.path + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + cfg.base_url + cfg.path);
    return parse_chat_reply(res->body);
  }
};

HttpChatClient::HttpChatClient(RemoteConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {
  if (impl_->cfg.attempts < 1) throw UsageError("remote attempts must be at least 1");
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages, const Sampling& sampling) {
  const std::string body = chat_request_body(impl_->cfg, messages, sampling);
  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{impl_->slots};
  double wait = impl_->cfg.backoff_seconds;
  for (int attempt = 1;; ++attempt) {
    try {
      return impl_->post_once(body);
    } catch (const TransportError&) {
      if (attempt >= impl_->cfg.attempts) throw;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    wait *= 2;
  }
}

}  // namespace causalqa
