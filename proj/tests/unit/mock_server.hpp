#pragma once

#include <string>
#include <thread>

#include <httplib.h>

#include "fixtures_c.hpp"

namespace fixtures {

/// Loopback HTTP server on an ephemeral port for the lifetime of the object.
class MockServer {
 public:
  MockServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
  }
  ~MockServer() { stop(); }
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  httplib::Server& server() { return server_; }

  void start() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  std::string url(const std::string& path = "/v2a") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

/// A loopback URL that refuses connections.
inline std::string closed_port_url() { return closed_port_url_c(); }

}  // namespace fixtures
