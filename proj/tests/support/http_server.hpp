// SPDX-License-Identifier: Apache-2.0
// Runs an httplib server on an ephemeral loopback port for the lifetime of the object.
#pragma once

#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"

namespace kecr::testing {

class BackgroundServer {
 public:
  /// `setup` registers routes before the server starts listening.
  template <typename Setup>
  explicit BackgroundServer(Setup&& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind a loopback port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~BackgroundServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  BackgroundServer(const BackgroundServer&) = delete;
  BackgroundServer& operator=(const BackgroundServer&) = delete;

  int port() const noexcept { return port_; }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace kecr::testing
