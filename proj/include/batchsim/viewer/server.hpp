#pragma once

// WebSocket viewer bridge: steps a ViewerSession at a fixed rate, broadcasts a
// frame after every tick and answers control messages from any client.

#include <poll.h>

#include <atomic>
#include <chrono>
#include <list>
#include <memory>
#include <thread>

#include "batchsim/viewer/session.hpp"
#include "batchsim/viewer/websocket.hpp"

namespace batchsim::viewer {

inline constexpr const char* kDefaultHost = "127.0.0.1";
inline constexpr std::uint16_t kDefaultPort = 8765;

template <std::floating_point T = float>
class ViewerServer {
 public:
  /// Binds immediately so a busy port fails here, before anything runs.
  ViewerServer(ViewerSession<T>& session, const std::string& host = kDefaultHost, std::uint16_t port = kDefaultPort)
      : session_(session), listen_fd_(ws::listen_on(host, port)) {}

  ~ViewerServer() {
    stop();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::list<Client> clients;
    {
      std::lock_guard lock(clients_mu_);
      clients.swap(clients_);
    }
    for (Client& c : clients) c.conn->close();
    for (Client& c : clients) {
      if (c.reader.joinable()) c.reader.join();
    }
    ::close(listen_fd_);
  }

  std::uint16_t port() const { return ws::bound_port(listen_fd_); }

  void stop() { stop_ = true; }

  /// Runs until stop() (or `max_ticks` ticks when non-zero).
  void run(double tick_rate_hz, std::uint64_t max_ticks = 0) {
    require(tick_rate_hz > 0, "serve: tick rate must be positive");
    accept_thread_ = std::thread([this] { accept_loop(); });
    const auto period = std::chrono::duration<double>(1.0 / tick_rate_hz);
    auto next = std::chrono::steady_clock::now();
    for (std::uint64_t n = 0; !stop_ && (max_ticks == 0 || n < max_ticks); ++n) {
      session_.tick();
      broadcast(encode_frame(session_.snapshot()));
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      std::this_thread::sleep_until(next);
    }
    stop_ = true;
    accept_thread_.join();
  }

  std::size_t n_clients() {
    std::lock_guard lock(clients_mu_);
    return clients_.size();
  }

 private:
  struct Client {
    std::shared_ptr<ws::Connection> conn;
    std::thread reader;
  };

  void accept_loop() {
    while (!stop_) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      if (!ws::server_handshake(fd)) {
        ::close(fd);
        continue;
      }
      auto conn = std::make_shared<ws::Connection>(fd, false);
      std::lock_guard lock(clients_mu_);
      reap();
      clients_.push_back({conn, std::thread([this, conn] { read_loop(*conn); })});
    }
  }

  void read_loop(ws::Connection& conn) {
    while (auto msg = conn.receive_text()) {
      if (!conn.send_text(session_.handle_control(*msg))) break;
    }
  }

  /// Drops disconnected clients. Caller holds clients_mu_.
  void reap() {
    for (auto it = clients_.begin(); it != clients_.end();) {
      if (!it->conn->open()) {
        it->conn->close();
        if (it->reader.joinable()) it->reader.join();
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void broadcast(const std::string& frame) {
    std::lock_guard lock(clients_mu_);
    for (Client& c : clients_) {
      if (c.conn->open()) c.conn->send_text(frame);
    }
    reap();
  }

  ViewerSession<T>& session_;
  int listen_fd_;
  std::atomic<bool> stop_{false};
  std::thread accept_thread_;
  std::mutex clients_mu_;
  std::list<Client> clients_;
};

}  // namespace batchsim::viewer
