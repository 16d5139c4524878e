#pragma once

// Minimal RFC 6455 text-frame WebSocket over blocking POSIX sockets: the
// server handshake, frame read/write, and a tiny client used by tests and
// scripted controllers. No extensions, no fragmentation on send.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <atomic>
#include <cstdint>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace batchsim::viewer::ws {

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sec-WebSocket-Accept for a client key.
inline std::string accept_key(const std::string& client_key) {
  const std::string src = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(src.data()), src.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

enum class Opcode : std::uint8_t { cont = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

/// One connected peer. Writes are serialised; reads belong to one thread.
class Connection {
 public:
  explicit Connection(int fd, bool mask_outgoing) : fd_(fd), mask_(mask_outgoing) {}
  ~Connection() { close(); }
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  bool open() const { return fd_ >= 0 && !closed_; }

  void close() {
    std::lock_guard lock(write_mu_);
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
    closed_ = true;
  }

  /// Sends one text frame; returns false when the peer is gone.
  bool send_text(const std::string& payload) { return send_frame(Opcode::text, payload); }

  /// Next complete text message; nullopt once the connection closes.
  std::optional<std::string> receive_text() {
    std::string message;
    while (true) {
      std::uint8_t head[2];
      if (!read_exact(head, 2)) return std::nullopt;
      const bool fin = (head[0] & 0x80) != 0;
      const auto op = static_cast<Opcode>(head[0] & 0x0F);
      const bool masked = (head[1] & 0x80) != 0;
      std::uint64_t len = head[1] & 0x7F;
      if (len == 126) {
        std::uint8_t b[2];
        if (!read_exact(b, 2)) return std::nullopt;
        len = (std::uint64_t{b[0]} << 8) | b[1];
      } else if (len == 127) {
        std::uint8_t b[8];
        if (!read_exact(b, 8)) return std::nullopt;
        len = 0;
        for (std::uint8_t v : b) len = (len << 8) | v;
      }
      if (len > kMaxMessage) return std::nullopt;
      std::uint8_t key[4] = {0, 0, 0, 0};
      if (masked && !read_exact(key, 4)) return std::nullopt;
      std::string payload(static_cast<std::size_t>(len), '\0');
      if (len > 0 && !read_exact(reinterpret_cast<std::uint8_t*>(payload.data()), payload.size())) return std::nullopt;
      if (masked) {
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
      }
      switch (op) {
        case Opcode::close:
          send_frame(Opcode::close, payload.substr(0, 2));
          closed_ = true;
          return std::nullopt;
        case Opcode::ping:
          send_frame(Opcode::pong, payload);
          continue;
        case Opcode::pong:
          continue;
        case Opcode::text:
        case Opcode::binary:
        case Opcode::cont:
          message += payload;
          if (message.size() > kMaxMessage) return std::nullopt;
          if (fin) return message;
          continue;
      }
      return std::nullopt;  // reserved opcode
    }
  }

  int fd() const { return fd_; }

 private:
  static constexpr std::uint64_t kMaxMessage = 1 << 20;

  bool send_frame(Opcode op, const std::string& payload) {
    std::string frame;
    frame.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
    const std::uint8_t mask_bit = mask_ ? 0x80 : 0;
    const std::size_t n = payload.size();
    if (n < 126) {
      frame.push_back(static_cast<char>(mask_bit | n));
    } else if (n <= 0xFFFF) {
      frame.push_back(static_cast<char>(mask_bit | 126));
      frame.push_back(static_cast<char>((n >> 8) & 0xFF));
      frame.push_back(static_cast<char>(n & 0xFF));
    } else {
      frame.push_back(static_cast<char>(mask_bit | 127));
      for (int s = 56; s >= 0; s -= 8) frame.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> s) & 0xFF));
    }
    if (mask_) {
      std::uint32_t k = rng_();
      char key[4];
      std::memcpy(key, &k, 4);
      frame.append(key, 4);
      for (std::size_t i = 0; i < n; ++i) frame.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
    } else {
      frame += payload;
    }
    std::lock_guard lock(write_mu_);
    if (fd_ < 0) return false;
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t w = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (w <= 0) {
        closed_ = true;
        return false;
      }
      sent += static_cast<std::size_t>(w);
    }
    return true;
  }

  bool read_exact(std::uint8_t* out, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      const int fd = fd_;
      if (fd < 0) return false;
      const ssize_t r = ::recv(fd, out + got, n - got, 0);
      if (r <= 0) {
        closed_ = true;
        return false;
      }
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  std::atomic<int> fd_;
  bool mask_;
  std::atomic<bool> closed_{false};
  std::mutex write_mu_;
  std::minstd_rand rng_{std::random_device{}()};
};

/// Reads an HTTP request head (up to the blank line).
inline std::optional<std::string> read_http_head(int fd) {
  std::string head;
  char c;
  while (head.size() < 8192) {
    const ssize_t r = ::recv(fd, &c, 1, 0);
    if (r <= 0) return std::nullopt;
    head.push_back(c);
    if (head.size() >= 4 && head.compare(head.size() - 4, 4, "\r\n\r\n") == 0) return head;
  }
  return std::nullopt;
}

/// Case-insensitive header lookup in a raw HTTP head.
inline std::optional<std::string> header_value(const std::string& head, std::string_view name) {
  std::size_t pos = head.find("\r\n");
  while (pos != std::string::npos && pos + 2 < head.size()) {
    const std::size_t start = pos + 2;
    const std::size_t end = head.find("\r\n", start);
    if (end == std::string::npos) break;
    const std::string line = head.substr(start, end - start);
    const std::size_t colon = line.find(':');
    if (colon != std::string::npos && colon == name.size()) {
      bool same = true;
      for (std::size_t i = 0; i < colon && same; ++i) same = std::tolower(line[i]) == std::tolower(name[i]);
      if (same) {
        std::size_t v = colon + 1;
        while (v < line.size() && line[v] == ' ') ++v;
        return line.substr(v);
      }
    }
    pos = end;
  }
  return std::nullopt;
}

/// Completes the server side of the opening handshake on an accepted socket.
inline bool server_handshake(int fd) {
  const auto head = read_http_head(fd);
  if (!head) return false;
  const auto key = header_value(*head, "Sec-WebSocket-Key");
  if (!key) {
    const std::string bad = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
    ::send(fd, bad.data(), bad.size(), MSG_NOSIGNAL);
    return false;
  }
  const std::string resp = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                           "Sec-WebSocket-Accept: " + accept_key(*key) + "\r\n\r\n";
  return ::send(fd, resp.data(), resp.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(resp.size());
}

/// Listening TCP socket; throws SocketError when the address is unusable.
inline int listen_on(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SocketError("socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw SocketError("bad bind address '" + host + "'");
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    throw SocketError("cannot bind " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  if (::listen(fd, 16) != 0) {
    ::close(fd);
    throw SocketError("listen() failed");
  }
  return fd;
}

inline std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

/// Client-side connect plus handshake.
inline std::unique_ptr<Connection> connect(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SocketError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    throw SocketError("cannot connect to " + host + ":" + std::to_string(port));
  }
  const std::string key = "dGhlIHNhbXBsZSBub25jZQ==";
  const std::string req = "GET / HTTP/1.1\r\nHost: " + host + "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                          "Sec-WebSocket-Key: " + key + "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  ::send(fd, req.data(), req.size(), MSG_NOSIGNAL);
  const auto head = read_http_head(fd);
  if (!head || head->rfind("HTTP/1.1 101", 0) != 0 || header_value(*head, "Sec-WebSocket-Accept") != accept_key(key)) {
    ::close(fd);
    throw SocketError("WebSocket handshake failed");
  }
  return std::make_unique<Connection>(fd, true);
}

}  // namespace batchsim::viewer::ws
