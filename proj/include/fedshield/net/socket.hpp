#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/net/wire.hpp"

namespace fedshield::net {

using Clock = std::chrono::steady_clock;

enum class Direction { Sent, Received };

/// Sees every complete frame a channel sends or receives.
using FrameObserver = std::function<void(Direction, std::span<const std::uint8_t>)>;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host;
  std::string port;
};

/// "host:port", "[v6addr]:port" or ":port" (all interfaces).
inline Endpoint parse_endpoint(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) {
    throw Error(ErrorKind::InvalidArgument, "address '" + addr + "' must look like host:port");
  }
  std::string host = addr.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host, addr.substr(colon + 1)};
}

namespace detail {
struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) ::freeaddrinfo(head);
  }
};

inline AddrInfo resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo res;
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  if (int rc = ::getaddrinfo(host, ep.port.c_str(), &hints, &res.head); rc != 0) {
    throw Error(passive ? ErrorKind::IoError : ErrorKind::ConnectionLost,
                "cannot resolve " + ep.host + ":" + ep.port + ": " + ::gai_strerror(rc));
  }
  return res;
}

inline int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}
}  // namespace detail

inline Socket listen_tcp(const std::string& addr, int backlog = 64) {
  const Endpoint ep = parse_endpoint(addr);
  auto info = detail::resolve(ep, true);
  std::string last_error = "no usable address";
  for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), backlog) == 0) return s;
    last_error = std::strerror(errno);
  }
  throw Error(ErrorKind::IoError, "cannot listen on " + addr + ": " + last_error);
}

inline std::uint16_t local_port(const Socket& s) {
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) {
    throw Error(ErrorKind::IoError, std::string("getsockname: ") + std::strerror(errno));
  }
  if (ss.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
  return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
}

inline Socket connect_tcp(const std::string& addr) {
  const Endpoint ep = parse_endpoint(addr);
  auto info = detail::resolve(ep, false);
  std::string last_error = "no usable address";
  for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
    last_error = std::strerror(errno);
  }
  throw Error(ErrorKind::ConnectionLost, "cannot connect to " + addr + ": " + last_error);
}

inline std::optional<Socket> accept_tcp(const Socket& listener) {
  int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

/// A connected stream carrying length-prefixed frames.
class FrameChannel {
 public:
  FrameChannel(Socket sock, FrameObserver observer = {}, std::size_t max_frame = kDefaultMaxFrame)
      : sock_(std::move(sock)), observer_(std::move(observer)), max_frame_(max_frame) {}

  int fd() const { return sock_.fd(); }
  bool open() const { return sock_.valid(); }
  void close() { sock_.reset(); }

  void send(const WireMessage& msg) {
    const auto frame = encode(msg);
    if (observer_) observer_(Direction::Sent, frame);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::send(sock_.fd(), frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorKind::ConnectionLost, std::string("send failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  /// Sends without throwing; used when tearing a run down.
  void send_quietly(const WireMessage& msg) noexcept {
    try {
      if (open()) send(msg);
    } catch (...) {
    }
  }

  /// One recv into the buffer. Returns false on orderly EOF.
  bool fill() {
    std::uint8_t buf[65536];
    for (;;) {
      const ssize_t n = ::recv(sock_.fd(), buf, sizeof(buf), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw Error(ErrorKind::ConnectionLost, std::string("recv failed: ") + std::strerror(errno));
      if (n == 0) return false;
      inbuf_.insert(inbuf_.end(), buf, buf + n);
      return true;
    }
  }

  /// Pops the next complete frame from the buffer, if any.
  std::optional<WireMessage> try_pop() {
    const auto len = peek_frame_length(inbuf_, max_frame_);
    if (!len || inbuf_.size() < kLengthPrefixSize + *len) return std::nullopt;
    const std::span<const std::uint8_t> frame(inbuf_.data(), kLengthPrefixSize + *len);
    if (observer_) observer_(Direction::Received, frame);
    WireMessage msg = decode(frame, max_frame_);
    inbuf_.erase(inbuf_.begin(), inbuf_.begin() + static_cast<std::ptrdiff_t>(frame.size()));
    return msg;
  }

  /// Blocks until a whole frame arrives or the deadline passes.
  WireMessage receive(Clock::time_point deadline) {
    for (;;) {
      if (auto msg = try_pop()) return *msg;
      pollfd pfd{sock_.fd(), POLLIN, 0};
      const int rc = ::poll(&pfd, 1, detail::remaining_ms(deadline));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw Error(ErrorKind::ConnectionLost, std::string("poll failed: ") + std::strerror(errno));
      if (rc == 0) throw Error(ErrorKind::ClientTimeout, "no frame before the deadline");
      if (!fill()) throw Error(ErrorKind::ConnectionLost, "peer closed the connection");
    }
  }

 private:
  Socket sock_;
  FrameObserver observer_;
  std::size_t max_frame_;
  std::vector<std::uint8_t> inbuf_;
};

/// Abort reasons are "<ErrorKind>: detail"; recover the kind when possible.
inline ErrorKind kind_from_abort_reason(const std::string& reason, ErrorKind fallback) {
  const auto colon = reason.find(':');
  if (colon == std::string::npos) return fallback;
  return error_kind_from_string(std::string_view(reason).substr(0, colon)).value_or(fallback);
}

}  // namespace fedshield::net
