// Copyright 2026 The farmwatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace farmwatch::net {

// IPv4 UDP endpoint.
struct Endpoint {
  std::uint32_t addr = 0;  // network byte order
  std::uint16_t port = 0;  // host byte order

  sockaddr_in sockaddr() const {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = addr;
    sa.sin_port = htons(port);
    return sa;
  }

  static Endpoint from(const sockaddr_in& sa) { return {sa.sin_addr.s_addr, ntohs(sa.sin_port)}; }

  std::string str() const {
    char buf[INET_ADDRSTRLEN] = {};
    in_addr a{addr};
    ::inet_ntop(AF_INET, &a, buf, sizeof buf);
    return std::string(buf) + ":" + std::to_string(port);
  }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// "host", "host:port" or "a.b.c.d:port"; names go through the resolver.
inline std::optional<Endpoint> resolve(const std::string& spec, std::uint16_t default_port) {
  std::string host = spec;
  std::uint16_t port = default_port;
  if (auto colon = spec.rfind(':'); colon != std::string::npos && spec.find(':') == colon) {
    host = spec.substr(0, colon);
    auto p = spec.substr(colon + 1);
    char* end = nullptr;
    long v = std::strtol(p.c_str(), &end, 10);
    if (p.empty() || *end != '\0' || v <= 0 || v > 65535) return std::nullopt;
    port = static_cast<std::uint16_t>(v);
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) return std::nullopt;
  Endpoint ep{reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr.s_addr, port};
  ::freeaddrinfo(res);
  return ep;
}

class UdpSocket {
 public:
  UdpSocket() = default;

  // Binds to `bind_addr`:`port` (0 = ephemeral). Throws std::system_error.
  static UdpSocket bind(std::uint16_t port = 0, const char* bind_addr = "0.0.0.0") {
    UdpSocket s;
    s.fd_ = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0);
    if (s.fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
    int buf = 4 << 20;
    ::setsockopt(s.fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
    ::setsockopt(s.fd_, SOL_SOCKET, SO_SNDBUF, &buf, sizeof buf);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    ::inet_pton(AF_INET, bind_addr, &sa.sin_addr);
    if (::bind(s.fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
      throw std::system_error(errno, std::generic_category(), "bind udp port " + std::to_string(port));
    }
    return s;
  }

  UdpSocket(UdpSocket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UdpSocket& operator=(UdpSocket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket() { close(); }

  int fd() const noexcept { return fd_; }

  std::uint16_t local_port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    return ntohs(sa.sin_port);
  }

  bool send_to(const Endpoint& to, std::span<const std::uint8_t> data) const {
    auto sa = to.sockaddr();
    auto n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(&sa), sizeof sa);
    return n == static_cast<ssize_t>(data.size());
  }

  // Non-blocking; false when nothing is queued.
  bool recv_from(std::vector<std::uint8_t>& buf, Endpoint& from) const {
    buf.resize(65536);
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) {
      buf.clear();
      return false;
    }
    buf.resize(static_cast<std::size_t>(n));
    from = Endpoint::from(sa);
    return true;
  }

  // Waits until readable or `timeout` seconds pass.
  bool wait_readable(double timeout) const {
    pollfd p{fd_, POLLIN, 0};
    int ms = timeout <= 0 ? 0 : static_cast<int>(std::ceil(timeout * 1000.0));
    return ::poll(&p, 1, ms) > 0;
  }

 private:
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  int fd_ = -1;
};

}  // namespace farmwatch::net
