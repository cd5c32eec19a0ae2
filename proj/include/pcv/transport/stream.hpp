// Copyright 2026 The PCV Authors
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

// Packet framing over byte streams: u32 little-endian length, then the packet.
// The same framing is used for replay files and TCP connections.

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::transport {

inline constexpr std::uint32_t kMaxRecordBytes = 64u << 20;

class PacketSink {
 public:
  virtual ~PacketSink() = default;
  virtual void send(std::span<const std::uint8_t> packet) = 0;
  virtual void close() {}
};

class PacketSource {
 public:
  virtual ~PacketSource() = default;
  // Next packet, or nullopt once the stream has ended cleanly.
  virtual std::optional<Bytes> next() = 0;
};

namespace stream_detail {

inline void put_len(std::uint8_t* out, std::uint32_t n) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
}

inline std::uint32_t get_len(const std::uint8_t* in) {
  return std::uint32_t(in[0]) | std::uint32_t(in[1]) << 8 | std::uint32_t(in[2]) << 16 |
         std::uint32_t(in[3]) << 24;
}

}  // namespace stream_detail

// ----------------------------------------------------------------- files

class RecordFileSink : public PacketSink {
 public:
  explicit RecordFileSink(const std::filesystem::path& path)
      : path_(path), os_(path, std::ios::binary | std::ios::trunc) {
    if (!os_) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  }

  void send(std::span<const std::uint8_t> packet) override {
    std::uint8_t len[4];
    stream_detail::put_len(len, static_cast<std::uint32_t>(packet.size()));
    os_.write(reinterpret_cast<const char*>(len), 4);
    os_.write(reinterpret_cast<const char*>(packet.data()), static_cast<std::streamsize>(packet.size()));
    if (!os_) fail(ErrorKind::kIo, "short write to " + path_.string());
  }

  void close() override { os_.close(); }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
};

class RecordFileSource : public PacketSource {
 public:
  explicit RecordFileSource(const std::filesystem::path& path) : path_(path), is_(path, std::ios::binary) {
    if (!is_) fail(ErrorKind::kIo, "cannot open " + path.string());
  }

  std::optional<Bytes> next() override {
    std::uint8_t len[4];
    is_.read(reinterpret_cast<char*>(len), 4);
    if (is_.gcount() == 0) return std::nullopt;
    if (is_.gcount() != 4) fail(ErrorKind::kIo, path_.string() + ": truncated record length");
    const std::uint32_t n = stream_detail::get_len(len);
    if (n > kMaxRecordBytes) fail(ErrorKind::kIo, path_.string() + ": record length out of range");
    Bytes packet(n);
    is_.read(reinterpret_cast<char*>(packet.data()), n);
    if (static_cast<std::uint32_t>(is_.gcount()) != n) fail(ErrorKind::kIo, path_.string() + ": truncated record");
    return packet;
  }

 private:
  std::filesystem::path path_;
  std::ifstream is_;
};

inline std::vector<Bytes> read_records(const std::filesystem::path& path) {
  RecordFileSource src(path);
  std::vector<Bytes> out;
  while (auto p = src.next()) out.push_back(std::move(*p));
  return out;
}

inline void write_records(const std::filesystem::path& path, const std::vector<Bytes>& packets) {
  RecordFileSink sink(path);
  for (const auto& p : packets) sink.send(p);
  sink.close();
}

// ------------------------------------------------------------- in-process

// Unbounded FIFO shared by a producer and a consumer thread.
class PacketQueue : public PacketSink, public PacketSource {
 public:
  void send(std::span<const std::uint8_t> packet) override {
    {
      std::lock_guard lock(mu_);
      q_.emplace_back(packet.begin(), packet.end());
    }
    cv_.notify_one();
  }

  void close() override {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::optional<Bytes> next() override {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    Bytes b = std::move(q_.front());
    q_.pop_front();
    return b;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> q_;
  bool closed_ = false;
};

// -------------------------------------------------------------------- TCP

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// Parses "host:port" or ":port".
inline Endpoint parse_endpoint(const std::string& addr) {
  const auto colon = addr.rfind(':');
  require(colon != std::string::npos, ErrorKind::kValidation, "address '" + addr + "' must be host:port");
  Endpoint ep;
  if (colon > 0) ep.host = addr.substr(0, colon);
  const std::string port = addr.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    require(used == port.size() && p >= 0 && p <= 65535, ErrorKind::kValidation, "bad port in '" + addr + "'");
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::logic_error&) {
    fail(ErrorKind::kValidation, "bad port in '" + addr + "'");
  }
  return ep;
}

namespace stream_detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
    fail(ErrorKind::kIo, "cannot resolve host '" + ep.host + "'");
  sockaddr_in sa = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  sa.sin_port = htons(ep.port);
  return sa;
}

inline void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::kIo, std::string("socket write failed: ") + std::strerror(errno));
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns bytes read; less than n only at end of stream.
inline std::size_t read_all(int fd, std::uint8_t* p, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, p + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::kIo, std::string("socket read failed: ") + std::strerror(errno));
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace stream_detail

struct RetryPolicy {
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(100), std::chrono::milliseconds(200),
                                                 std::chrono::milliseconds(400)};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

class TcpSink : public PacketSink {
 public:
  // One initial attempt, then one retry after each backoff delay.
  static TcpSink connect(const Endpoint& ep, const RetryPolicy& policy = {}) {
    const sockaddr_in sa = stream_detail::resolve(ep);
    std::string last;
    for (std::size_t attempt = 0;; ++attempt) {
      stream_detail::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
      if (fd.get() < 0) fail(ErrorKind::kIo, std::string("socket: ") + std::strerror(errno));
      if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) == 0) return TcpSink(std::move(fd));
      last = std::strerror(errno);
      if (attempt >= policy.backoff.size()) break;
      policy.sleep(policy.backoff[attempt]);
    }
    fail(ErrorKind::kIo, "cannot connect to " + ep.host + ":" + std::to_string(ep.port) + " after " +
                             std::to_string(policy.backoff.size() + 1) + " attempts: " + last);
  }

  void send(std::span<const std::uint8_t> packet) override {
    std::uint8_t len[4];
    stream_detail::put_len(len, static_cast<std::uint32_t>(packet.size()));
    stream_detail::write_all(fd_.get(), len, 4);
    stream_detail::write_all(fd_.get(), packet.data(), packet.size());
  }

  void close() override {
    if (fd_.get() >= 0) ::shutdown(fd_.get(), SHUT_WR);
    fd_.reset();
  }

 private:
  explicit TcpSink(stream_detail::Fd fd) : fd_(std::move(fd)) {}
  stream_detail::Fd fd_;
};

class TcpSource : public PacketSource {
 public:
  std::optional<Bytes> next() override {
    std::uint8_t len[4];
    const std::size_t got = stream_detail::read_all(fd_.get(), len, 4);
    if (got == 0) return std::nullopt;
    if (got != 4) fail(ErrorKind::kIo, "connection closed inside a record header");
    const std::uint32_t n = stream_detail::get_len(len);
    if (n > kMaxRecordBytes) fail(ErrorKind::kIo, "record length out of range");
    Bytes packet(n);
    if (stream_detail::read_all(fd_.get(), packet.data(), n) != n) fail(ErrorKind::kIo, "connection closed mid-record");
    return packet;
  }

 private:
  friend class TcpListener;
  explicit TcpSource(stream_detail::Fd fd) : fd_(std::move(fd)) {}
  stream_detail::Fd fd_;
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& ep) : fd_(::socket(AF_INET, SOCK_STREAM, 0)) {
    if (fd_.get() < 0) fail(ErrorKind::kIo, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const sockaddr_in sa = stream_detail::resolve(ep);
    if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0)
      fail(ErrorKind::kIo, "cannot bind " + ep.host + ":" + std::to_string(ep.port) + ": " + std::strerror(errno));
    if (::listen(fd_.get(), 1) != 0) fail(ErrorKind::kIo, std::string("listen: ") + std::strerror(errno));
  }

  std::uint16_t port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &len);
    return ntohs(sa.sin_port);
  }

  TcpSource accept() {
    stream_detail::Fd c(::accept(fd_.get(), nullptr, nullptr));
    if (c.get() < 0) fail(ErrorKind::kIo, std::string("accept: ") + std::strerror(errno));
    return TcpSource(std::move(c));
  }

 private:
  stream_detail::Fd fd_;
};

}  // namespace pcv::transport
