// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/bridge_client.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include "diffpir/error.hpp"

extern char** environ;

namespace diffpir::bridge {
namespace {

using Clock = Transport::Clock;

[[noreturn]] void lost(const std::string& what) { throw Error(ErrorCode::kConnectionLost, what); }
[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::kProtocolViolation, what);
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

void wait_ready(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return;
    if (rc == 0) lost("bridge timed out");
    if (errno != EINTR) lost(std::string("poll: ") + std::strerror(errno));
  }
}

class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool is_socket)
      : read_fd_(read_fd), write_fd_(write_fd), is_socket_(is_socket) {}
  ~FdTransport() override {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
  }

  void write_all(const std::uint8_t* data, std::size_t n, Clock::time_point deadline) override {
    while (n > 0) {
      wait_ready(write_fd_, POLLOUT, deadline);
      const ssize_t w = is_socket_ ? ::send(write_fd_, data, n, MSG_NOSIGNAL)
                                   : ::write(write_fd_, data, n);
      if (w < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        lost(std::string("write: ") + std::strerror(errno));
      }
      data += w;
      n -= static_cast<std::size_t>(w);
    }
  }

  std::size_t read_some(std::uint8_t* data, std::size_t n, Clock::time_point deadline) override {
    std::size_t got = 0;
    while (got < n) {
      wait_ready(read_fd_, POLLIN, deadline);
      const ssize_t r = ::read(read_fd_, data + got, n - got);
      if (r < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        lost(std::string("read: ") + std::strerror(errno));
      }
      if (r == 0) break;
      got += static_cast<std::size_t>(r);
    }
    return got;
  }

 protected:
  int read_fd_;
  int write_fd_;
  bool is_socket_;
};

class ProcessTransport final : public FdTransport {
 public:
  ProcessTransport(int read_fd, int write_fd, pid_t pid)
      : FdTransport(read_fd, write_fd, false), pid_(pid) {}
  ~ProcessTransport() override {
    ::close(write_fd_);
    write_fd_ = -1;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

std::unique_ptr<Transport> open_unix(const std::string& path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof(addr.sun_path)) lost("socket path too long: " + path);
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) lost(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int e = errno;
    ::close(fd);
    lost("connect " + path + ": " + std::strerror(e));
  }
  return std::make_unique<FdTransport>(fd, fd, true);
}

std::unique_ptr<Transport> open_tcp(const std::string& spec, std::chrono::milliseconds timeout) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "tcp endpoint needs host:port: " + spec);
  }
  const std::string host = spec.substr(0, colon);
  const std::string port = spec.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    lost("resolve " + spec + ": " + ::gai_strerror(rc));
  }
  const auto deadline = Clock::now() + timeout;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK,
                            ai->ai_protocol);
    if (fd < 0) continue;
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      if (::poll(&p, 1, remaining_ms(deadline)) == 1) {
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        errno = err;
      } else {
        errno = ETIMEDOUT;
      }
    }
    if (rc == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<FdTransport>(fd, fd, true);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  lost("connect " + spec + ": " + last_error);
}

std::unique_ptr<Transport> open_exec(const std::string& command) {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) lost(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    lost(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv),
                               environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    lost("spawn '" + command + "': " + std::strerror(rc));
  }
  return std::make_unique<ProcessTransport>(from_child[0], to_child[1], pid);
}

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

std::vector<std::uint8_t> frame(FrameType type, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 5);
  put_u8(out, static_cast<std::uint8_t>(type));
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::uint64_t dims_count(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
  return static_cast<std::uint64_t>(c) * h * w;
}

}  // namespace

std::unique_ptr<Transport> open_transport(const std::string& endpoint,
                                          std::chrono::milliseconds timeout) {
  if (endpoint.rfind("unix:", 0) == 0) return open_unix(endpoint.substr(5));
  if (endpoint.rfind("tcp:", 0) == 0) return open_tcp(endpoint.substr(4), timeout);
  if (endpoint.rfind("exec:", 0) == 0) return open_exec(endpoint.substr(5));
  throw Error(ErrorCode::kInvalidConfig, "unknown bridge endpoint: " + endpoint);
}

std::vector<std::uint8_t> encode_hello() {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kProtocolVersion);
  return out;
}

std::vector<std::uint8_t> encode_hello_reply(OutputMode mode, std::uint32_t channels) {
  std::vector<std::uint8_t> out = encode_hello();
  put_u8(out, static_cast<std::uint8_t>(mode));
  put_u32(out, channels);
  return out;
}

std::vector<std::uint8_t> encode_request(const Image& x, float alpha_bar, std::uint32_t t) {
  std::vector<std::uint8_t> payload;
  payload.reserve(20 + 4 * x.size());
  put_f32(payload, alpha_bar);
  put_u32(payload, t);
  put_u32(payload, static_cast<std::uint32_t>(x.channels()));
  put_u32(payload, static_cast<std::uint32_t>(x.height()));
  put_u32(payload, static_cast<std::uint32_t>(x.width()));
  for (double v : x.data()) put_f32(payload, static_cast<float>(v));
  return frame(FrameType::kRequest, payload);
}

std::vector<std::uint8_t> encode_response(const Shape& shape, const std::vector<float>& values) {
  std::vector<std::uint8_t> payload;
  payload.reserve(12 + 4 * values.size());
  put_u32(payload, static_cast<std::uint32_t>(shape.channels));
  put_u32(payload, static_cast<std::uint32_t>(shape.height));
  put_u32(payload, static_cast<std::uint32_t>(shape.width));
  for (float v : values) put_f32(payload, v);
  return frame(FrameType::kResponse, payload);
}

std::vector<std::uint8_t> encode_error(const std::string& message) {
  return frame(FrameType::kError, std::vector<std::uint8_t>(message.begin(), message.end()));
}

Request decode_request(const std::vector<std::uint8_t>& payload) {
  if (payload.size() < 20) violation("request payload shorter than its header");
  const std::uint8_t* p = payload.data();
  Request r;
  r.alpha_bar = get_f32(p);
  r.t = get_u32(p + 4);
  const std::uint32_t c = get_u32(p + 8), h = get_u32(p + 12), w = get_u32(p + 16);
  const std::uint64_t n = dims_count(c, h, w);
  if (payload.size() != 20 + 4 * n) violation("request length does not match its dimensions");
  r.shape = Shape{static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)};
  r.values.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) r.values[i] = get_f32(p + 20 + 4 * i);
  return r;
}

// ---------------------------------------------------------------------------

ExternalDenoiser::ExternalDenoiser(const std::string& endpoint, ClientOptions options)
    : ExternalDenoiser(open_transport(endpoint, options.timeout), options) {}

ExternalDenoiser::ExternalDenoiser(std::unique_ptr<Transport> transport, ClientOptions options)
    : transport_(std::move(transport)), options_(options) {
  handshake();
}

ExternalDenoiser::~ExternalDenoiser() = default;

void ExternalDenoiser::read_exact(std::uint8_t* data, std::size_t n, Clock::time_point deadline,
                                  bool frame_started) {
  const std::size_t got = transport_->read_some(data, n, deadline);
  if (got == n) return;
  if (got == 0 && !frame_started) lost("bridge closed the connection");
  violation("truncated frame from bridge");
}

std::vector<std::uint8_t> ExternalDenoiser::read_payload(std::uint32_t n,
                                                        Clock::time_point deadline) {
  constexpr std::size_t kChunk = 1u << 20;
  std::vector<std::uint8_t> out;
  while (out.size() < n) {
    const std::size_t have = out.size();
    out.resize(have + std::min<std::size_t>(kChunk, n - have));
    read_exact(out.data() + have, out.size() - have, deadline, true);
  }
  return out;
}

void ExternalDenoiser::handshake() {
  const auto deadline = Clock::now() + options_.timeout;
  const auto hello = encode_hello();
  transport_->write_all(hello.data(), hello.size(), deadline);

  std::uint8_t head[13];
  read_exact(head, 1, deadline, false);
  if (head[0] == static_cast<std::uint8_t>(FrameType::kError)) {
    std::uint8_t len[4];
    read_exact(len, 4, deadline, true);
    const std::uint32_t n = get_u32(len);
    if (n > kMaxPayload) violation("error frame too long");
    const auto message = read_payload(n, deadline);
    throw Error(ErrorCode::kRemoteError, "bridge rejected handshake: " + std::string(message.begin(), message.end()));
  }
  read_exact(head + 1, 12, deadline, true);
  if (std::memcmp(head, kMagic, 4) != 0) violation("bad handshake magic");
  if (get_u32(head + 4) != kProtocolVersion) {
    violation("unsupported protocol version " + std::to_string(get_u32(head + 4)));
  }
  if (head[8] > static_cast<std::uint8_t>(OutputMode::kEps)) {
    violation("unknown output mode " + std::to_string(head[8]));
  }
  mode_ = static_cast<OutputMode>(head[8]);
  channels_ = get_u32(head + 9);
}

Image ExternalDenoiser::do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) {
  if (channels_ != 0 && static_cast<std::uint32_t>(x_t.channels()) != channels_) {
    throw Error(ErrorCode::kShapeMismatch, "bridge model expects " + std::to_string(channels_) +
                                               " channels, got " + to_string(x_t.shape()));
  }
  const double ab = s.alpha_bar(t);
  Image shifted(x_t.shape());
  for (std::size_t i = 0; i < x_t.size(); ++i) shifted[i] = 2.0 * x_t[i] - 1.0;

  const auto deadline = Clock::now() + options_.timeout;
  const auto request = encode_request(shifted, static_cast<float>(ab), static_cast<std::uint32_t>(t));
  transport_->write_all(request.data(), request.size(), deadline);

  std::uint8_t head[5];
  read_exact(head, 5, deadline, false);
  const std::uint32_t n = get_u32(head + 1);
  if (n > kMaxPayload) violation("frame length " + std::to_string(n) + " exceeds limit");
  const std::vector<std::uint8_t> payload = read_payload(n, deadline);

  if (head[0] == static_cast<std::uint8_t>(FrameType::kError)) {
    throw Error(ErrorCode::kRemoteError,
                "bridge: " + std::string(payload.begin(), payload.end()));
  }
  if (head[0] != static_cast<std::uint8_t>(FrameType::kResponse)) {
    violation("unexpected frame type " + std::to_string(head[0]));
  }
  if (n < 12) violation("response payload shorter than its header");
  const std::uint32_t c = get_u32(payload.data()), h = get_u32(payload.data() + 4),
                      w = get_u32(payload.data() + 8);
  const std::uint64_t count = dims_count(c, h, w);
  if (n != 12 + 4 * count) violation("response length does not match its dimensions");
  const Shape shape{static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)};
  if (shape != x_t.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "bridge returned " + to_string(shape) + " for " + to_string(x_t.shape()));
  }

  Image out(shape);
  for (std::size_t i = 0; i < count; ++i) out[i] = get_f32(payload.data() + 12 + 4 * i);
  if (mode_ == OutputMode::kEps) out = predict_x0_from_eps(shifted, out, ab);
  for (double& v : out.data()) v = 0.5 * (v + 1.0);
  return out;
}

}  // namespace diffpir::bridge
