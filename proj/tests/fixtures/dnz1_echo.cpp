// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal DNZ1 server for the client tests. In x0 mode it returns the input,
// in eps mode it returns zeros. Flags inject protocol faults.

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "diffpir/bridge_client.hpp"

namespace {

using diffpir::bridge::FrameType;

struct Options {
  std::string mode = "x0";
  std::uint32_t channels = 0;
  std::string listen;
  std::string handshake_error;
  std::string request_error;
  bool bad_magic = false;
  bool bad_version = false;
  bool truncate = false;
  bool wrong_dims = false;
  bool close_after_handshake = false;
  int delay_ms = 0;
};

bool read_full(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::read(fd, p, n);
    if (r <= 0) return false;
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

void write_full(int fd, const std::vector<std::uint8_t>& b, std::size_t limit = SIZE_MAX) {
  const std::size_t n = std::min(b.size(), limit);
  std::size_t off = 0;
  while (off < n) {
    const ssize_t r = ::write(fd, b.data() + off, n - off);
    if (r <= 0) return;
    off += static_cast<std::size_t>(r);
  }
}

std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

int serve(int in, int out, const Options& o) {
  std::uint8_t hello[8];
  if (!read_full(in, hello, 8)) return 1;
  if (!o.handshake_error.empty()) {
    write_full(out, diffpir::bridge::encode_error(o.handshake_error));
    return 0;
  }
  auto reply = diffpir::bridge::encode_hello_reply(
      o.mode == "eps" ? diffpir::bridge::OutputMode::kEps : diffpir::bridge::OutputMode::kX0,
      o.channels);
  if (o.bad_magic) reply[0] = 'X';
  if (o.bad_version) reply[4] = 9;
  write_full(out, reply);
  if (o.close_after_handshake) return 0;

  for (;;) {
    std::uint8_t head[5];
    if (!read_full(in, head, 5)) return 0;
    std::vector<std::uint8_t> payload(u32(head + 1));
    if (!read_full(in, payload.data(), payload.size())) return 1;
    const auto req = diffpir::bridge::decode_request(payload);
    if (o.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o.delay_ms));
    if (!o.request_error.empty()) {
      write_full(out, diffpir::bridge::encode_error(o.request_error));
      continue;
    }
    auto shape = req.shape;
    std::vector<float> values =
        o.mode == "eps" ? std::vector<float>(req.values.size(), 0.0f) : req.values;
    if (o.wrong_dims) {
      shape.width += 1;
      values.resize(shape.size(), 0.0f);
    }
    const auto resp = diffpir::bridge::encode_response(shape, values);
    if (o.truncate) {
      write_full(out, resp, resp.size() / 2);
      return 0;
    }
    write_full(out, resp);
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"DNZ1 echo server"};
  app.add_option("--mode", o.mode)->check(CLI::IsMember({"x0", "eps"}));
  app.add_option("--channels", o.channels);
  app.add_option("--listen", o.listen, "unix socket path; stdio when empty");
  app.add_option("--handshake-error", o.handshake_error);
  app.add_option("--request-error", o.request_error);
  app.add_flag("--bad-magic", o.bad_magic);
  app.add_flag("--bad-version", o.bad_version);
  app.add_flag("--truncate", o.truncate);
  app.add_flag("--wrong-dims", o.wrong_dims);
  app.add_flag("--close-after-handshake", o.close_after_handshake);
  app.add_option("--delay-ms", o.delay_ms);
  CLI11_PARSE(app, argc, argv);

  if (o.listen.empty()) return serve(STDIN_FILENO, STDOUT_FILENO, o);

  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, o.listen.c_str(), sizeof(addr.sun_path) - 1);
  ::unlink(o.listen.c_str());
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 1) != 0) {
    return 2;
  }
  const int conn = ::accept(fd, nullptr, nullptr);
  if (conn < 0) return 3;
  const int rc = serve(conn, conn, o);
  ::close(conn);
  ::close(fd);
  ::unlink(o.listen.c_str());
  return rc;
}
