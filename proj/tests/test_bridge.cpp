// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <thread>

#include "checks.hpp"
#include "diffpir/bridge_client.hpp"
#include "diffpir/schedule.hpp"
#include "oracles.hpp"

using namespace diffpir;
using namespace diffpir::bridge;
using namespace std::chrono_literals;
using diffpir::testing::TempDir;

namespace {

const NoiseSchedule& schedule() {
  static const NoiseSchedule s = build_linear_schedule();
  return s;
}

std::string echo(const std::string& flags = "") {
  return std::string("exec:") + DNZ1_ECHO_PATH + " " + flags;
}

// Replays a fixed byte stream and records what the client writes.
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::vector<std::uint8_t> replies) : replies_(std::move(replies)) {}

  void write_all(const std::uint8_t* data, std::size_t n, Clock::time_point) override {
    written_.insert(written_.end(), data, data + n);
  }
  std::size_t read_some(std::uint8_t* data, std::size_t n, Clock::time_point) override {
    const std::size_t k = std::min(n, replies_.size() - pos_);
    std::memcpy(data, replies_.data() + pos_, k);
    pos_ += k;
    return k;
  }

 private:
  std::vector<std::uint8_t> replies_;
  std::size_t pos_ = 0;
  std::vector<std::uint8_t> written_;
};

std::vector<std::uint8_t> concat(std::vector<std::uint8_t> a, const std::vector<std::uint8_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

ExternalDenoiser scripted(const std::vector<std::uint8_t>& after_hello,
                          OutputMode mode = OutputMode::kX0) {
  return ExternalDenoiser(std::make_unique<ScriptedTransport>(
      concat(encode_hello_reply(mode, 0), after_hello)));
}

}  // namespace

TEST_CASE("frame codecs") {
  const auto hello = encode_hello();
  CHECK(hello == std::vector<std::uint8_t>{'D', 'N', 'Z', '1', 1, 0, 0, 0});
  const auto reply = encode_hello_reply(OutputMode::kEps, 3);
  CHECK(reply.size() == 13);
  CHECK(reply[8] == 1);
  CHECK(reply[9] == 3);

  Image x(Shape{2, 1, 2}, std::vector<double>{0.5, -1.0, 0.25, 2.0});
  const auto req = encode_request(x, 0.125f, 77);
  REQUIRE(req.size() == 5 + 20 + 16);
  CHECK(req[0] == 1);
  const Request r = decode_request({req.begin() + 5, req.end()});
  CHECK(r.alpha_bar == 0.125f);
  CHECK(r.t == 77);
  CHECK(r.shape == x.shape());
  CHECK(r.values == std::vector<float>{0.5f, -1.0f, 0.25f, 2.0f});

  const auto resp = encode_response({1, 1, 1}, {1.5f});
  CHECK(resp == std::vector<std::uint8_t>{2, 16, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,
                                          0, 0, 0xc0, 0x3f});
  const auto err = encode_error("no");
  CHECK(err == std::vector<std::uint8_t>{3, 2, 0, 0, 0, 'n', 'o'});

  CHECK_ERROR_CODE(decode_request({1, 2, 3}), ErrorCode::kProtocolViolation);
  std::vector<std::uint8_t> bad(req.begin() + 5, req.end());
  bad.pop_back();
  CHECK_ERROR_CODE(decode_request(bad), ErrorCode::kProtocolViolation);
}

TEST_CASE("echo bridge over a pipe") {
  ExternalDenoiser d(echo());
  CHECK(d.mode() == OutputMode::kX0);
  CHECK(d.name() == "extern");
  Rng rng(1);
  const Image x = oracle::random_image({3, 8, 8}, rng);
  for (int t : {1, 500, 1000}) CHECK(oracle::max_abs_diff(d.predict_x0(x, t, schedule()), x) < 1e-6);
  CHECK(d.evaluations() == 3);
}

TEST_CASE("eps output is converted to x0") {
  ExternalDenoiser d(echo("--mode eps"));
  CHECK(d.mode() == OutputMode::kEps);
  Rng rng(2);
  const Image x = oracle::random_image({1, 5, 5}, rng);
  const int t = 200;
  const double sab = std::sqrt(schedule().alpha_bar(t));
  const Image x0 = d.predict_x0(x, t, schedule());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(x0[i] - 0.5 * ((2.0 * x[i] - 1.0) / sab + 1.0)) < 1e-6);
  }
}

TEST_CASE("large image loopback") {
  ExternalDenoiser d(echo("--channels 3"));
  CHECK(d.channels() == 3);
  Rng rng(3);
  const Image x = oracle::random_image({3, 256, 256}, rng);
  CHECK(oracle::max_abs_diff(d.predict_x0(x, 10, schedule()), x) < 1e-6);
  CHECK_ERROR_CODE(d.predict_x0(Image(Shape{1, 4, 4}), 10, schedule()), ErrorCode::kShapeMismatch);
}

TEST_CASE("unix socket transport") {
  TempDir dir;
  const auto sock = dir / "echo.sock";
  const std::string cmd = std::string(DNZ1_ECHO_PATH) + " --listen " + sock.string() + " &";
  REQUIRE(std::system(cmd.c_str()) == 0);
  for (int i = 0; i < 500 && !std::filesystem::exists(sock); ++i) std::this_thread::sleep_for(10ms);
  REQUIRE(std::filesystem::exists(sock));
  ExternalDenoiser d("unix:" + sock.string());
  const Image x(Shape{1, 2, 2}, 0.25);
  CHECK(oracle::max_abs_diff(d.predict_x0(x, 3, schedule()), x) < 1e-6);
}

TEST_CASE("connection failures") {
  CHECK_ERROR_CODE(ExternalDenoiser("unix:/nonexistent/diffpir.sock"), ErrorCode::kConnectionLost);
  CHECK_ERROR_CODE(ExternalDenoiser("tcp:127.0.0.1:1", {.timeout = 2000ms}),
                   ErrorCode::kConnectionLost);
  CHECK_ERROR_CODE(ExternalDenoiser("tcp:nocolon"), ErrorCode::kInvalidConfig);
  CHECK_ERROR_CODE(ExternalDenoiser("carrier-pigeon:x"), ErrorCode::kInvalidConfig);
  CHECK_ERROR_CODE(ExternalDenoiser("exec:exit 0"), ErrorCode::kConnectionLost);
  ExternalDenoiser closes(echo("--close-after-handshake"));
  CHECK_ERROR_CODE(closes.predict_x0(Image(Shape{1, 2, 2}), 1, schedule()),
                   ErrorCode::kConnectionLost);
}

TEST_CASE("handshake faults") {
  CHECK_ERROR_CODE(ExternalDenoiser(echo("--handshake-error 'model missing'")),
                   ErrorCode::kRemoteError);
  CHECK_ERROR_CODE(ExternalDenoiser(echo("--bad-magic")), ErrorCode::kProtocolViolation);
  CHECK_ERROR_CODE(ExternalDenoiser(echo("--bad-version")), ErrorCode::kProtocolViolation);
  auto reply = encode_hello_reply(OutputMode::kX0, 0);
  reply[8] = 7;
  CHECK_ERROR_CODE(ExternalDenoiser(std::make_unique<ScriptedTransport>(reply)),
                   ErrorCode::kProtocolViolation);
  reply.resize(6);
  CHECK_ERROR_CODE(ExternalDenoiser(std::make_unique<ScriptedTransport>(reply)),
                   ErrorCode::kProtocolViolation);
}

TEST_CASE("request faults") {
  const Image x(Shape{1, 3, 3}, 0.5);
  ExternalDenoiser remote(echo("--request-error 'bad dims'"));
  try {
    remote.predict_x0(x, 1, schedule());
    FAIL("expected RemoteError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRemoteError);
    CHECK(std::string(e.what()).find("bad dims") != std::string::npos);
  }
  CHECK_ERROR_CODE(remote.predict_x0(x, 1, schedule()), ErrorCode::kRemoteError);

  ExternalDenoiser truncated(echo("--truncate"));
  CHECK_ERROR_CODE(truncated.predict_x0(x, 1, schedule()), ErrorCode::kProtocolViolation);

  ExternalDenoiser wrong(echo("--wrong-dims"));
  CHECK_ERROR_CODE(wrong.predict_x0(x, 1, schedule()), ErrorCode::kShapeMismatch);
}

TEST_CASE("per-request deadline") {
  ExternalDenoiser slow(echo("--delay-ms 3000"), {.timeout = 200ms});
  const auto start = std::chrono::steady_clock::now();
  CHECK_ERROR_CODE(slow.predict_x0(Image(Shape{1, 2, 2}), 1, schedule()), ErrorCode::kConnectionLost);
  CHECK(std::chrono::steady_clock::now() - start < 2s);
}

TEST_CASE("scripted responses") {
  const Image x(Shape{1, 1, 2}, 0.5);
  const auto& s = schedule();
  auto ok = scripted(encode_response({1, 1, 2}, {0.0f, 1.0f}));
  const Image r = ok.predict_x0(x, 1, s);
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 1.0);

  auto oversized = scripted({2, 0xff, 0xff, 0xff, 0x7f});
  CHECK_ERROR_CODE(oversized.predict_x0(x, 1, s), ErrorCode::kProtocolViolation);
  auto wrong_type = scripted({9, 0, 0, 0, 0});
  CHECK_ERROR_CODE(wrong_type.predict_x0(x, 1, s), ErrorCode::kProtocolViolation);
  auto short_header = scripted({2, 4, 0, 0, 0, 1, 0, 0, 0});
  CHECK_ERROR_CODE(short_header.predict_x0(x, 1, s), ErrorCode::kProtocolViolation);
  auto lying = scripted({2, 12, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0});
  CHECK_ERROR_CODE(lying.predict_x0(x, 1, s), ErrorCode::kProtocolViolation);
  auto nan = scripted(encode_response({1, 1, 2}, {std::nanf(""), 0.0f}));
  CHECK_ERROR_CODE(nan.predict_x0(x, 1, s), ErrorCode::kNumericalInstability);
  auto silent = scripted({});
  CHECK_ERROR_CODE(silent.predict_x0(x, 1, s), ErrorCode::kConnectionLost);
}

TEST_CASE("malformed responses never yield an image") {
  Rng rng(9);
  const Image x(Shape{1, 2, 3}, 0.5);
  const auto valid = encode_response(x.shape(), std::vector<float>(6, 0.25f));
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint8_t> bytes = valid;
    switch (trial % 4) {
      case 0:  // truncate
        bytes.resize(static_cast<std::size_t>(rng.uniform() * (valid.size() - 1)));
        break;
      case 1:  // corrupt the header
        bytes[static_cast<std::size_t>(rng.uniform() * 17)] ^=
            static_cast<std::uint8_t>(1 + rng.uniform() * 254);
        break;
      case 2:  // random bytes
        bytes.resize(static_cast<std::size_t>(rng.uniform() * 64));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform() * 256);
        if (!bytes.empty() && bytes[0] == 2) bytes[0] = 4;
        break;
      default:  // NaN payload words
        for (std::size_t i = 17; i < bytes.size(); i += 4) bytes[i + 3] = 0x7f, bytes[i + 2] = 0xc0;
        break;
    }
    auto d = scripted(bytes);
    try {
      d.predict_x0(x, 1, schedule());
    } catch (const Error&) {
      ++failures;
    }
  }
  CHECK(failures == 1000);
}
