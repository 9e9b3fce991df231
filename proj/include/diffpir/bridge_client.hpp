// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Client side of the DNZ1 denoiser protocol.
//
// Frames are little-endian. The client opens with "DNZ1" + u32 version and
// the server answers "DNZ1" + u32 version + u8 output mode + u32 channels.
// Requests carry (f32 alpha_bar, u32 t, u32 C, u32 H, u32 W, f32 values);
// responses carry (u32 C, u32 H, u32 W, f32 values); errors carry UTF-8 text.

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "diffpir/denoise.hpp"

namespace diffpir::bridge {

inline constexpr char kMagic[4] = {'D', 'N', 'Z', '1'};
inline constexpr std::uint32_t kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

enum class FrameType : std::uint8_t { kRequest = 1, kResponse = 2, kError = 3 };
enum class OutputMode : std::uint8_t { kX0 = 0, kEps = 1 };

/// Byte stream with deadline-bounded reads and writes.
class Transport {
 public:
  using Clock = std::chrono::steady_clock;
  virtual ~Transport() = default;
  /// Throws ConnectionLost on closure, error, or deadline expiry.
  virtual void write_all(const std::uint8_t* data, std::size_t n, Clock::time_point deadline) = 0;
  /// Reads up to n bytes; returns fewer only at end of stream.
  virtual std::size_t read_some(std::uint8_t* data, std::size_t n, Clock::time_point deadline) = 0;
};

/// Endpoint forms: "unix:/path/to.sock", "tcp:host:port", "exec:shell command"
/// (the command speaks the protocol on its stdin/stdout).
std::unique_ptr<Transport> open_transport(const std::string& endpoint,
                                          std::chrono::milliseconds timeout);

// Frame codecs, shared with the test fixtures.
std::vector<std::uint8_t> encode_hello();
std::vector<std::uint8_t> encode_hello_reply(OutputMode mode, std::uint32_t channels);
std::vector<std::uint8_t> encode_request(const Image& x, float alpha_bar, std::uint32_t t);
std::vector<std::uint8_t> encode_response(const Shape& shape, const std::vector<float>& values);
std::vector<std::uint8_t> encode_error(const std::string& message);

struct Request {
  float alpha_bar = 1.0f;
  std::uint32_t t = 0;
  Shape shape;
  std::vector<float> values;
};

/// Parses a request payload (without the 5-byte header). Throws ProtocolViolation.
Request decode_request(const std::vector<std::uint8_t>& payload);

struct ClientOptions {
  std::chrono::milliseconds timeout{30000};
};

/// Denoiser backed by a remote process. Requests on one handle are serialized.
class ExternalDenoiser final : public Denoiser {
 public:
  /// Connects and completes the handshake.
  ExternalDenoiser(const std::string& endpoint, ClientOptions options = {});
  ExternalDenoiser(std::unique_ptr<Transport> transport, ClientOptions options = {});
  ~ExternalDenoiser() override;

  OutputMode mode() const { return mode_; }
  std::uint32_t channels() const { return channels_; }
  std::string name() const override { return "extern"; }

 protected:
  Image do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) override;

 private:
  void handshake();
  void read_exact(std::uint8_t* data, std::size_t n, Transport::Clock::time_point deadline,
                  bool frame_started);
  /// Reads an n-byte payload in bounded chunks.
  std::vector<std::uint8_t> read_payload(std::uint32_t n, Transport::Clock::time_point deadline);

  std::unique_ptr<Transport> transport_;
  ClientOptions options_;
  OutputMode mode_ = OutputMode::kX0;
  std::uint32_t channels_ = 0;
};

}  // namespace diffpir::bridge
