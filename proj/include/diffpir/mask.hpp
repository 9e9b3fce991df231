// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace diffpir {

/// Per-pixel keep (1) / drop (0) flags shared by all channels.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, std::vector<std::uint8_t> keep);
  static Mask all_keep(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return keep_.size(); }
  bool kept(int y, int x) const { return keep_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  const std::uint8_t* data() const { return keep_.data(); }
  const std::vector<std::uint8_t>& flags() const { return keep_; }
  std::size_t kept_count() const;
  std::size_t dropped_count() const { return size() - kept_count(); }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> keep_;
};

}  // namespace diffpir
