#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgp/errors.hpp"

namespace mgp {

// A batch of video sequences: pixels in [-1, 1], row-major
// [sequence][frame][channel][row][col], float32 storage.
struct VideoBatch {
  int batch = 0;
  int n_frames = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  std::int64_t frame_px() const {
    return static_cast<std::int64_t>(channels) * height * width;
  }
  std::int64_t seq_px() const { return frame_px() * n_frames; }
  std::int64_t total_px() const { return seq_px() * batch; }

  static VideoBatch zeros(int batch, int n_frames, int channels, int height, int width) {
    VideoBatch v{batch, n_frames, channels, height, width, {}};
    v.pixels.assign(static_cast<std::size_t>(v.total_px()), -1.0f);
    return v;
  }

  std::span<float> sequence(int b) {
    return std::span<float>(pixels).subspan(static_cast<std::size_t>(b) * seq_px(),
                                            static_cast<std::size_t>(seq_px()));
  }
  std::span<const float> sequence(int b) const {
    return std::span<const float>(pixels).subspan(static_cast<std::size_t>(b) * seq_px(),
                                                  static_cast<std::size_t>(seq_px()));
  }
  std::span<float> frame(int b, int t) {
    return sequence(b).subspan(static_cast<std::size_t>(t) * frame_px(),
                               static_cast<std::size_t>(frame_px()));
  }
  std::span<const float> frame(int b, int t) const {
    return sequence(b).subspan(static_cast<std::size_t>(t) * frame_px(),
                               static_cast<std::size_t>(frame_px()));
  }

  void check_dims(int exp_frames, int exp_channels, int exp_h, int exp_w) const;
};

// Latent codes for a batch: row-major [sequence][channel][frame].
struct LatentCode {
  int batch = 0;
  int d = 0;
  int n_frames = 0;
  std::vector<double> z;

  double& at(int b, int c, int t) {
    return z[(static_cast<std::size_t>(b) * d + c) * n_frames + t];
  }
  double at(int b, int c, int t) const {
    return z[(static_cast<std::size_t>(b) * d + c) * n_frames + t];
  }

  static LatentCode zeros(int batch, int d, int n_frames) {
    LatentCode l{batch, d, n_frames, {}};
    l.z.assign(static_cast<std::size_t>(batch) * d * n_frames, 0.0);
    return l;
  }
};

}  // namespace mgp
