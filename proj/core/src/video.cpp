#include "mgp/video.hpp"

#include <string>

namespace mgp {

void VideoBatch::check_dims(int exp_frames, int exp_channels, int exp_h, int exp_w) const {
  if (n_frames != exp_frames || channels != exp_channels || height != exp_h || width != exp_w)
    raise(ErrorKind::DataConfigMismatch,
          "video dims " + std::to_string(n_frames) + "x" + std::to_string(channels) + "x" +
              std::to_string(height) + "x" + std::to_string(width) + " do not match config " +
              std::to_string(exp_frames) + "x" + std::to_string(exp_channels) + "x" +
              std::to_string(exp_h) + "x" + std::to_string(exp_w));
  if (pixels.size() != static_cast<std::size_t>(total_px()))
    raise(ErrorKind::DataConfigMismatch, "video pixel buffer size mismatch");
}

}  // namespace mgp
