#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgp/autodiff.hpp"

namespace mgp {

// "MGPC" checkpoint container: magic, u32 format version, a length-prefixed
// JSON block (role tag, config echo, RNG state, tensor manifest), then the
// concatenated float32 little-endian payload. Offsets in the manifest are in
// float units from the payload start. Round-trips bit-exactly.

struct TensorRecord {
  std::string name;
  ad::Shape shape;
  std::vector<float> data;
};

struct CheckpointData {
  std::string role;  // "vae" | "predictor"
  nlohmann::json config;
  std::string rng_state;
  std::vector<TensorRecord> tensors;

  const TensorRecord& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& ckpt);
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace mgp
