#include "mgp/checkpoint.hpp"

#include <cstring>

#include "wire_io.hpp"

namespace mgp {

using nlohmann::json;

namespace {
constexpr char kMagic[4] = {'M', 'G', 'P', 'C'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

const TensorRecord& CheckpointData::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  raise(ErrorKind::ConfigMismatch, "checkpoint has no tensor named '" + name + "'");
}

bool CheckpointData::has_tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& ckpt) {
  json manifest = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.data.size();
  }
  json head{{"role", ckpt.role},
            {"config", ckpt.config},
            {"rng_state", ckpt.rng_state},
            {"manifest", manifest},
            {"payload_floats", offset}};
  const std::string head_str = head.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) raise(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  wire::put_u32(os, kFormatVersion);
  wire::put_u32(os, static_cast<std::uint32_t>(head_str.size()));
  wire::put_bytes(os, head_str);
  for (const auto& t : ckpt.tensors) wire::put_f32(os, t.data);
  if (!os) raise(ErrorKind::IoError, "write failed for " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(ErrorKind::IoError, "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4) raise(ErrorKind::TruncatedFile, "checkpoint header: short read");
  if (std::memcmp(magic, kMagic, 4) != 0)
    raise(ErrorKind::BadMagic, "not an MGPC checkpoint file: " + path.string());
  const std::uint32_t version = wire::get_u32(is, "checkpoint version");
  if (version != kFormatVersion)
    raise(ErrorKind::VersionMismatch,
          "checkpoint format version " + std::to_string(version) + " (expected " +
              std::to_string(kFormatVersion) + ")");
  const std::uint32_t head_len = wire::get_u32(is, "checkpoint head");
  const std::string head_str = wire::get_bytes(is, head_len, "checkpoint head");

  json head;
  try {
    head = json::parse(head_str);
  } catch (const json::exception& e) {
    raise(ErrorKind::TruncatedFile, std::string("checkpoint head: bad JSON: ") + e.what());
  }

  CheckpointData ckpt;
  ckpt.role = head.at("role").get<std::string>();
  ckpt.config = head.at("config");
  ckpt.rng_state = head.at("rng_state").get<std::string>();

  const auto payload_floats = head.at("payload_floats").get<std::uint64_t>();
  std::vector<float> payload(payload_floats);
  wire::get_f32(is, payload, "checkpoint payload");

  for (const auto& entry : head.at("manifest")) {
    TensorRecord rec;
    rec.name = entry.at("name").get<std::string>();
    rec.shape = entry.at("shape").get<ad::Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto count = static_cast<std::uint64_t>(ad::numel(rec.shape));
    if (offset + count > payload.size())
      raise(ErrorKind::TruncatedFile, "checkpoint manifest points past payload end");
    rec.data.assign(payload.begin() + static_cast<std::ptrdiff_t>(offset),
                    payload.begin() + static_cast<std::ptrdiff_t>(offset + count));
    ckpt.tensors.push_back(std::move(rec));
  }
  return ckpt;
}

}  // namespace mgp
