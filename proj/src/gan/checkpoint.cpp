#include "terragan/gan/checkpoint.hpp"

#include <fstream>
#include <map>

#include "terragan/core/binary_io.hpp"
#include "terragan/core/digest.hpp"
#include "terragan/core/errors.hpp"

namespace terragan::gan {

std::string config_digest(const nlohmann::json& config) { return sha256_hex(config.dump()); }

void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     std::span<const NamedParameter<float>> params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  BinaryWriter w(out);
  w.magic("TFCK");
  w.u16(kCheckpointVersion);
  w.string(config_digest(header));
  w.string(header.dump());
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& np : params) {
    w.string(np.name);
    write_tensor(w, np.parameter->value);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  BinaryReader r(in, path);
  r.expect_magic("TFCK");
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw CorruptionError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_digest = r.string();
  const auto header_text = r.string();
  try {
    ck.header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(path + ": bad checkpoint header: " + e.what());
  }
  if (config_digest(ck.header) != ck.config_digest) throw CorruptionError(path + ": config digest mismatch");
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.string();
    ck.tensors.emplace_back(std::move(name), read_tensor(r));
  }
  return ck;
}

void restore_parameters(const Checkpoint& checkpoint, std::span<const NamedParameter<float>> params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, tensor] : checkpoint.tensors) by_name[name] = &tensor;
  for (const auto& np : params) {
    const auto it = by_name.find(np.name);
    if (it == by_name.end()) throw CorruptionError("checkpoint lacks parameter " + np.name);
    if (it->second->shape() != np.parameter->value.shape()) {
      throw CorruptionError("checkpoint parameter " + np.name + " has shape " + shape_string(it->second->shape()) +
                            ", model expects " + shape_string(np.parameter->value.shape()));
    }
    *np.parameter = Parameter<float>(*it->second);
  }
}

}  // namespace terragan::gan
