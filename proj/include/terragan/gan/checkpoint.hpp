#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "terragan/core/autograd.hpp"

namespace terragan::gan {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Decoded checkpoint file:
///   "TFCK" | u16 version | string config_digest | string header_json |
///   u32 count | count x (string name, tensor)
/// where strings are u32-length-prefixed and tensors use the TFTN layout.
struct Checkpoint {
  std::string config_digest;
  nlohmann::json header;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

/// SHA-256 of the compact JSON dump.
std::string config_digest(const nlohmann::json& config);

void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     std::span<const NamedParameter<float>> params);
Checkpoint load_checkpoint(const std::string& path);

/// Copies tensors into `params` by name; every parameter must be present with
/// a matching shape.
void restore_parameters(const Checkpoint& checkpoint, std::span<const NamedParameter<float>> params);

}  // namespace terragan::gan
