#pragma once

#include <cstdint>
#include <string>

#include "mbisac/config.hpp"
#include "mbisac/mbml/train.hpp"

namespace mbisac::mbml {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t configHash = 0;
  TrainState state;
};

std::string checkpointToJson(const Checkpoint& checkpoint);
/// Throws ConfigError on malformed text or an unsupported version.
Checkpoint checkpointFromJson(const std::string& text);

void saveCheckpoint(const std::string& path, const ScenarioConfig& cfg, const TrainState& state);
/// Loads a checkpoint and checks it was written under the same scenario.
/// Throws ConfigError on a missing file, a parse failure, or a config mismatch.
TrainState loadCheckpoint(const std::string& path, const ScenarioConfig& cfg);

}  // namespace mbisac::mbml
