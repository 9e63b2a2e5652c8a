#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yseg/config.hpp"
#include "yseg/io.hpp"

namespace yseg {

inline constexpr std::uint8_t kCheckpointVersion = 1;

/// Entries, in order: meta.format_version, meta.config (flat config text),
/// meta.iteration (u64 little-endian), every model tensor by name, then
/// opt.<name> momentum buffers for the trainable ones.
std::vector<YtcEntry> checkpoint_entries(const RunConfig& cfg, std::uint64_t iteration,
                                         const YModel& model, const SgdOptimizer* opt);

void save_checkpoint(const std::string& path, const RunConfig& cfg, std::uint64_t iteration,
                     const YModel& model, const SgdOptimizer* opt);

struct LoadedCheckpoint {
  RunConfig config;
  std::uint64_t iteration = 0;
  std::vector<YtcEntry> entries;
};

LoadedCheckpoint load_checkpoint(const std::string& path);
LoadedCheckpoint parse_checkpoint(std::vector<YtcEntry> entries);

/// Copies stored values into `model` (and `opt` when given). Every model
/// tensor must be present with a matching shape.
void restore(const LoadedCheckpoint& ckpt, YModel& model, SgdOptimizer* opt);

}  // namespace yseg
