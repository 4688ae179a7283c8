#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "creweight/experiments.hpp"

namespace creweight {

inline constexpr int kConfigVersion = 1;

/// Contents of a simulation config file. Sections that are absent stay nullopt.
struct SimConfig {
  std::optional<CodebookSpec> codebook;
  std::optional<ModelSpec> model;
  std::optional<ChannelSpec> channel;
  std::vector<ChannelSpec> sweep;  // "channels": robustness grid
};

/// Parses a versioned JSON config (keys documented in docs/config.md). Missing
/// keys inside a section keep their defaults; unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the key.
SimConfig parse_sim_config(const std::string& text);
SimConfig load_sim_config(const std::filesystem::path& path);

}  // namespace creweight
