// Campaign configuration. The file is YAML with five sections; internally
// every setting is also addressable as a dotted key ("machine.reps"), which
// is how overrides and the bundle report refer to it.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/generator.hpp"
#include "core/model.hpp"
#include "core/uarch.hpp"

namespace mrf {

struct InputConfig {
  unsigned entropy_bits = 2;
  std::size_t count = 50;
  std::size_t pages = 1;
  bool operator==(const InputConfig&) const = default;
};

struct CampaignSettings {
  std::size_t max_rounds = 100;
  // Wall-clock budget in seconds; 0 means unlimited.
  double time_budget = 0;
  std::uint64_t seed = 1;
  bool stop_on_violation = true;
  std::string output_dir = "mrf-out";
  bool minimize = true;
  bool coverage_feedback = true;
  bool operator==(const CampaignSettings&) const = default;
};

struct CampaignConfig {
  GeneratorConfig generator;
  InputConfig input;
  Contract contract;
  MachineConfig machine;
  CampaignSettings campaign;

  // Cross-section checks, including model window >= hardware window.
  void check() const;

  // Sets one dotted key; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // Every setting as (dotted key, value) in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  bool operator==(const CampaignConfig&) const = default;
};

CampaignConfig parse_config(std::string_view yaml_text);
CampaignConfig load_config(const std::string& path);

// Applies "key=value" strings in order.
void apply_overrides(CampaignConfig& cfg, const std::vector<std::string>& overrides);

// Renders entries() as "key = value" lines.
std::string format_entries(const CampaignConfig& cfg);

}  // namespace mrf
