// Campaign driver: rounds of generate / model / measure / analyse, coverage
// feedback, violation bundles and their reproduction.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/analyser.hpp"
#include "core/bundle.hpp"
#include "core/config.hpp"
#include "core/coverage.hpp"
#include "core/generator.hpp"
#include "core/postprocessor.hpp"

namespace mrf {

std::uint64_t splitmix64(std::uint64_t x);
// Seed of round `round` in a campaign with master seed `master`.
std::uint64_t round_seed(std::uint64_t master, std::size_t round);

struct RoundResult {
  std::size_t round = 0;
  std::uint64_t seed = 0;
  FuzzingScale scale;
  AnalysisStats stats;
  std::size_t inputs_in_effective_classes = 0;
  std::optional<Violation> violation;
  std::string error;  // non-empty if a component failed

  TestCase test_case;
  std::vector<Input> inputs;
  std::vector<CTrace> ctraces;
  std::vector<HTrace> htraces;
  std::vector<PatternCounts> patterns;
};

// One round at the given scale. Never throws on component failures; those
// are reported through RoundResult::error. `coverage` may be null.
RoundResult fuzzing_round(const CampaignConfig& cfg, const FuzzingScale& scale, std::size_t round,
                          CoverageState* coverage = nullptr);

struct CampaignReport {
  std::size_t rounds_run = 0;
  std::size_t violations = 0;
  std::size_t errors = 0;
  bool stopped_on_violation = false;
  std::vector<std::string> log;
  std::vector<std::string> bundles;
  std::vector<MinimizationResult> minimizations;
  std::vector<RoundResult> violating_rounds;
  double mean_inputs = 0;
  double mean_effective_classes = 0;
  double mean_effective_input_fraction = 0;
  // Covered combinations of size 1..3 after each round.
  std::vector<std::array<std::size_t, kMaxCombinationSize>> coverage_trajectory;
  FuzzingScale final_scale;

  std::string format() const;
};

using LogSink = std::function<void(const std::string&)>;

// Runs a campaign. Throws ConfigError before the first round on a bad
// configuration. Bundles, campaign.log and report.txt go to
// campaign.output_dir unless it is empty.
CampaignReport fuzz_campaign(const CampaignConfig& cfg, const LogSink& sink = {});

struct ReproduceResult {
  bool recurs = false;
  bool stored_traces_match = true;
  std::string message;
  std::optional<Violation> violation;
};

// Re-runs a bundle from its stored test case, inputs and configuration.
ReproduceResult reproduce(const std::string& bundle_dir, const std::vector<std::string>& overrides = {});

// Minimizes a bundle in place, writing the stage artifacts next to it.
MinimizationResult minimize_bundle(const std::string& bundle_dir);

}  // namespace mrf
