// Dependency-pattern coverage over executed instruction streams, and the
// collision estimate used to plan input counts.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "core/analyser.hpp"
#include "core/model.hpp"

namespace mrf {

enum class Pattern : std::uint8_t {
  kStoreAfterStore,
  kStoreAfterLoad,
  kLoadAfterStore,
  kLoadAfterLoad,
  kGprDependency,
  kFlagsDependency,
  kConditional,
  kUnconditional,
};
inline constexpr std::size_t kPatternCount = 8;
inline constexpr std::size_t kMaxCombinationSize = 3;

std::string_view pattern_name(Pattern p);

// Multiset of patterns as per-kind occurrence counts.
using PatternCounts = std::array<std::uint32_t, kPatternCount>;

// Scans consecutive payload instructions of the stream (instrumentation is
// skipped).
PatternCounts extract_patterns(const ExecTrace& et);

// A combination is a sorted multiset of pattern kinds.
using Combination = std::vector<Pattern>;

// Number of multisets of the given size over the eight kinds.
std::size_t combination_count(std::size_t size);

class CoverageState {
 public:
  // Records the patterns matched by every colliding pair of every effective
  // class. Returns true when all combinations of the current target size
  // are covered.
  bool update(const std::vector<PatternCounts>& per_input, const std::vector<InputClass>& classes);

  const std::set<Combination>& covered() const { return covered_; }
  std::size_t covered_of_size(std::size_t size) const;
  bool size_complete(std::size_t size) const { return covered_of_size(size) == combination_count(size); }
  std::size_t target() const { return target_; }
  // Moves the target to the next combination size (capped at 3).
  void advance_target();
  const std::map<Combination, std::uint64_t>& counters() const { return counters_; }
  const std::array<std::uint64_t, kPatternCount>& kind_counts() const { return kind_counts_; }

 private:
  std::set<Combination> covered_;
  std::map<Combination, std::uint64_t> counters_;
  std::array<std::uint64_t, kPatternCount> kind_counts_{};
  std::size_t target_ = 1;
};

// p(n; d) = 1 - (1 - 1/d)^n. Throws ConfigError when d is zero.
double collision_probability(std::uint64_t n, std::uint64_t d);

}  // namespace mrf
