#include "core/coverage.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace mrf {

std::string_view pattern_name(Pattern p) {
  switch (p) {
    case Pattern::kStoreAfterStore: return "store-after-store";
    case Pattern::kStoreAfterLoad: return "store-after-load";
    case Pattern::kLoadAfterStore: return "load-after-store";
    case Pattern::kLoadAfterLoad: return "load-after-load";
    case Pattern::kGprDependency: return "gpr-dependency";
    case Pattern::kFlagsDependency: return "flags-dependency";
    case Pattern::kConditional: return "conditional";
    case Pattern::kUnconditional: return "unconditional";
  }
  return "?";
}

PatternCounts extract_patterns(const ExecTrace& et) {
  PatternCounts counts{};
  auto add = [&](Pattern p) { ++counts[static_cast<std::size_t>(p)]; };

  std::vector<const ExecRecord*> stream;
  for (const ExecRecord& r : et)
    if (!r.instrumentation) stream.push_back(&r);

  for (std::size_t k = 0; k < stream.size(); ++k) {
    const ExecRecord& a = *stream[k];
    if (a.op == Opcode::kBcc) add(Pattern::kConditional);
    if (a.op == Opcode::kJmp) add(Pattern::kUnconditional);
    if (k + 1 == stream.size()) break;
    const ExecRecord& b = *stream[k + 1];

    if ((a.is_load || a.is_store) && (b.is_load || b.is_store) && a.addr == b.addr) {
      if (a.is_store && b.is_store) add(Pattern::kStoreAfterStore);
      if (a.is_load && b.is_store) add(Pattern::kStoreAfterLoad);
      if (a.is_store && b.is_load) add(Pattern::kLoadAfterStore);
      if (a.is_load && b.is_load) add(Pattern::kLoadAfterLoad);
    }
    if (a.dst_regs & b.src_regs) add(Pattern::kGprDependency);
    if (a.flags_written && b.flags_read) add(Pattern::kFlagsDependency);
  }
  return counts;
}

std::size_t combination_count(std::size_t size) {
  // Multisets of `size` over n kinds: C(n + size - 1, size).
  std::size_t num = 1, den = 1;
  for (std::size_t k = 1; k <= size; ++k) {
    num *= kPatternCount + size - k;
    den *= k;
  }
  return num / den;
}

namespace {

// Enumerates every sub-multiset of `counts` of size 1..max_size.
void sub_multisets(const PatternCounts& counts, std::size_t max_size, std::size_t kind,
                   Combination& cur, std::vector<Combination>& out) {
  if (!cur.empty()) out.push_back(cur);
  if (cur.size() == max_size) return;
  for (std::size_t k = kind; k < kPatternCount; ++k) {
    const auto used = static_cast<std::uint32_t>(std::count(cur.begin(), cur.end(), static_cast<Pattern>(k)));
    if (used >= counts[k]) continue;
    cur.push_back(static_cast<Pattern>(k));
    sub_multisets(counts, max_size, k, cur, out);
    cur.pop_back();
  }
}

}  // namespace

bool CoverageState::update(const std::vector<PatternCounts>& per_input,
                           const std::vector<InputClass>& classes) {
  // Many pairs share the same intersection; enumerate each one once.
  std::map<PatternCounts, std::uint64_t> intersections;
  for (const InputClass& cl : classes) {
    if (!cl.effective()) continue;
    for (std::size_t a = 0; a < cl.members.size(); ++a)
      for (std::size_t b = a + 1; b < cl.members.size(); ++b) {
        const PatternCounts& x = per_input[cl.members[a]];
        const PatternCounts& y = per_input[cl.members[b]];
        PatternCounts both{};
        for (std::size_t k = 0; k < kPatternCount; ++k) both[k] = std::min(x[k], y[k]);
        ++intersections[both];
      }
  }
  for (const auto& [both, pairs] : intersections) {
    for (std::size_t k = 0; k < kPatternCount; ++k) kind_counts_[k] += both[k] * pairs;
    std::vector<Combination> subs;
    Combination cur;
    sub_multisets(both, kMaxCombinationSize, 0, cur, subs);
    for (Combination& c : subs) {
      counters_[c] += pairs;
      covered_.insert(std::move(c));
    }
  }
  return size_complete(target_);
}

std::size_t CoverageState::covered_of_size(std::size_t size) const {
  return static_cast<std::size_t>(
      std::count_if(covered_.begin(), covered_.end(), [&](const Combination& c) { return c.size() == size; }));
}

void CoverageState::advance_target() {
  if (target_ < kMaxCombinationSize) ++target_;
}

double collision_probability(std::uint64_t n, std::uint64_t d) {
  if (d == 0) throw ConfigError("trace space size must be at least 1");
  return 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(d), static_cast<double>(n));
}

}  // namespace mrf
