#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "core/coverage.hpp"
#include "core/errors.hpp"
#include "core/generator.hpp"
#include "test_util.hpp"

namespace mrf {
namespace {

std::uint32_t count_of(const PatternCounts& c, Pattern p) { return c[static_cast<std::size_t>(p)]; }

// AND feeds CMP, CMP feeds the branch, and the load and store hit one line.
constexpr const char* kDependencyChain =
    ".bb0:\n"
    "FENCE # instrumentation\n"
    "AND R1, R2\n"
    "CMP R1, 0\n"
    "JNZ .exit\n"
    ".bb1:\n"
    "AND R0, 0xfc0 # instrumentation\n"
    "ADD R0, SB # instrumentation\n"
    "LOAD R3, [R0]\n"
    "AND R0, 0xfc0 # instrumentation\n"
    "ADD R0, SB # instrumentation\n"
    "STORE [R0], 0x5\n"
    ".exit:\n"
    "FENCE # instrumentation\n";

ExecTrace chain_trace() {
  const TestCase tc = assemble(kDependencyChain);
  return Model(Contract{}).run(tc, test::regs_input(0x40)).exec;
}

TEST(ExtractPatterns, DependencyChain) {
  const PatternCounts c = extract_patterns(chain_trace());
  PatternCounts expected{};
  expected[static_cast<std::size_t>(Pattern::kGprDependency)] = 1;
  expected[static_cast<std::size_t>(Pattern::kFlagsDependency)] = 1;
  expected[static_cast<std::size_t>(Pattern::kConditional)] = 1;
  expected[static_cast<std::size_t>(Pattern::kStoreAfterLoad)] = 1;
  EXPECT_EQ(c, expected);
}

TEST(ExtractPatterns, DifferentAddressesAreNotAMemoryPattern) {
  const TestCase tc = assemble(
      ".bb0:\nFENCE # instrumentation\nMOV R1, 0x80\n"
      "AND R0, 0xfc0 # instrumentation\nADD R0, SB # instrumentation\nLOAD R3, [R0]\n"
      "AND R1, 0xfc0 # instrumentation\nADD R1, SB # instrumentation\nSTORE [R1], 0x5\n"
      ".exit:\nFENCE # instrumentation\n");
  const PatternCounts c = extract_patterns(Model(Contract{}).run(tc, test::regs_input(0x40)).exec);
  EXPECT_EQ(count_of(c, Pattern::kStoreAfterLoad), 0u);
}

TEST(ExtractPatterns, IndependentMovesHaveNoPatterns) {
  const TestCase tc =
      assemble(".bb0:\nFENCE # instrumentation\nMOV R0, 1\nMOV R1, 2\nMOV R2, 3\n.exit:\nFENCE # instrumentation\n");
  const PatternCounts c = extract_patterns(Model(Contract{}).run(tc, test::regs_input(0)).exec);
  EXPECT_EQ(c, PatternCounts{});
}

PatternCounts mirrored(PatternCounts c) {
  std::swap(c[static_cast<std::size_t>(Pattern::kStoreAfterLoad)],
            c[static_cast<std::size_t>(Pattern::kLoadAfterStore)]);
  return c;
}

TEST(ExtractPatterns, ReversedStreamMirrorsMemoryPatterns) {
  std::mt19937_64 rng(11);
  int with_mem = 0;
  for (int k = 0; k < 300; ++k) {
    GeneratorConfig g;
    g.test_case_size = 12;
    g.max_mem_accesses = 8;
    g.max_blocks = 2;
    g.subset = InstructionSubset::kBaseMem;
    g.seed = rng();
    const ExecTrace et = Model(Contract{}).run(generate_test_case(g), generate_inputs(1, 1, rng())[0]).exec;
    ExecTrace rev(et.rbegin(), et.rend());
    const PatternCounts fwd = extract_patterns(et), bwd = extract_patterns(rev);
    for (Pattern p : {Pattern::kStoreAfterStore, Pattern::kLoadAfterLoad, Pattern::kConditional,
                      Pattern::kUnconditional})
      EXPECT_EQ(count_of(fwd, p), count_of(bwd, p));
    const PatternCounts m = mirrored(fwd);
    for (Pattern p : {Pattern::kStoreAfterLoad, Pattern::kLoadAfterStore}) EXPECT_EQ(count_of(m, p), count_of(bwd, p));
    with_mem += count_of(fwd, Pattern::kStoreAfterLoad) + count_of(fwd, Pattern::kLoadAfterStore) > 0;
  }
  EXPECT_GT(with_mem, 10);
}

TEST(CombinationCount, MultisetsOverEightKinds) {
  EXPECT_EQ(combination_count(1), 8u);
  EXPECT_EQ(combination_count(2), 36u);
  EXPECT_EQ(combination_count(3), 120u);
}

InputClass pair_class(std::size_t a, std::size_t b) {
  InputClass c;
  c.members = {a, b};
  c.htraces = {0, 0};
  return c;
}

PatternCounts all_kinds(std::uint32_t n) {
  PatternCounts c;
  c.fill(n);
  return c;
}

TEST(CoverageState, OnlyCollidingInputsCount) {
  CoverageState cs;
  InputClass single;
  single.members = {0};
  single.htraces = {0};
  EXPECT_FALSE(cs.update({all_kinds(1)}, {single}));
  EXPECT_TRUE(cs.covered().empty());
}

TEST(CoverageState, PatternMustMatchUnderBothInputs) {
  CoverageState cs;
  PatternCounts a{}, b{};
  a[static_cast<std::size_t>(Pattern::kConditional)] = 2;
  b[static_cast<std::size_t>(Pattern::kConditional)] = 1;
  b[static_cast<std::size_t>(Pattern::kGprDependency)] = 1;
  cs.update({a, b}, {pair_class(0, 1)});
  EXPECT_EQ(cs.covered(), (std::set<Combination>{{Pattern::kConditional}}));
}

TEST(CoverageState, SizeOneCompleteFixture) {
  CoverageState cs;
  EXPECT_EQ(cs.target(), 1u);
  EXPECT_TRUE(cs.update({all_kinds(1), all_kinds(1)}, {pair_class(0, 1)}));
  EXPECT_TRUE(cs.size_complete(1));
  // Each kind occurs once, so no combination may repeat a kind.
  EXPECT_EQ(cs.covered_of_size(2), 28u);
  EXPECT_EQ(cs.covered_of_size(3), 56u);
  cs.advance_target();
  EXPECT_FALSE(cs.update({all_kinds(1), all_kinds(1)}, {pair_class(0, 1)}));
  EXPECT_TRUE(cs.update({all_kinds(2), all_kinds(2)}, {pair_class(0, 1)}));
  cs.advance_target();
  cs.advance_target();
  EXPECT_EQ(cs.target(), kMaxCombinationSize);
  EXPECT_TRUE(cs.update({all_kinds(3), all_kinds(3)}, {pair_class(0, 1)}));
}

TEST(CoverageState, CoverageOnlyGrows) {
  std::mt19937_64 rng(12);
  CoverageState cs;
  std::set<Combination> before;
  for (int round = 0; round < 100; ++round) {
    std::vector<PatternCounts> per(6);
    for (auto& p : per)
      for (auto& v : p) v = rng() % 3 == 0 ? rng() % 3 : 0;
    cs.update(per, {pair_class(0, 1), pair_class(2, 5)});
    EXPECT_TRUE(std::includes(cs.covered().begin(), cs.covered().end(), before.begin(), before.end()));
    before = cs.covered();
    for (const auto& c : before) EXPECT_LE(c.size(), kMaxCombinationSize);
  }
}

TEST(CollisionProbability, EdgeCases) {
  EXPECT_DOUBLE_EQ(collision_probability(0, 16), 0.0);
  EXPECT_DOUBLE_EQ(collision_probability(5, 1), 1.0);
  EXPECT_NEAR(collision_probability(1, 2), 0.5, 1e-12);
  EXPECT_THROW(collision_probability(10, 0), ConfigError);
}

TEST(CollisionProbability, MonotoneInN) {
  for (std::uint64_t d : {4u, 16u, 256u})
    for (std::uint64_t n = 1; n < 300; ++n) EXPECT_LE(collision_probability(n - 1, d), collision_probability(n, d));
}

// Frequency with which a fixed trace is hit by at least one of n uniform draws.
double monte_carlo(std::uint64_t n, std::uint64_t d, int trials, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> draw(0, d - 1);
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    bool hit = false;
    for (std::uint64_t k = 0; k < n && !hit; ++k) hit = draw(rng) == 0;
    hits += hit;
  }
  return static_cast<double>(hits) / trials;
}

TEST(CollisionProbability, MatchesMonteCarlo) {
  std::mt19937_64 rng(13);
  EXPECT_NEAR(collision_probability(50, 16), monte_carlo(50, 16, 100000, rng), 0.02);
  EXPECT_NEAR(collision_probability(10, 256), monte_carlo(10, 256, 100000, rng), 0.02);
}

}  // namespace
}  // namespace mrf
