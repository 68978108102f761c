#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "core/errors.hpp"
#include "core/generator.hpp"
#include "core/model.hpp"
#include "test_util.hpp"

namespace mrf {
namespace {

using T = Observation::Tag;

Contract make(ObservationClause o, ExecutionClause e, std::size_t window = kDefaultModelWindow, bool nesting = false) {
  Contract c;
  c.observation = o;
  c.execution = e;
  c.window = window;
  c.nesting = nesting;
  return c;
}

// Two-load program: x selects the first load, y the branch and the second load.
Input two_loads_input() { return test::regs_input(/*x=*/0x10, /*y=*/0x20); }

TEST(Model, TwoLoadsMemSeq) {
  const auto r = Model(make(ObservationClause::kMem, ExecutionClause::kSeq)).run(test::load_tc("two_loads.tc"), two_loads_input());
  EXPECT_EQ(r.ctrace, (CTrace{{T::kMemAddr, 0x110}}));
}

TEST(Model, TwoLoadsMemCond) {
  const auto r =
      Model(make(ObservationClause::kMem, ExecutionClause::kCond)).run(test::load_tc("two_loads.tc"), two_loads_input());
  EXPECT_EQ(r.ctrace, (CTrace{{T::kMemAddr, 0x110}, {T::kMemAddr, 0x120}}));
}

TEST(Model, TwoLoadsCtExposesBranchTarget) {
  const TestCase tc = test::load_tc("two_loads.tc");
  const LinearProgram prog = linearize(tc);
  const auto r = Model(make(ObservationClause::kCt, ExecutionClause::kSeq)).run(prog, two_loads_input());
  const std::size_t exit_pc = prog.block_start[prog.block_start.size() - 2];
  EXPECT_EQ(r.ctrace, (CTrace{{T::kMemAddr, 0x110}, {T::kPc, exit_pc}}));
}

TEST(Model, StraightLineCondEqualsSeq) {
  GeneratorConfig g;
  g.subset = InstructionSubset::kBase;
  g.min_blocks = g.max_blocks = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    g.seed = seed;
    const TestCase tc = generate_test_case(g);
    const Input in = make_input(static_cast<std::uint32_t>(seed), 8, 1);
    for (auto o : {ObservationClause::kMem, ObservationClause::kCt, ObservationClause::kArch})
      EXPECT_EQ(Model(make(o, ExecutionClause::kCond)).run(tc, in).ctrace,
                Model(make(o, ExecutionClause::kSeq)).run(tc, in).ctrace);
  }
}

// Oracle for the speculative explorer. A path is fixed by one decision per
// speculation point it meets (follow, or mispredict/skip); the contract's
// observations are the union over every path. Paths are enumerated by
// brute force over decision bit vectors.
std::set<Observation> enumerate_paths(const LinearProgram& prog, const Input& in, const Contract& c) {
  constexpr int kMaxPoints = 12;
  std::set<Observation> all;
  for (std::uint32_t mask = 0; mask < (1u << kMaxPoints); ++mask) {
    ArchState s = in.to_state();
    std::size_t pc = 0, point = 0;
    std::optional<std::size_t> budget;
    bool used_all = true;
    while (pc < prog.size()) {
      const Opcode op = prog.code[pc].instr.op;
      if (budget && (*budget == 0 || op == Opcode::kFence)) break;
      const bool may = !budget || c.nesting;
      if (op == Opcode::kStore && c.speculates_on_stores() && may) {
        if (point >= kMaxPoints) used_all = false;
        if (point < kMaxPoints && ((mask >> point++) & 1)) {
          if (!budget) budget = c.window;
          ++pc;
          continue;
        }
      }
      const StepInfo info = step(prog, pc, s);
      if (c.observation == ObservationClause::kCtr || c.observation == ObservationClause::kArch)
        for (int k = 0; k < info.reg_read_count; ++k) all.insert({T::kRegRead, info.reg_reads[k]});
      if (info.is_load || info.is_store)
        if (!(info.is_store && budget && c.observation == ObservationClause::kCtNonspecStore))
          all.insert({T::kMemAddr, info.mem_offset});
      if (info.is_load && c.observation == ObservationClause::kArch) all.insert({T::kLoadValue, info.loaded});
      if (op == Opcode::kBcc && c.observation != ObservationClause::kMem) all.insert({T::kPc, info.next_pc});
      if (budget) --*budget;
      const std::size_t here = pc;
      pc = info.next_pc;
      if (op == Opcode::kBcc && c.speculates_on_branches() && may) {
        if (point >= kMaxPoints) used_all = false;
        if (point < kMaxPoints && ((mask >> point++) & 1)) {
          if (!budget) budget = c.window;
          pc = info.branch_taken ? here + 1 : prog.code[here].target_pc;
        }
      }
    }
    EXPECT_TRUE(used_all) << "too many speculation points for the oracle";
  }
  return all;
}

TEST(Model, NestedExplorerMatchesPathEnumeration) {
  std::mt19937_64 rng(5);
  int programs = 0;
  for (int k = 0; programs < 150 && k < 2000; ++k) {
    GeneratorConfig g;
    g.test_case_size = 3 + rng() % 6;
    g.max_mem_accesses = rng() % 4;
    g.max_mem_accesses = std::min(g.max_mem_accesses, g.test_case_size);
    g.min_blocks = 1;
    g.max_blocks = 3;
    g.subset = InstructionSubset::kBaseMemCb;
    g.seed = rng();
    const TestCase tc = generate_test_case(g);
    std::size_t branches = 0;
    for (const auto& b : tc.blocks)
      for (const auto& in : b.instructions) branches += in.op == Opcode::kBcc;
    if (branches == 0 || branches > 2) continue;
    ++programs;
    const LinearProgram prog = linearize(tc);
    const Input in = make_input(static_cast<std::uint32_t>(rng()), 6, 1);
    for (auto exec : {ExecutionClause::kCond, ExecutionClause::kCondBpas})
      for (std::size_t window : {3u, 20u})
        for (bool nesting : {false, true}) {
          const Contract c = make(ObservationClause::kCt, exec, window, nesting);
          const CTrace t = Model(c).run(prog, in).ctrace;
          const std::set<Observation> got(t.begin(), t.end());
          ASSERT_EQ(got, enumerate_paths(prog, in, c))
              << contract_name(c) << " window " << window << " nesting " << nesting << "\n"
              << disassemble(tc);
        }
  }
  EXPECT_EQ(programs, 150);
}

std::multiset<Observation> restrict(const CTrace& t, std::set<T> tags) {
  std::multiset<Observation> out;
  for (const auto& o : t)
    if (tags.count(o.tag)) out.insert(o);
  return out;
}

bool includes(const std::multiset<Observation>& big, const std::multiset<Observation>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

class GeneratedCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
      GeneratorConfig g;
      g.test_case_size = 4 + rng() % 12;
      g.max_mem_accesses = std::min<std::size_t>(g.test_case_size, 4);
      g.min_blocks = 1;
      g.max_blocks = 3;
      g.seed = rng();
      cases.push_back({generate_test_case(g), make_input(static_cast<std::uint32_t>(rng()), 4, 1)});
    }
  }
  std::vector<std::pair<TestCase, Input>> cases;
};

TEST_F(GeneratedCorpus, ExposureIsMonotone) {
  const std::set<T> mem{T::kMemAddr}, ct{T::kMemAddr, T::kPc}, ctr{T::kMemAddr, T::kPc, T::kRegRead};
  for (const auto& [tc, in] : cases)
    for (auto e : {ExecutionClause::kSeq, ExecutionClause::kCond, ExecutionClause::kBpas, ExecutionClause::kCondBpas}) {
      const CTrace m = Model(make(ObservationClause::kMem, e)).run(tc, in).ctrace;
      const CTrace c = Model(make(ObservationClause::kCt, e)).run(tc, in).ctrace;
      const CTrace r = Model(make(ObservationClause::kCtr, e)).run(tc, in).ctrace;
      const CTrace a = Model(make(ObservationClause::kArch, e)).run(tc, in).ctrace;
      EXPECT_TRUE(includes(restrict(c, mem), restrict(m, mem)));
      EXPECT_TRUE(includes(restrict(r, ct), restrict(c, ct)));
      EXPECT_TRUE(includes(restrict(a, ctr), restrict(r, ctr)));
    }
}

TEST_F(GeneratedCorpus, SpeculationNeverChangesArchitecture) {
  for (const auto& [tc, in] : cases) {
    ArchState expected = in.to_state();
    run_architectural(linearize(tc), expected);
    for (auto e : {ExecutionClause::kSeq, ExecutionClause::kCond, ExecutionClause::kBpas, ExecutionClause::kCondBpas})
      for (bool nesting : {false, true})
        EXPECT_EQ(Model(make(ObservationClause::kCt, e, 20, nesting)).run(tc, in).final_state, expected);
  }
}

TEST_F(GeneratedCorpus, SeqIsSubsequenceOfCond) {
  for (const auto& [tc, in] : cases) {
    const CTrace seq = Model(make(ObservationClause::kCt, ExecutionClause::kSeq)).run(tc, in).ctrace;
    const CTrace cond = Model(make(ObservationClause::kCt, ExecutionClause::kCond)).run(tc, in).ctrace;
    std::size_t k = 0;
    for (const auto& o : cond)
      if (k < seq.size() && o == seq[k]) ++k;
    EXPECT_EQ(k, seq.size()) << disassemble(tc);
  }
}

TEST_F(GeneratedCorpus, ModelIsPure) {
  for (const auto& [tc, in] : cases) {
    const Model m(make(ObservationClause::kArch, ExecutionClause::kCondBpas, 20, true));
    const auto a = m.run(tc, in);
    const auto b = m.run(tc, in);
    EXPECT_EQ(a.ctrace, b.ctrace);
    EXPECT_EQ(a.final_state, b.final_state);
    ASSERT_EQ(a.exec.size(), b.exec.size());
  }
}

TEST_F(GeneratedCorpus, ExecTraceIsArchitecturalPath) {
  for (const auto& [tc, in] : cases) {
    const auto seq = Model(make(ObservationClause::kCt, ExecutionClause::kSeq)).run(tc, in).exec;
    const auto cond = Model(make(ObservationClause::kCt, ExecutionClause::kCondBpas, 20, true)).run(tc, in).exec;
    ASSERT_EQ(seq.size(), cond.size());
    for (std::size_t k = 0; k < seq.size(); ++k) EXPECT_EQ(seq[k].pc, cond[k].pc);
  }
}

TEST(Model, NonspeculativeStoreHidesOnlySpeculativeStores) {
  const TestCase tc = assemble(R"(.bb0:
FENCE # instrumentation
CMP R0, 0
JZ .exit
.bb1:
AND R1, 0xfc0 # instrumentation
ADD R1, SB # instrumentation
STORE [R1], 7
.exit:
FENCE # instrumentation
)");
  const Input taken = test::regs_input(0, 0x80);  // JZ taken: the store is only speculative
  const Input fall = test::regs_input(1, 0x80);
  const auto hidden = Model(make(ObservationClause::kCtNonspecStore, ExecutionClause::kCond)).run(tc, taken).ctrace;
  const auto shown = Model(make(ObservationClause::kCt, ExecutionClause::kCond)).run(tc, taken).ctrace;
  EXPECT_EQ(restrict(hidden, {T::kMemAddr}).size(), 0u);
  EXPECT_EQ(restrict(shown, {T::kMemAddr}).size(), 1u);
  const auto arch = Model(make(ObservationClause::kCtNonspecStore, ExecutionClause::kCond)).run(tc, fall).ctrace;
  EXPECT_EQ(restrict(arch, {T::kMemAddr}).size(), 1u);
}

TEST(Model, NestingCapIsEnforced) {
  const TestCase tc = assemble(R"(.bb0:
FENCE # instrumentation
JZ .bb1
.bb1:
JZ .bb2
.bb2:
JZ .bb3
.bb3:
JZ .exit
.exit:
FENCE # instrumentation
)");
  Contract c = make(ObservationClause::kCt, ExecutionClause::kCond, 20, true);
  c.max_nesting = 2;
  EXPECT_THROW(Model(c).run(tc, test::regs_input(0)), SpeculationDepthError);
  c.max_nesting = 4;
  EXPECT_NO_THROW(Model(c).run(tc, test::regs_input(0)));
  c.nesting = false;
  c.max_nesting = 1;
  EXPECT_NO_THROW(Model(c).run(tc, test::regs_input(0)));
}

TEST(Model, CtraceTextRoundTrip) {
  const CTrace t{{T::kMemAddr, 0x110}, {T::kPc, 7}, {T::kRegRead, 0xdeadbeef}, {T::kLoadValue, 0}};
  EXPECT_EQ(parse_ctrace(format_ctrace(t)), t);
  EXPECT_THROW(parse_ctrace("Bogus 0x1\n"), FormatError);
}

TEST(Model, ContractNames) {
  for (auto o : {ObservationClause::kMem, ObservationClause::kCt, ObservationClause::kCtr, ObservationClause::kArch,
                 ObservationClause::kCtNonspecStore})
    for (auto e : {ExecutionClause::kSeq, ExecutionClause::kCond, ExecutionClause::kBpas, ExecutionClause::kCondBpas}) {
      const Contract c = make(o, e);
      EXPECT_EQ(parse_contract(contract_name(c)), c) << contract_name(c);
    }
  EXPECT_EQ(contract_name(make(ObservationClause::kCt, ExecutionClause::kSeq)), "CT-SEQ");
}

}  // namespace
}  // namespace mrf
