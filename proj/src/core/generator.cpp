#include "core/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/errors.hpp"

namespace mrf {

std::string_view subset_name(InstructionSubset s) {
  switch (s) {
    case InstructionSubset::kBase: return "BASE";
    case InstructionSubset::kBaseMem: return "BASE+MEM";
    case InstructionSubset::kBaseCb: return "BASE+CB";
    case InstructionSubset::kBaseMemCb: return "BASE+MEM+CB";
  }
  return "?";
}

InstructionSubset parse_subset(std::string_view name) {
  for (auto s : {InstructionSubset::kBase, InstructionSubset::kBaseMem,
                 InstructionSubset::kBaseCb, InstructionSubset::kBaseMemCb})
    if (subset_name(s) == name) return s;
  throw ConfigError("unknown instruction subset '" + std::string(name) + "'");
}

bool subset_has_mem(InstructionSubset s) {
  return s == InstructionSubset::kBaseMem || s == InstructionSubset::kBaseMemCb;
}

bool subset_has_cb(InstructionSubset s) {
  return s == InstructionSubset::kBaseCb || s == InstructionSubset::kBaseMemCb;
}

void GeneratorConfig::check() const {
  if (min_blocks < 1) throw ConfigError("min_bb_per_function must be at least 1");
  if (min_blocks > max_blocks) throw ConfigError("min_bb_per_function exceeds max_bb_per_function");
  if (max_blocks > std::max<std::size_t>(test_case_size, 1))
    throw ConfigError("more basic blocks than payload instructions");
  if (max_mem_accesses > test_case_size)
    throw ConfigError("max_mem_accesses exceeds test_case_size");
  if (pages < 1 || pages > kMaxPages) throw ConfigError("pages must be 1 or 2");
}

namespace {

class Builder {
 public:
  explicit Builder(const GeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  TestCase build() {
    TestCase tc;
    tc.seed = cfg_.seed;
    const std::size_t nblocks = uniform(cfg_.min_blocks, cfg_.max_blocks);
    tc.blocks.resize(nblocks + 1);
    for (std::size_t b = 0; b < nblocks; ++b) tc.blocks[b].label = ".bb" + std::to_string(b);
    tc.blocks.back().label = ".exit";

    auto terminators = make_terminators(nblocks);
    auto payload = make_payload(nblocks);

    tc.sandbox_offset = static_cast<std::uint8_t>(uniform(0, kCacheLineSize - 1));
    for (std::size_t b = 0; b < nblocks; ++b) {
      auto& out = tc.blocks[b].instructions;
      if (b == 0) out.push_back(make_instr(Opcode::kFence, {}, {}, true));
      for (const Instruction& in : payload[b]) instrument(in, out);
      for (const Instruction& t : terminators[b]) out.push_back(t);
    }
    tc.blocks.back().instructions.push_back(make_instr(Opcode::kFence, {}, {}, true));
    return tc;
  }

 private:
  // Modulo reduction keeps the stream identical across standard libraries.
  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
  }
  bool coin() { return uniform(0, 1) == 1; }
  Reg gpr() { return static_cast<Reg>(uniform(0, kNumGprs - 1)); }
  std::uint64_t imm32() { return rng_() & 0xFFFF'FFFF; }
  Operand gpr_or_imm() { return coin() ? Operand::reg_op(gpr()) : Operand::imm_op(imm32()); }

  // Block b (0..n-1) jumps forward; block n is the exit.
  std::vector<std::vector<Instruction>> make_terminators(std::size_t n) {
    std::vector<std::vector<Instruction>> out(n);
    for (std::size_t b = 0; b < n; ++b) {
      if (subset_has_cb(cfg_.subset) && coin()) {
        // Conditional branch plus fall-through into the next block.
        std::size_t bcc_target = b + 2 <= n ? uniform(b + 2, n) : n;
        auto cond = kAllConditions[uniform(0, kAllConditions.size() - 1)];
        out[b].push_back(make_cond(Opcode::kBcc, cond, Operand::label_op(static_cast<int>(bcc_target))));
      } else {
        std::size_t target = uniform(b + 1, n);
        out[b].push_back(make_instr(Opcode::kJmp, Operand::label_op(static_cast<int>(target))));
      }
    }
    return out;
  }

  std::vector<std::vector<Instruction>> make_payload(std::size_t n) {
    static constexpr Opcode kBaseOps[] = {Opcode::kMov, Opcode::kAdd, Opcode::kSub,
                                          Opcode::kAnd, Opcode::kOr,  Opcode::kXor,
                                          Opcode::kNot, Opcode::kCmp, Opcode::kCmov,
                                          Opcode::kDiv};
    std::vector<Opcode> pool(std::begin(kBaseOps), std::end(kBaseOps));
    const std::size_t alu_count = pool.size();
    if (subset_has_mem(cfg_.subset)) {
      pool.push_back(Opcode::kLoad);
      pool.push_back(Opcode::kStore);
    }

    // Pick a block for each payload slot, then keep slot order within blocks.
    std::vector<std::size_t> placement(cfg_.test_case_size);
    for (auto& p : placement) p = uniform(0, n - 1);
    std::sort(placement.begin(), placement.end());

    std::vector<std::vector<Instruction>> out(n);
    std::size_t mem_used = 0;
    for (std::size_t slot = 0; slot < cfg_.test_case_size; ++slot) {
      bool mem_left = mem_used < cfg_.max_mem_accesses;
      Opcode op = pool[uniform(0, (mem_left ? pool.size() : alu_count) - 1)];
      if (op == Opcode::kLoad || op == Opcode::kStore) ++mem_used;
      out[placement[slot]].push_back(random_instruction(op));
    }
    return out;
  }

  Instruction random_instruction(Opcode op) {
    switch (op) {
      case Opcode::kNot:
        return make_instr(op, Operand::reg_op(gpr()));
      case Opcode::kCmov:
        return make_cond(op, kAllConditions[uniform(0, kAllConditions.size() - 1)],
                         Operand::reg_op(gpr()), Operand::reg_op(gpr()));
      case Opcode::kDiv:
        return make_instr(op, Operand::reg_op(gpr()), Operand::reg_op(gpr()));
      case Opcode::kLoad:
        return make_instr(op, Operand::reg_op(gpr()), Operand::mem_op(gpr()));
      case Opcode::kStore:
        return make_instr(op, Operand::mem_op(gpr()), gpr_or_imm());
      default:
        return make_instr(op, Operand::reg_op(gpr()), gpr_or_imm());
    }
  }

  void instrument(const Instruction& in, std::vector<Instruction>& out) {
    const std::uint64_t mask = cfg_.pages == 2 ? kMaskTwoPages : kMaskOnePage;
    for (const Operand& o : in.operands) {
      if (o.kind != Operand::Kind::kMem) continue;
      out.push_back(make_instr(Opcode::kAnd, Operand::reg_op(o.reg), Operand::imm_op(mask), true));
      out.push_back(make_instr(Opcode::kAdd, Operand::reg_op(o.reg), Operand::reg_op(Reg::kSB), true));
    }
    if (in.op == Opcode::kDiv)
      out.push_back(make_instr(Opcode::kOr, in.operands[1], Operand::imm_op(1), true));
    out.push_back(in);
  }

  const GeneratorConfig& cfg_;
  std::mt19937_64 rng_;
};

std::size_t scale_up(std::size_t v, double factor) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(v) * factor));
}

}  // namespace

TestCase generate_test_case(const GeneratorConfig& cfg) {
  cfg.check();
  return Builder(cfg).build();
}

FuzzingScale grow_params(const FuzzingScale& cur, bool combinations_covered) {
  if (!combinations_covered) return cur;
  FuzzingScale next = cur;
  next.generator.test_case_size = scale_up(cur.generator.test_case_size, kSizeGrowth);
  next.generator.min_blocks = cur.generator.min_blocks + 1;
  next.generator.max_blocks = cur.generator.max_blocks + 1;
  next.inputs = scale_up(cur.inputs, kInputGrowth);
  return next;
}

}  // namespace mrf
