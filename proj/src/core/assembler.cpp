#include "core/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <vector>

#include "core/errors.hpp"

namespace mrf {

namespace {

constexpr std::string_view kInstrumentationMark = "instrumentation";

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_label_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_label_char);
}

std::optional<std::uint64_t> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<Reg> parse_reg(std::string_view s) {
  std::string u = upper(s);
  if (u == "R0") return Reg::kR0;
  if (u == "R1") return Reg::kR1;
  if (u == "R2") return Reg::kR2;
  if (u == "R3") return Reg::kR3;
  if (u == "SB") return Reg::kSB;
  return std::nullopt;
}

struct Mnemonic {
  Opcode op;
  Condition cond = Condition::kZ;
};

std::optional<Mnemonic> parse_mnemonic(std::string_view s) {
  static const std::map<std::string, Mnemonic> table = [] {
    std::map<std::string, Mnemonic> t;
    for (Opcode op : kAllOpcodes) {
      if (op == Opcode::kCmov || op == Opcode::kBcc) {
        for (Condition c : kAllConditions)
          t[std::string(opcode_mnemonic(op)) + std::string(condition_suffix(c))] = {op, c};
      } else {
        t[std::string(opcode_mnemonic(op))] = {op};
      }
    }
    return t;
  }();
  auto it = table.find(upper(s));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Operand as written; labels are resolved after all blocks are known.
struct RawOperand {
  Operand op;
  std::string label;
  std::size_t column = 0;
};

struct RawInstr {
  Instruction instr;
  std::array<RawOperand, 2> operands;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct RawBlock {
  std::string label;
  std::size_t line = 0;
  std::vector<RawInstr> instrs;
};

RawOperand parse_operand(const Token& t, std::size_t line) {
  RawOperand r;
  r.column = t.column;
  std::string_view s = t.text;
  if (s.empty()) throw AssemblyError(line, t.column, "empty operand");
  if (s.front() == '[') {
    if (s.back() != ']') throw AssemblyError(line, t.column, "unterminated memory operand");
    auto reg = parse_reg(trim(s.substr(1, s.size() - 2)));
    if (!reg) throw AssemblyError(line, t.column + 1, "expected register in memory operand");
    r.op = Operand::mem_op(*reg);
    return r;
  }
  if (auto reg = parse_reg(s)) {
    r.op = Operand::reg_op(*reg);
    return r;
  }
  if (std::isdigit(static_cast<unsigned char>(s.front()))) {
    auto v = parse_number(s);
    if (!v) throw AssemblyError(line, t.column, "malformed immediate '" + std::string(s) + "'");
    r.op = Operand::imm_op(*v);
    return r;
  }
  if (is_label_name(s)) {
    r.op.kind = Operand::Kind::kLabel;
    r.label = std::string(s);
    return r;
  }
  throw AssemblyError(line, t.column, "unrecognized operand '" + std::string(s) + "'");
}

// Splits "OP a, b" into tokens with their columns.
std::vector<Token> split_operands(std::string_view rest, std::size_t base_col,
                                  std::size_t line) {
  std::vector<Token> out;
  if (trim(rest).empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = rest.find(',', start);
    std::string_view piece = rest.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
    std::size_t lead = 0;
    while (lead < piece.size() && std::isspace(static_cast<unsigned char>(piece[lead]))) ++lead;
    std::string_view tok = trim(piece);
    if (tok.empty()) throw AssemblyError(line, base_col + start + lead, "empty operand");
    out.push_back({tok, base_col + start + lead});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

TestCase assemble(std::string_view text) {
  std::vector<RawBlock> blocks;
  TestCase tc;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    bool instrumentation = false;
    std::string_view body = raw;
    if (std::size_t hash = raw.find('#'); hash != std::string_view::npos) {
      instrumentation = trim(raw.substr(hash + 1)) == kInstrumentationMark;
      body = raw.substr(0, hash);
    }
    std::size_t lead = 0;
    while (lead < body.size() && std::isspace(static_cast<unsigned char>(body[lead]))) ++lead;
    std::string_view stmt = trim(body);
    if (stmt.empty()) continue;
    const std::size_t col = lead + 1;

    if (stmt.back() == ':') {
      std::string_view name = trim(stmt.substr(0, stmt.size() - 1));
      if (!is_label_name(name)) throw AssemblyError(line_no, col, "malformed label");
      for (const auto& b : blocks)
        if (b.label == name)
          throw AssemblyError(line_no, col, "duplicate label '" + std::string(name) + "'");
      blocks.push_back({std::string(name), line_no, {}});
      continue;
    }

    std::size_t sp = stmt.find_first_of(" \t");
    std::string_view head = stmt.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : stmt.substr(sp);

    if (head == ".sandbox_offset" || head == ".seed") {
      auto v = parse_number(trim(rest));
      if (!v) throw AssemblyError(line_no, col + head.size() + 1, "malformed directive value");
      if (head == ".seed") {
        tc.seed = *v;
      } else {
        if (*v >= kCacheLineSize)
          throw AssemblyError(line_no, col + head.size() + 1, "sandbox offset must be below 64");
        tc.sandbox_offset = static_cast<std::uint8_t>(*v);
      }
      continue;
    }

    auto mn = parse_mnemonic(head);
    if (!mn) throw AssemblyError(line_no, col, "unknown opcode '" + std::string(head) + "'");
    auto toks = split_operands(rest, col + head.size(), line_no);
    if (toks.size() > 2) throw AssemblyError(line_no, toks[2].column, "too many operands");

    RawInstr ri;
    ri.line = line_no;
    ri.column = col;
    ri.instr.op = mn->op;
    ri.instr.cond = mn->cond;
    ri.instr.instrumentation = instrumentation;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      ri.operands[k] = parse_operand(toks[k], line_no);
      ri.instr.operands[k] = ri.operands[k].op;
    }
    if (blocks.empty()) blocks.push_back({".bb0", line_no, {}});
    blocks.back().instrs.push_back(std::move(ri));
  }

  if (blocks.empty()) throw AssemblyError(line_no, 1, "empty program");

  // Implicit exit block holding the closing FENCE.
  RawBlock& last = blocks.back();
  if (!(last.instrs.size() == 1 && last.instrs.front().instr.op == Opcode::kFence) &&
      !last.instrs.empty() && last.instrs.back().instr.op == Opcode::kFence) {
    RawInstr fence = last.instrs.back();
    last.instrs.pop_back();
    std::string name = ".exit";
    for (const auto& b : blocks)
      if (b.label == name) throw AssemblyError(fence.line, 1, "cannot split implicit exit block");
    blocks.push_back({name, fence.line, {std::move(fence)}});
  }
  // Framing FENCEs are instrumentation by construction.
  if (!blocks.front().instrs.empty() && blocks.front().instrs.front().instr.op == Opcode::kFence)
    blocks.front().instrs.front().instr.instrumentation = true;
  if (!blocks.back().instrs.empty() && blocks.back().instrs.back().instr.op == Opcode::kFence)
    blocks.back().instrs.back().instr.instrumentation = true;

  std::map<std::string, int, std::less<>> index;
  for (std::size_t b = 0; b < blocks.size(); ++b) index[blocks[b].label] = static_cast<int>(b);

  tc.blocks.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BasicBlock bb{blocks[b].label, {}};
    for (auto& ri : blocks[b].instrs) {
      for (std::size_t k = 0; k < 2; ++k) {
        RawOperand& ro = ri.operands[k];
        if (ro.op.kind != Operand::Kind::kLabel) continue;
        auto it = index.find(ro.label);
        if (it == index.end())
          throw AssemblyError(ri.line, ro.column, "unresolved label '" + ro.label + "'");
        if (it->second <= static_cast<int>(b))
          throw AssemblyError(ri.line, ro.column,
                              "back edge to '" + ro.label + "': control flow must form a DAG");
        ri.instr.operands[k] = Operand::label_op(it->second);
      }
      bb.instructions.push_back(ri.instr);
    }
    tc.blocks.push_back(std::move(bb));
  }

  try {
    validate(tc);
  } catch (const ValidationError& e) {
    std::size_t line = line_no, column = 1;
    if (e.block() != ValidationError::kNoLocation && e.block() < blocks.size()) {
      const auto& rb = blocks[e.block()];
      if (e.index() < rb.instrs.size()) {
        line = rb.instrs[e.index()].line;
        column = rb.instrs[e.index()].column;
      } else {
        line = rb.line;
      }
    }
    throw AssemblyError(line, column, e.what());
  }
  return tc;
}

std::string format_instruction(const Instruction& in, const TestCase& tc) {
  std::string s(opcode_mnemonic(in.op));
  if (in.op == Opcode::kCmov || in.op == Opcode::kBcc) s += condition_suffix(in.cond);
  bool first = true;
  for (const Operand& o : in.operands) {
    if (o.kind == Operand::Kind::kNone) continue;
    s += first ? " " : ", ";
    first = false;
    switch (o.kind) {
      case Operand::Kind::kReg:
        s += reg_name(o.reg);
        break;
      case Operand::Kind::kImm: {
        char buf[24];
        std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(o.imm));
        s += buf;
        break;
      }
      case Operand::Kind::kMem:
        s += "[";
        s += reg_name(o.reg);
        s += "]";
        break;
      case Operand::Kind::kLabel:
        s += tc.blocks.at(o.target).label;
        break;
      case Operand::Kind::kNone:
        break;
    }
  }
  if (in.instrumentation) s += " # instrumentation";
  return s;
}

std::string disassemble(const TestCase& tc) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, ".sandbox_offset 0x%x\n", tc.sandbox_offset);
  out += buf;
  std::snprintf(buf, sizeof buf, ".seed 0x%llx\n", static_cast<unsigned long long>(tc.seed));
  out += buf;
  for (const auto& bb : tc.blocks) {
    out += bb.label;
    out += ":\n";
    for (const auto& in : bb.instructions) {
      out += format_instruction(in, tc);
      out += '\n';
    }
  }
  return out;
}

}  // namespace mrf
