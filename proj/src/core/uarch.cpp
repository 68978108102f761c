#include "core/uarch.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <map>
#include <optional>

#include "core/errors.hpp"

namespace mrf {

std::string_view assist_name(AssistMode m) {
  switch (m) {
    case AssistMode::kOff: return "off";
    case AssistMode::kMds: return "mds";
    case AssistMode::kLviNull: return "lvi-null";
  }
  return "?";
}

std::string_view attack_name(AttackMode m) {
  return m == AttackMode::kPrimeProbe ? "P+P" : "F+R";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

AssistMode parse_assist(std::string_view s) {
  const std::string k = lower(s);
  if (k == "off" || k == "none" || k == "false") return AssistMode::kOff;
  if (k == "mds") return AssistMode::kMds;
  if (k == "lvi-null" || k == "lvi_null" || k == "lvi") return AssistMode::kLviNull;
  throw ConfigError("unknown assist mode '" + std::string(s) + "'");
}

AttackMode parse_attack(std::string_view s) {
  const std::string k = lower(s);
  if (k == "p+p" || k == "prime+probe") return AttackMode::kPrimeProbe;
  if (k == "f+r" || k == "flush+reload") return AttackMode::kFlushReload;
  throw ConfigError("unknown attack variant '" + std::string(s) + "'");
}

void MachineConfig::check() const {
  if (hw_window == 0) throw ConfigError("hardware speculation window must be positive");
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("noise probability must be in [0, 1]");
  if (reps == 0) throw ConfigError("reps must be at least 1");
  if (priming_batch == 0) throw ConfigError("priming batch size must be at least 1");
}

std::string format_htrace(HTrace t) {
  std::string s(kCacheSets, '0');
  for (std::size_t i = 0; i < kCacheSets; ++i)
    if ((t >> i) & 1) s[i] = '1';
  return s;
}

HTrace parse_htrace(std::string_view s) {
  if (s.size() != kCacheSets) throw FormatError("htrace must have 64 characters");
  HTrace t = 0;
  for (std::size_t i = 0; i < kCacheSets; ++i) {
    if (s[i] == '1')
      t |= HTrace{1} << i;
    else if (s[i] != '0')
      throw FormatError("htrace characters must be 0 or 1");
  }
  return t;
}

void MicroArchState::reset() {
  predictor.fill(kCounterInit);
  leak_buffer = 0;
  accessed.fill(false);
}

void MicroArchState::train(std::size_t pc, bool taken) {
  std::uint8_t& c = predictor[pc % kPredictorEntries];
  if (taken && c < 3) ++c;
  if (!taken && c > 0) --c;
}

std::size_t div_latency(std::uint64_t dividend) {
  return 4 + static_cast<std::size_t>(std::bit_width(dividend)) / 8;
}

namespace {

constexpr std::size_t kLinesInSandbox = kSandboxSize / kCacheLineSize;
constexpr int kNoLine = -1;

bool overlaps(std::uint64_t a, std::uint64_t b) {
  return (a - b) % kSandboxSize < kAccessSize || (b - a) % kSandboxSize < kAccessSize;
}

class Core {
 public:
  Core(const MachineConfig& mc, const LinearProgram& prog, MicroArchState& ctx, std::size_t pages)
      : mc_(mc), prog_(prog), ctx_(ctx), assist_page_(pages - 1) {
    lines_.fill(kNoLine);
  }

  void run(ArchState& s) {
    ctx_.accessed[assist_page_] = false;
    std::size_t pc = 0;
    for (std::size_t idx = 0; pc < prog_.size(); ++idx) pc = execute(s, pc, idx);
  }

  HTrace observed() const {
    if (mc_.attack == AttackMode::kPrimeProbe) return touched_;
    HTrace t = 0;
    for (std::size_t set = 0; set < kCacheSets; ++set)
      if (lines_[set] != kNoLine && static_cast<std::size_t>(lines_[set]) < kLinesInSandbox / kMaxPages)
        t |= HTrace{1} << set;
    return t;
  }

 private:
  struct PendingStore {
    std::size_t idx;
    std::uint64_t offset;
    std::uint64_t old_value;
  };

  void touch(std::uint64_t offset) {
    const std::size_t set = cache_set(offset);
    touched_ |= HTrace{1} << set;
    lines_[set] = static_cast<int>((offset / kCacheLineSize) % kLinesInSandbox);
  }

  std::optional<std::uint64_t> access_offset(const ArchState& s, std::size_t pc) const {
    const Instruction& in = prog_.code[pc].instr;
    for (const Operand& o : in.operands)
      if (o.kind == Operand::Kind::kMem)
        return effective_offset(s.regs[static_cast<int>(o.reg)], prog_.sandbox_offset);
    return std::nullopt;
  }

  std::size_t execute(ArchState& s, std::size_t pc, std::size_t idx) {
    const LinearInstr& li = prog_.code[pc];
    const Opcode op = li.instr.op;

    if (auto off = access_offset(s, pc)) {
      const std::size_t page = *off / kPageSize;
      if (mc_.assist != AssistMode::kOff && page == assist_page_ && !ctx_.accessed[page]) {
        const std::uint64_t injected = mc_.assist == AssistMode::kMds ? ctx_.leak_buffer : 0;
        ArchState copy = s;
        episode(copy, pc, mc_.hw_window, injected);
        ctx_.accessed[page] = true;
      }
      if (op == Opcode::kLoad && mc_.store_bypass) bypass(s, pc, idx, *off);
    }

    std::uint64_t old_value = 0;
    if (op == Opcode::kStore) old_value = s.read64(*access_offset(s, pc));

    StepInfo info = step(prog_, pc, s);
    if (info.is_load || info.is_store) touch(info.mem_offset);
    if (info.is_load) ctx_.leak_buffer = info.loaded;
    if (info.is_store) pending_.push_back({idx, info.mem_offset, old_value});
    if (op == Opcode::kFence) pending_.clear();
    const std::size_t extension = track_latency(op, info, idx);

    if (op == Opcode::kBcc && mc_.branch_prediction) {
      const bool predicted = ctx_.predicts_taken(pc);
      if (predicted != info.branch_taken) {
        ArchState copy = s;
        episode(copy, predicted ? li.target_pc : pc + 1, mc_.hw_window + extension, std::nullopt);
      }
      ctx_.train(pc, info.branch_taken);
    }
    return info.next_pc;
  }

  // Store bypass: a load that aliases a recent store first runs as if that
  // store had not executed. The episode is charged from the store onward, so
  // it never reaches further than skipping the store itself would.
  void bypass(const ArchState& s, std::size_t pc, std::size_t idx, std::uint64_t offset) {
    std::erase_if(pending_, [&](const PendingStore& p) { return idx - p.idx > mc_.hw_window; });
    auto hit = std::find_if(pending_.rbegin(), pending_.rend(),
                            [&](const PendingStore& p) { return overlaps(p.offset, offset); });
    if (hit == pending_.rend()) return;
    ArchState copy = s;
    copy.write64(hit->offset, hit->old_value);
    episode(copy, pc, mc_.hw_window - (idx - hit->idx) + 1, std::nullopt);
  }

  // Transient execution on a private copy; only cache effects survive.
  void episode(ArchState& s, std::size_t pc, std::size_t budget, std::optional<std::uint64_t> load_value) {
    StepOptions opts;
    opts.load_override = load_value;
    while (pc < prog_.size() && budget > 0 && prog_.code[pc].instr.op != Opcode::kFence) {
      StepInfo info;
      try {
        info = step(prog_, pc, s, opts);
      } catch (const ExecutionFault&) {
        return;  // a transient fault squashes the episode
      }
      if (info.is_load || info.is_store) touch(info.mem_offset);
      pc = info.next_pc;
      --budget;
    }
  }

  // Propagates DIV completion times through register and FLAGS dataflow and
  // returns the episode extension for a branch on not-yet-ready FLAGS.
  std::size_t track_latency(Opcode op, const StepInfo& info, std::size_t idx) {
    if (!mc_.variable_latency) return 0;
    std::size_t ready = 0, lat = 0;
    auto consider = [&](std::size_t r, std::size_t l) {
      if (r > ready) {
        ready = r;
        lat = l;
      }
    };
    for (int r = 0; r < kNumGprs; ++r)
      if ((info.src_regs >> r) & 1) consider(reg_ready_[r], reg_lat_[r]);
    if (info.flags_read) consider(flags_ready_, flags_lat_);

    if (op == Opcode::kBcc) return flags_ready_ > idx ? flags_lat_ : 0;
    if (op == Opcode::kDiv) consider(idx + div_latency(info.reg_reads[0]), div_latency(info.reg_reads[0]));
    for (int r = 0; r < kNumGprs; ++r)
      if ((info.dst_regs >> r) & 1) {
        reg_ready_[r] = ready;
        reg_lat_[r] = lat;
      }
    if (info.flags_written) {
      flags_ready_ = ready;
      flags_lat_ = lat;
    }
    return 0;
  }

  const MachineConfig& mc_;
  const LinearProgram& prog_;
  MicroArchState& ctx_;
  std::size_t assist_page_;
  std::vector<PendingStore> pending_;
  HTrace touched_ = 0;
  std::array<int, kCacheSets> lines_{};
  std::array<std::size_t, kNumGprs> reg_ready_{}, reg_lat_{};
  std::size_t flags_ready_ = 0, flags_lat_ = 0;
};

bool bernoulli(std::mt19937_64& rng, double p) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

}  // namespace

RunResult run_once(const MachineConfig& mc, const LinearProgram& prog, const Input& in,
                   MicroArchState& ctx, std::mt19937_64* noise_rng) {
  RunResult out;
  out.final_state = in.to_state();
  Core core(mc, prog, ctx, std::clamp<std::size_t>(in.pages, 1, kMaxPages));
  core.run(out.final_state);
  out.raw = core.observed();
  if (mc.noise > 0 && noise_rng && bernoulli(*noise_rng, mc.noise))
    out.raw |= HTrace{1} << ((*noise_rng)() % kCacheSets);
  return out;
}

HTrace merge_traces(const std::vector<HTrace>& raws) {
  if (raws.size() == 1) return raws.front();
  std::map<HTrace, std::size_t> counts;
  for (HTrace t : raws) ++counts[t];
  HTrace merged = 0;
  for (const auto& [t, n] : counts)
    if (n >= 2) merged |= t;
  return merged;
}

std::vector<HTrace> measure(const MachineConfig& mc, const TestCase& tc, const std::vector<Input>& ins) {
  return measure(mc, linearize(tc), ins);
}

std::vector<HTrace> measure(const MachineConfig& mc, const LinearProgram& prog,
                            const std::vector<Input>& ins) {
  std::mt19937_64 rng(mc.noise_seed);
  const std::size_t n = ins.size();
  const std::size_t passes = mc.warmups + mc.reps;
  std::vector<std::vector<HTrace>> raws(n);
  MicroArchState ctx;

  for (std::size_t pass = 0; pass < passes; ++pass) {
    const MicroArchState before = ctx;
    std::vector<HTrace> this_pass(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (mc.reset_per_input) ctx.reset();
      this_pass[i] = run_once(mc, prog, ins[i], ctx, &rng).raw;
    }
    const std::size_t recorded = pass >= mc.warmups ? 1 : 0;
    // Without noise a pass that leaves the context unchanged repeats exactly,
    // so the remaining passes need not be simulated.
    const bool steady = mc.noise == 0.0 && ctx == before;
    const std::size_t copies = steady ? passes - std::max(pass, mc.warmups) : recorded;
    for (std::size_t i = 0; i < n; ++i) raws[i].insert(raws[i].end(), copies, this_pass[i]);
    if (steady) break;
  }

  std::vector<HTrace> merged(n);
  for (std::size_t i = 0; i < n; ++i) merged[i] = merge_traces(raws[i]);
  return merged;
}

PrimingVerdict prime_and_compare(const MachineConfig& mc, const TestCase& tc,
                                 const std::vector<Input>& ins, const std::vector<HTrace>& traces,
                                 std::size_t i, std::size_t j) {
  const LinearProgram prog = linearize(tc);
  std::vector<Input> seq = ins;
  seq[i] = ins[j];
  const bool j_as_i = measure(mc, prog, seq)[i] == traces[i];
  if (!j_as_i) return PrimingVerdict::kGenuine;
  seq = ins;
  seq[j] = ins[i];
  const bool i_as_j = measure(mc, prog, seq)[j] == traces[j];
  return i_as_j ? PrimingVerdict::kFalsePositive : PrimingVerdict::kGenuine;
}

}  // namespace mrf
