#include "core/fuzzer.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>

#include "core/errors.hpp"

namespace mrf {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t round_seed(std::uint64_t master, std::size_t round) {
  return splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(round));
}

namespace {

constexpr std::uint64_t kInputStream = 0x696E707574730000ull;  // "inputs"
constexpr std::uint64_t kNoiseStream = 0x6E6F697365000000ull;  // "noise"

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string coverage_summary(const CoverageState& cov) {
  std::string s;
  for (std::size_t k = 1; k <= kMaxCombinationSize; ++k) {
    if (k > 1) s += ",";
    s += std::to_string(cov.covered_of_size(k)) + "/" + std::to_string(combination_count(k));
  }
  return s;
}

std::string round_line(const RoundResult& r, const CoverageState& cov) {
  std::string line = "round " + std::to_string(r.round) + " seed=" + hex(r.seed);
  line += " size=" + std::to_string(r.scale.generator.test_case_size);
  line += " bbs=" + std::to_string(r.scale.generator.min_blocks) + "-" + std::to_string(r.scale.generator.max_blocks);
  line += " inputs=" + std::to_string(r.scale.inputs);
  if (!r.error.empty()) return line + " verdict=error (" + r.error + ")";
  line += " classes=" + std::to_string(r.stats.classes);
  line += " effective=" + std::to_string(r.stats.effective_classes);
  const double frac = r.inputs.empty() ? 0.0
                                       : static_cast<double>(r.inputs_in_effective_classes) /
                                             static_cast<double>(r.inputs.size());
  line += " eff_inputs=" + fixed(frac);
  line += " suspects=" + std::to_string(r.stats.suspects);
  line += " fp=" + std::to_string(r.stats.false_positives);
  line += " coverage=" + coverage_summary(cov);
  line += r.violation ? " verdict=violation" : " verdict=clean";
  return line;
}

}  // namespace

RoundResult fuzzing_round(const CampaignConfig& cfg, const FuzzingScale& scale, std::size_t round,
                          CoverageState* coverage) {
  RoundResult r;
  r.round = round;
  r.seed = round_seed(cfg.campaign.seed, round);
  r.scale = scale;
  try {
    GeneratorConfig g = scale.generator;
    g.pages = cfg.input.pages;
    g.seed = r.seed;
    r.test_case = generate_test_case(g);
    r.inputs = generate_inputs(scale.inputs, cfg.input.entropy_bits, splitmix64(r.seed ^ kInputStream),
                               cfg.input.pages);

    const LinearProgram prog = linearize(r.test_case);
    const Model model(cfg.contract);
    r.ctraces.reserve(r.inputs.size());
    r.patterns.reserve(r.inputs.size());
    for (const Input& in : r.inputs) {
      ModelResult m = model.run(prog, in);
      r.ctraces.push_back(std::move(m.ctrace));
      r.patterns.push_back(extract_patterns(m.exec));
    }

    MachineConfig mc = cfg.machine;
    mc.noise_seed = splitmix64(cfg.machine.noise_seed ^ r.seed ^ kNoiseStream);
    r.htraces = measure(mc, prog, r.inputs);
    r.violation = has_violations(r.ctraces, r.htraces, {mc, cfg.contract, r.test_case, r.inputs}, &r.stats);

    const auto classes = group_by_ctrace(r.ctraces, r.htraces);
    for (const InputClass& cl : classes)
      if (cl.effective()) r.inputs_in_effective_classes += cl.members.size();
    if (coverage) coverage->update(r.patterns, classes);
  } catch (const Error& e) {
    r.error = e.what();
    r.violation.reset();
  }
  return r;
}

CampaignReport fuzz_campaign(const CampaignConfig& cfg, const LogSink& sink) {
  cfg.check();
  CampaignReport rep;
  const bool persist = !cfg.campaign.output_dir.empty();
  const fs::path out_dir(cfg.campaign.output_dir);
  if (persist) fs::create_directories(out_dir);

  auto emit = [&](const std::string& line) {
    rep.log.push_back(line);
    if (sink) sink(line);
  };

  FuzzingScale scale{cfg.generator, cfg.input.count};
  scale.generator.pages = cfg.input.pages;
  CoverageState coverage;
  const auto start = std::chrono::steady_clock::now();
  double sum_inputs = 0, sum_effective = 0, sum_fraction = 0;

  for (std::size_t round = 0; round < cfg.campaign.max_rounds; ++round) {
    if (cfg.campaign.time_budget > 0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() >= cfg.campaign.time_budget) break;
    }
    RoundResult r = fuzzing_round(cfg, scale, round, &coverage);
    ++rep.rounds_run;
    if (!r.error.empty()) ++rep.errors;
    sum_inputs += static_cast<double>(r.inputs.size());
    sum_effective += static_cast<double>(r.stats.effective_classes);
    if (!r.inputs.empty())
      sum_fraction += static_cast<double>(r.inputs_in_effective_classes) / static_cast<double>(r.inputs.size());
    emit(round_line(r, coverage));
    rep.coverage_trajectory.push_back(
        {coverage.covered_of_size(1), coverage.covered_of_size(2), coverage.covered_of_size(3)});

    if (r.violation) {
      ++rep.violations;
      if (persist) {
        char name[32];
        std::snprintf(name, sizeof name, "violation-r%05zu", round);
        const std::string dir = (out_dir / name).string();
        Bundle b;
        b.test_case = r.test_case;
        b.inputs = r.inputs;
        b.ctraces = r.ctraces;
        b.htraces = r.htraces;
        b.config = cfg;
        b.i = r.violation->i;
        b.j = r.violation->j;
        b.round = round;
        b.round_seed = r.seed;
        b.priming = r.violation->priming;
        // Reproduction must see the exact scale and noise seed of this round.
        b.config.generator = r.scale.generator;
        b.config.input.count = r.scale.inputs;
        b.config.machine.noise_seed = splitmix64(cfg.machine.noise_seed ^ r.seed ^ kNoiseStream);
        write_bundle(dir, b);
        rep.bundles.push_back(dir);
        emit("violation round " + std::to_string(round) + " inputs " + std::to_string(b.i) + "," +
             std::to_string(b.j) + " contract " + contract_name(cfg.contract) + " bundle " + dir);
        if (cfg.campaign.minimize) {
          MinimizationResult m = minimize(b.config.machine, cfg.contract, r.test_case, r.inputs, b.i, b.j);
          if (m.reproducible) write_minimization(dir, m);
          emit("minimized round " + std::to_string(round) + ": inputs " + std::to_string(m.original_inputs) +
               "->" + std::to_string(m.inputs.size()) + " payload " + std::to_string(m.original_payload) + "->" +
               std::to_string(m.minimized.payload_count()) + " fences " + std::to_string(m.fences_added) +
               " stages " + (m.stage_ok[0] ? "ok" : "fail") + "/" + (m.stage_ok[1] ? "ok" : "fail") + "/" +
               (m.stage_ok[2] ? "ok" : "fail"));
          rep.minimizations.push_back(std::move(m));
        }
      }
      rep.violating_rounds.push_back(std::move(r));
      if (cfg.campaign.stop_on_violation) {
        rep.stopped_on_violation = true;
        break;
      }
      continue;
    }

    if (cfg.campaign.coverage_feedback && r.error.empty() && coverage.size_complete(coverage.target())) {
      const std::size_t done = coverage.target();
      if (done < kMaxCombinationSize) {
        scale = grow_params(scale, true);
        coverage.advance_target();
        emit("coverage: all combinations of size " + std::to_string(done) + " covered; size=" +
             std::to_string(scale.generator.test_case_size) + " bbs=" + std::to_string(scale.generator.min_blocks) +
             "-" + std::to_string(scale.generator.max_blocks) + " inputs=" + std::to_string(scale.inputs));
      }
    }
  }

  const double n = rep.rounds_run ? static_cast<double>(rep.rounds_run) : 1.0;
  rep.mean_inputs = sum_inputs / n;
  rep.mean_effective_classes = sum_effective / n;
  rep.mean_effective_input_fraction = sum_fraction / n;
  rep.final_scale = scale;

  if (persist) {
    std::string log;
    for (const auto& l : rep.log) log += l + "\n";
    write_text_file((out_dir / "campaign.log").string(), log);
    write_text_file((out_dir / "report.txt").string(), rep.format() + "\n[config]\n" + format_entries(cfg));
  }
  return rep;
}

std::string CampaignReport::format() const {
  std::string s;
  s += "rounds = " + std::to_string(rounds_run) + "\n";
  s += "violations = " + std::to_string(violations) + "\n";
  s += "errors = " + std::to_string(errors) + "\n";
  s += std::string("stopped_on_violation = ") + (stopped_on_violation ? "true" : "false") + "\n";
  s += "mean_inputs_per_test_case = " + fixed(mean_inputs, 2) + "\n";
  s += "mean_effective_classes_per_test_case = " + fixed(mean_effective_classes, 2) + "\n";
  s += "mean_effective_input_fraction = " + fixed(mean_effective_input_fraction) + "\n";
  s += "final_test_case_size = " + std::to_string(final_scale.generator.test_case_size) + "\n";
  s += "final_inputs_per_test_case = " + std::to_string(final_scale.inputs) + "\n";
  if (!coverage_trajectory.empty()) {
    const auto& c = coverage_trajectory.back();
    for (std::size_t k = 0; k < kMaxCombinationSize; ++k)
      s += "covered_combinations_size" + std::to_string(k + 1) + " = " + std::to_string(c[k]) + "/" +
           std::to_string(combination_count(k + 1)) + "\n";
  }
  for (const auto& b : bundles) s += "bundle = " + b + "\n";
  return s;
}

ReproduceResult reproduce(const std::string& bundle_dir, const std::vector<std::string>& overrides) {
  Bundle b = read_bundle(bundle_dir);
  apply_overrides(b.config, overrides);
  b.config.check();
  validate(b.test_case);

  ReproduceResult res;
  const LinearProgram prog = linearize(b.test_case);
  const Model model(b.config.contract);
  std::vector<CTrace> ctraces;
  for (const Input& in : b.inputs) ctraces.push_back(model.run(prog, in).ctrace);
  const auto htraces = measure(b.config.machine, prog, b.inputs);
  if (overrides.empty() && (htraces != b.htraces || ctraces != b.ctraces)) {
    res.stored_traces_match = false;
    res.message = "warning: stored traces differ from recomputed traces; using recomputed traces\n";
  }
  res.violation = has_violations(ctraces, htraces, {b.config.machine, b.config.contract, b.test_case, b.inputs});
  res.recurs = res.violation.has_value();
  res.message += res.recurs ? "violation reproduced (inputs " + std::to_string(res.violation->i) + ", " +
                                  std::to_string(res.violation->j) + ")"
                            : "violation did not reproduce";
  return res;
}

MinimizationResult minimize_bundle(const std::string& bundle_dir) {
  Bundle b = read_bundle(bundle_dir);
  b.config.check();
  MinimizationResult m = minimize(b.config.machine, b.config.contract, b.test_case, b.inputs, b.i, b.j);
  if (m.reproducible) write_minimization(bundle_dir, m);
  return m;
}

}  // namespace mrf
