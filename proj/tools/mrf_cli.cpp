// Command-line front end. Talks to the fuzzer exclusively through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "mrf/mrf.h"

namespace {

int report_error(mrf_status s) {
  std::fprintf(stderr, "error: %s: %s\n", mrf_status_string(s), mrf_last_error());
  return s == MRF_ERR_INTERNAL ? 3 : 2;
}

void print_line(const char* line, void*) {
  std::printf("%s\n", line);
  std::fflush(stdout);
}

int cmd_fuzz(const std::string& config_path, const std::string& seed, const std::string& rounds,
             bool stop_on_violation) {
  mrf_config* cfg = nullptr;
  mrf_status s = mrf_config_load(config_path.c_str(), &cfg);
  if (s != MRF_OK) return report_error(s);
  if (!seed.empty() && (s = mrf_config_set(cfg, "campaign.seed", seed.c_str())) != MRF_OK) {
    mrf_config_free(cfg);
    return report_error(s);
  }
  if (!rounds.empty() && (s = mrf_config_set(cfg, "campaign.max_rounds", rounds.c_str())) != MRF_OK) {
    mrf_config_free(cfg);
    return report_error(s);
  }
  if (stop_on_violation) mrf_config_set(cfg, "campaign.stop_on_violation", "true");
  if ((s = mrf_config_check(cfg)) != MRF_OK) {
    mrf_config_free(cfg);
    return report_error(s);
  }
  mrf_campaign_summary sum{};
  s = mrf_fuzz(cfg, print_line, nullptr, &sum);
  mrf_config_free(cfg);
  if (s != MRF_OK) return report_error(s);
  std::printf("rounds=%llu violations=%llu errors=%llu\n", static_cast<unsigned long long>(sum.rounds_run),
              static_cast<unsigned long long>(sum.violations), static_cast<unsigned long long>(sum.errors));
  return 0;
}

int cmd_reproduce(const std::string& bundle, const std::vector<std::string>& overrides) {
  std::vector<const char*> ov;
  for (const auto& o : overrides) ov.push_back(o.c_str());
  int recurs = 0;
  char* message = nullptr;
  mrf_status s = mrf_reproduce(bundle.c_str(), ov.data(), ov.size(), &recurs, &message);
  if (s != MRF_OK) return report_error(s);
  std::printf("%s\n", message);
  mrf_string_free(message);
  return recurs ? 0 : 1;
}

int cmd_minimize(const std::string& bundle) {
  mrf_minimize_summary m{};
  mrf_status s = mrf_minimize(bundle.c_str(), &m);
  if (s != MRF_OK) return report_error(s);
  if (!m.reproducible) {
    std::printf("violation did not reproduce; nothing minimized\n");
    return 1;
  }
  std::printf("inputs %zu -> %zu\npayload %zu -> %zu\nfences added %zu\nstages %s/%s/%s\n", m.original_inputs,
              m.minimized_inputs, m.original_payload, m.minimized_payload, m.fences_added,
              m.stage_ok[0] ? "ok" : "fail", m.stage_ok[1] ? "ok" : "fail", m.stage_ok[2] ? "ok" : "fail");
  return m.stage_ok[0] && m.stage_ok[1] && m.stage_ok[2] ? 0 : 1;
}

int cmd_asm(const std::string& path, bool print_canonical) {
  mrf_testcase* tc = nullptr;
  mrf_status s = mrf_testcase_load(path.c_str(), &tc);
  if (s != MRF_OK) {
    size_t line = 0, column = 0;
    mrf_last_assembly_location(&line, &column);
    if (line) std::fprintf(stderr, "%s:%zu:%zu: ", path.c_str(), line, column);
    return report_error(s);
  }
  if (print_canonical) {
    char* text = nullptr;
    s = mrf_testcase_disassemble(tc, &text);
    if (s == MRF_OK) {
      std::fputs(text, stdout);
      mrf_string_free(text);
    }
  } else {
    mrf_testcase_info info{};
    s = mrf_testcase_info_get(tc, &info);
    if (s == MRF_OK)
      std::printf("ok: %zu blocks, %zu instructions, %zu payload, %zu memory accesses, sandbox offset %u\n",
                  info.blocks, info.instructions, info.payload, info.memory_accesses,
                  static_cast<unsigned>(info.sandbox_offset));
  }
  mrf_testcase_free(tc);
  return s == MRF_OK ? 0 : report_error(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based relational fuzzer for speculation contracts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mrf_version()));

  std::string config_path, seed, rounds;
  bool stop = false;
  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  fuzz->add_option("--config", config_path, "Campaign configuration (YAML)")->required()->check(CLI::ExistingFile);
  fuzz->add_option("--seed", seed, "Master seed (overrides campaign.seed)");
  fuzz->add_option("--rounds", rounds, "Maximum rounds (overrides campaign.max_rounds)");
  fuzz->add_flag("--stop-on-violation", stop, "Stop after the first confirmed violation");

  std::string bundle;
  std::vector<std::string> overrides;
  auto* repro = app.add_subcommand("reproduce", "Re-run a violation bundle; exit 0 iff it recurs");
  repro->add_option("bundle", bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  repro->add_option("--override", overrides, "Config override key=value (repeatable)");

  std::string min_bundle;
  auto* min = app.add_subcommand("minimize", "Minimize a violation bundle in place");
  min->add_option("bundle", min_bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);

  std::string asm_path, disasm_path;
  auto* as = app.add_subcommand("asm", "Assemble and validate a test case");
  as->add_option("file", asm_path, "Test case (.tc)")->required();
  auto* dis = app.add_subcommand("disasm", "Print the canonical form of a test case");
  dis->add_option("file", disasm_path, "Test case (.tc)")->required();

  CLI11_PARSE(app, argc, argv);

  if (*fuzz) return cmd_fuzz(config_path, seed, rounds, stop);
  if (*repro) return cmd_reproduce(bundle, overrides);
  if (*min) return cmd_minimize(min_bundle);
  if (*as) return cmd_asm(asm_path, false);
  if (*dis) return cmd_asm(disasm_path, true);
  return 1;
}
