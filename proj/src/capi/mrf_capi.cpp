#include "mrf/mrf.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "core/assembler.hpp"
#include "core/bundle.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/fuzzer.hpp"

struct mrf_testcase {
  mrf::TestCase tc;
};

struct mrf_config {
  mrf::CampaignConfig cfg;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_asm_line = 0;
thread_local std::size_t g_asm_column = 0;

mrf_status fail(mrf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, mapping exceptions to status codes.
template <typename F>
mrf_status guarded(F&& f) {
  g_last_error.clear();
  g_asm_line = g_asm_column = 0;
  try {
    f();
    return MRF_OK;
  } catch (const mrf::AssemblyError& e) {
    g_asm_line = e.line();
    g_asm_column = e.column();
    return fail(MRF_ERR_ASSEMBLY, e.what());
  } catch (const mrf::ValidationError& e) {
    return fail(MRF_ERR_VALIDATION, e.what());
  } catch (const mrf::ConfigError& e) {
    return fail(MRF_ERR_CONFIG, e.what());
  } catch (const mrf::ExecutionFault& e) {
    return fail(MRF_ERR_EXECUTION, e.what());
  } catch (const mrf::SpeculationDepthError& e) {
    return fail(MRF_ERR_EXECUTION, e.what());
  } catch (const mrf::FormatError& e) {
    return fail(MRF_ERR_FORMAT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MRF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MRF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MRF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MRF_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

#define MRF_REQUIRE(cond)                                                             \
  do {                                                                                \
    if (!(cond)) return fail(MRF_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

extern "C" {

const char* mrf_version(void) { return "0.1.0"; }

const char* mrf_status_string(mrf_status status) {
  switch (status) {
    case MRF_OK: return "ok";
    case MRF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MRF_ERR_ASSEMBLY: return "assembly error";
    case MRF_ERR_VALIDATION: return "validation error";
    case MRF_ERR_CONFIG: return "configuration error";
    case MRF_ERR_EXECUTION: return "execution error";
    case MRF_ERR_FORMAT: return "format error";
    case MRF_ERR_IO: return "i/o error";
    case MRF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mrf_last_error(void) { return g_last_error.c_str(); }

void mrf_string_free(char* s) { std::free(s); }

mrf_status mrf_testcase_assemble(const char* text, mrf_testcase** out) {
  MRF_REQUIRE(text && out);
  *out = nullptr;
  return guarded([&] { *out = new mrf_testcase{mrf::assemble(text)}; });
}

mrf_status mrf_testcase_load(const char* path, mrf_testcase** out) {
  MRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    std::string text;
    try {
      text = mrf::read_text_file(path);
    } catch (const mrf::FormatError& e) {
      throw std::filesystem::filesystem_error(e.what(), std::make_error_code(std::errc::io_error));
    }
    *out = new mrf_testcase{mrf::assemble(text)};
  });
}

mrf_status mrf_testcase_disassemble(const mrf_testcase* tc, char** out) {
  MRF_REQUIRE(tc && out);
  *out = nullptr;
  return guarded([&] { *out = dup_string(mrf::disassemble(tc->tc)); });
}

mrf_status mrf_testcase_info_get(const mrf_testcase* tc, mrf_testcase_info* out) {
  MRF_REQUIRE(tc && out);
  return guarded([&] {
    out->blocks = tc->tc.blocks.size();
    out->instructions = tc->tc.instruction_count();
    out->payload = tc->tc.payload_count();
    out->memory_accesses = tc->tc.memory_access_count();
    out->sandbox_offset = tc->tc.sandbox_offset;
  });
}

void mrf_last_assembly_location(size_t* line, size_t* column) {
  if (line) *line = g_asm_line;
  if (column) *column = g_asm_column;
}

void mrf_testcase_free(mrf_testcase* tc) { delete tc; }

mrf_status mrf_config_default(mrf_config** out) {
  MRF_REQUIRE(out);
  return guarded([&] { *out = new mrf_config{}; });
}

mrf_status mrf_config_load(const char* path, mrf_config** out) {
  MRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new mrf_config{mrf::load_config(path)}; });
}

mrf_status mrf_config_parse(const char* yaml, mrf_config** out) {
  MRF_REQUIRE(yaml && out);
  *out = nullptr;
  return guarded([&] { *out = new mrf_config{mrf::parse_config(yaml)}; });
}

mrf_status mrf_config_set(mrf_config* cfg, const char* key, const char* value) {
  MRF_REQUIRE(cfg && key && value);
  return guarded([&] {
    mrf::CampaignConfig trial = cfg->cfg;
    trial.set(key, value);
    cfg->cfg = std::move(trial);
  });
}

mrf_status mrf_config_get(const mrf_config* cfg, const char* key, char** value) {
  MRF_REQUIRE(cfg && key && value);
  *value = nullptr;
  return guarded([&] {
    const std::string k = key;
    for (const auto& [name, v] : cfg->cfg.entries())
      if (name == k || name.substr(name.find('.') + 1) == k) {
        *value = dup_string(v);
        return;
      }
    throw mrf::ConfigError("unknown key '" + k + "'");
  });
}

mrf_status mrf_config_dump(const mrf_config* cfg, char** out) {
  MRF_REQUIRE(cfg && out);
  *out = nullptr;
  return guarded([&] { *out = dup_string(mrf::format_entries(cfg->cfg)); });
}

mrf_status mrf_config_check(const mrf_config* cfg) {
  MRF_REQUIRE(cfg);
  return guarded([&] { cfg->cfg.check(); });
}

void mrf_config_free(mrf_config* cfg) { delete cfg; }

mrf_status mrf_fuzz(const mrf_config* cfg, mrf_log_fn log, void* user, mrf_campaign_summary* out) {
  MRF_REQUIRE(cfg);
  return guarded([&] {
    mrf::LogSink sink;
    if (log) sink = [&](const std::string& line) { log(line.c_str(), user); };
    const mrf::CampaignReport rep = mrf::fuzz_campaign(cfg->cfg, sink);
    if (out) {
      out->rounds_run = rep.rounds_run;
      out->violations = rep.violations;
      out->errors = rep.errors;
      out->stopped_on_violation = rep.stopped_on_violation ? 1 : 0;
      out->mean_inputs = rep.mean_inputs;
      out->mean_effective_classes = rep.mean_effective_classes;
    }
  });
}

mrf_status mrf_reproduce(const char* bundle_dir, const char* const* overrides, size_t n_overrides, int* recurs,
                         char** message) {
  MRF_REQUIRE(bundle_dir && recurs && (overrides || n_overrides == 0));
  if (message) *message = nullptr;
  return guarded([&] {
    std::vector<std::string> ov;
    for (size_t k = 0; k < n_overrides; ++k) ov.emplace_back(overrides[k]);
    const mrf::ReproduceResult r = mrf::reproduce(bundle_dir, ov);
    *recurs = r.recurs ? 1 : 0;
    if (message) *message = dup_string(r.message);
  });
}

mrf_status mrf_minimize(const char* bundle_dir, mrf_minimize_summary* out) {
  MRF_REQUIRE(bundle_dir && out);
  return guarded([&] {
    const mrf::MinimizationResult m = mrf::minimize_bundle(bundle_dir);
    out->reproducible = m.reproducible ? 1 : 0;
    out->original_inputs = m.original_inputs;
    out->minimized_inputs = m.inputs.size();
    out->original_payload = m.original_payload;
    out->minimized_payload = m.reproducible ? m.minimized.payload_count() : m.original_payload;
    out->fences_added = m.fences_added;
    for (int k = 0; k < 3; ++k) out->stage_ok[k] = m.stage_ok[k] ? 1 : 0;
  });
}

}  // extern "C"
