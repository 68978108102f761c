#include "core/bundle.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/assembler.hpp"
#include "core/errors.hpp"

namespace mrf {

namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%" PRIx64, v);
  return buf;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("bad " + what + " '" + s + "'");
}

std::string numbered(std::size_t k, std::string_view ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", k);
  return std::string(buf) + std::string(ext);
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void write_inputs(const fs::path& dir, const std::vector<Input>& inputs) {
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".input") fs::remove(e.path());
  for (std::size_t k = 0; k < inputs.size(); ++k)
    write_text_file((dir / numbered(k, ".input")).string(), format_input(inputs[k]));
}

std::vector<Input> read_inputs(const fs::path& dir) {
  std::vector<Input> out;
  for (const auto& p : sorted_files(dir, ".input")) out.push_back(parse_input(read_text_file(p.string())));
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write '" + path + "'");
  f << text;
}

std::string format_input(const Input& in) {
  std::string out;
  out += "seed " + hex(in.seed) + "\n";
  out += "entropy " + std::to_string(in.entropy_bits) + "\n";
  for (int r = 0; r < kNumGprs; ++r) out += "R" + std::to_string(r) + " " + hex(in.regs[r]) + "\n";
  out += "FLAGS " + hex(in.flags) + "\n";
  out += "PAGES " + std::to_string(in.pages) + "\n";
  for (std::size_t w = 0; w < in.mem.size(); ++w) {
    out += hex(in.mem[w]);
    out += (w % 8 == 7 || w + 1 == in.mem.size()) ? "\n" : " ";
  }
  return out;
}

Input parse_input(std::string_view text) {
  std::istringstream is{std::string(text)};
  Input in;
  std::map<std::string, std::string> header;
  const char* keys[] = {"seed", "entropy", "R0", "R1", "R2", "R3", "FLAGS", "PAGES"};
  for (const char* expected : keys) {
    std::string key, value;
    if (!(is >> key >> value) || key != expected)
      throw FormatError(std::string("input: expected '") + expected + "' line");
    header[key] = value;
  }
  in.seed = static_cast<std::uint32_t>(parse_u64(header["seed"], "input seed"));
  in.entropy_bits = static_cast<unsigned>(parse_u64(header["entropy"], "entropy"));
  for (int r = 0; r < kNumGprs; ++r) in.regs[r] = parse_u64(header["R" + std::to_string(r)], "register value");
  in.flags = static_cast<std::uint8_t>(parse_u64(header["FLAGS"], "flags") & kFlagMask);
  in.pages = parse_u64(header["PAGES"], "page count");
  if (in.pages < 1 || in.pages > kMaxPages) throw FormatError("input: page count must be 1 or 2");
  std::string word;
  while (is >> word) in.mem.push_back(parse_u64(word, "memory word"));
  if (in.mem.size() != in.pages * kWordsPerPage)
    throw FormatError("input: expected " + std::to_string(in.pages * kWordsPerPage) + " memory words, got " +
                      std::to_string(in.mem.size()));
  return in;
}

std::string format_htraces(const std::vector<HTrace>& traces) {
  std::string out;
  for (HTrace t : traces) out += format_htrace(t) + "\n";
  return out;
}

std::vector<HTrace> parse_htraces(std::string_view text) {
  std::vector<HTrace> out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_htrace(line));
  }
  return out;
}

void write_bundle(const std::string& dir_name, const Bundle& b) {
  const fs::path dir(dir_name);
  fs::create_directories(dir / "ctraces");
  fs::create_directories(dir / "htraces");
  write_text_file((dir / "testcase.tc").string(), disassemble(b.test_case));
  write_inputs(dir / "inputs", b.inputs);
  for (std::size_t k = 0; k < b.ctraces.size(); ++k)
    write_text_file((dir / "ctraces" / numbered(k, ".ctrace")).string(), format_ctrace(b.ctraces[k]));
  write_text_file((dir / "htraces" / "traces.htrace").string(), format_htraces(b.htraces));

  std::string report;
  report += "verdict = " + b.verdict + "\n";
  report += "contract = " + contract_name(b.config.contract) + "\n";
  report += "input_i = " + std::to_string(b.i) + "\n";
  report += "input_j = " + std::to_string(b.j) + "\n";
  report += "round = " + std::to_string(b.round) + "\n";
  report += "round_seed = " + hex(b.round_seed) + "\n";
  report += "master_seed = " + hex(b.config.campaign.seed) + "\n";
  report += std::string("priming = ") + (b.priming == PrimingVerdict::kGenuine ? "genuine" : "false-positive") + "\n";
  if (b.i < b.htraces.size() && b.j < b.htraces.size()) {
    report += "htrace_i = " + format_htrace(b.htraces[b.i]) + "\n";
    report += "htrace_j = " + format_htrace(b.htraces[b.j]) + "\n";
  }
  report += "\n[config]\n" + format_entries(b.config);
  write_text_file((dir / "report.txt").string(), report);
}

Bundle read_bundle(const std::string& dir_name) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw FormatError("bundle '" + dir_name + "' is not a directory");
  Bundle b;
  try {
    b.test_case = assemble(read_text_file((dir / "testcase.tc").string()));
  } catch (const AssemblyError& e) {
    throw FormatError(std::string("testcase.tc: ") + e.what());
  }
  b.inputs = read_inputs(dir / "inputs");
  if (b.inputs.empty()) throw FormatError("bundle has no inputs");
  for (const auto& p : sorted_files(dir / "ctraces", ".ctrace")) b.ctraces.push_back(parse_ctrace(read_text_file(p.string())));
  const fs::path ht = dir / "htraces" / "traces.htrace";
  if (fs::exists(ht)) b.htraces = parse_htraces(read_text_file(ht.string()));

  std::istringstream is(read_text_file((dir / "report.txt").string()));
  std::string line;
  bool in_config = false;
  std::map<std::string, std::string> fields;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "[config]") {
      in_config = true;
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw FormatError("report.txt: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (in_config) {
      try {
        b.config.set(key, value);
      } catch (const ConfigError& e) {
        throw FormatError(std::string("report.txt: ") + e.what());
      }
    } else {
      fields[key] = value;
    }
  }
  if (!in_config) throw FormatError("report.txt: missing [config] section");
  for (const char* required : {"verdict", "input_i", "input_j"})
    if (!fields.count(required)) throw FormatError(std::string("report.txt: missing '") + required + "'");
  b.verdict = fields["verdict"];
  b.i = parse_u64(fields["input_i"], "input index");
  b.j = parse_u64(fields["input_j"], "input index");
  if (b.i >= b.inputs.size() || b.j >= b.inputs.size() || b.i == b.j)
    throw FormatError("report.txt: offending input indices out of range");
  if (fields.count("round")) b.round = parse_u64(fields["round"], "round");
  if (fields.count("round_seed")) b.round_seed = parse_u64(fields["round_seed"], "round seed");
  if (fields.count("priming") && fields["priming"] == "false-positive") b.priming = PrimingVerdict::kFalsePositive;
  return b;
}

void write_minimization(const std::string& dir_name, const MinimizationResult& r) {
  const fs::path dir(dir_name);
  write_text_file((dir / "minimized.tc").string(), disassemble(r.minimized));
  write_inputs(dir / "minimized-inputs", r.inputs);
  write_text_file((dir / "fenced.tc").string(), disassemble(r.fenced));
}

}  // namespace mrf
