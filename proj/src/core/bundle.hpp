// On-disk violation bundles and the text formats they are made of.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/config.hpp"
#include "core/inputs.hpp"
#include "core/model.hpp"
#include "core/postprocessor.hpp"
#include "core/uarch.hpp"

namespace mrf {

// `.input` text: seed/entropy header, registers, FLAGS, page count, then the
// memory words eight per line.
std::string format_input(const Input& in);
Input parse_input(std::string_view text);  // throws FormatError

// One 64-character line per input.
std::string format_htraces(const std::vector<HTrace>& traces);
std::vector<HTrace> parse_htraces(std::string_view text);

struct Bundle {
  TestCase test_case;
  std::vector<Input> inputs;
  std::vector<CTrace> ctraces;
  std::vector<HTrace> htraces;
  CampaignConfig config;
  std::string verdict = "violation";
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t round = 0;
  std::uint64_t round_seed = 0;
  PrimingVerdict priming = PrimingVerdict::kGenuine;
};

// Creates `dir` (and parents) and writes testcase.tc, inputs/, ctraces/,
// htraces/traces.htrace and report.txt.
void write_bundle(const std::string& dir, const Bundle& b);
// Throws FormatError on a malformed or incomplete bundle.
Bundle read_bundle(const std::string& dir);

// Writes minimized.tc, minimized-inputs/ and fenced.tc.
void write_minimization(const std::string& dir, const MinimizationResult& r);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace mrf
