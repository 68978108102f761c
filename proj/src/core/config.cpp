#include "core/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace mrf {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool to_bool(std::string_view key, std::string_view v) {
  const std::string k = lower(trim(v));
  if (k == "true" || k == "yes" || k == "on" || k == "1") return true;
  if (k == "false" || k == "no" || k == "off" || k == "0") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    const std::uint64_t x = std::stoull(s, &used, 0);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  double x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return x;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_double(double d) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, p);
}

std::string fmt_hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

// "seq", "cond-bpas", or a list of clauses such as "[cond, bpas]".
ExecutionClause execution_from_list(std::string_view key, const std::vector<std::string>& items) {
  bool cond = false, bpas = false;
  for (const std::string& item : items) {
    switch (parse_execution(item)) {
      case ExecutionClause::kSeq: break;
      case ExecutionClause::kCond: cond = true; break;
      case ExecutionClause::kBpas: bpas = true; break;
      case ExecutionClause::kCondBpas: cond = bpas = true; break;
    }
  }
  if (items.empty()) throw ConfigError(std::string(key) + ": empty execution clause list");
  if (cond && bpas) return ExecutionClause::kCondBpas;
  if (cond) return ExecutionClause::kCond;
  if (bpas) return ExecutionClause::kBpas;
  return ExecutionClause::kSeq;
}

std::vector<std::string> split_list(std::string_view v) {
  std::string s = trim(v);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

constexpr std::string_view kSections[] = {"generator", "input", "contract", "machine", "campaign"};

}  // namespace

void CampaignConfig::check() const {
  GeneratorConfig g = generator;
  g.pages = input.pages;
  g.check();
  machine.check();
  if (input.entropy_bits < kMinEntropyBits || input.entropy_bits > kMaxEntropyBits)
    throw ConfigError("input.entropy_bits must be in [1, 32]");
  if (input.count == 0) throw ConfigError("input.inputs_per_test_case must be at least 1");
  if (input.pages < 1 || input.pages > kMaxPages) throw ConfigError("input.pages must be 1 or 2");
  if (contract.window < machine.hw_window)
    throw ConfigError("contract speculation window (" + std::to_string(contract.window) +
                      ") is smaller than the machine window (" + std::to_string(machine.hw_window) + ")");
  if (contract.max_nesting == 0) throw ConfigError("contract.max_nesting must be at least 1");
  if (campaign.time_budget < 0) throw ConfigError("campaign.time_budget must be non-negative");
}

void CampaignConfig::set(std::string_view dotted, std::string_view value) {
  std::string key = lower(trim(dotted));
  // Unqualified keys are accepted when they name exactly one setting.
  if (key.find('.') == std::string::npos) {
    std::string found;
    for (const auto& [k, v] : entries()) {
      if (k.substr(k.find('.') + 1) != key) continue;
      if (!found.empty()) throw ConfigError("ambiguous key '" + key + "'");
      found = k;
    }
    if (key == "enable_ssbp_patch") found = "machine.enable_ssbp_patch";
    if (found.empty()) throw ConfigError("unknown key '" + key + "'");
    key = found;
  }
  const std::string v = trim(value);

  if (key == "generator.instruction_set") generator.subset = parse_subset(v);
  else if (key == "generator.test_case_size") generator.test_case_size = to_u64(key, v);
  else if (key == "generator.max_mem_accesses") generator.max_mem_accesses = to_u64(key, v);
  else if (key == "generator.min_bb_per_function") generator.min_blocks = to_u64(key, v);
  else if (key == "generator.max_bb_per_function") generator.max_blocks = to_u64(key, v);
  else if (key == "input.entropy_bits") input.entropy_bits = static_cast<unsigned>(to_u64(key, v));
  else if (key == "input.inputs_per_test_case") input.count = to_u64(key, v);
  else if (key == "input.pages") input.pages = generator.pages = to_u64(key, v);
  else if (key == "contract.contract_observation_mode") contract.observation = parse_observation(v);
  else if (key == "contract.contract_execution_mode") contract.execution = execution_from_list(key, split_list(v));
  else if (key == "contract.speculation_window") contract.window = to_u64(key, v);
  else if (key == "contract.nesting") contract.nesting = to_bool(key, v);
  else if (key == "contract.max_nesting") contract.max_nesting = to_u64(key, v);
  else if (key == "machine.branch_prediction") machine.branch_prediction = to_bool(key, v);
  else if (key == "machine.store_bypass") machine.store_bypass = to_bool(key, v);
  else if (key == "machine.enable_ssbp_patch") machine.store_bypass = !to_bool(key, v);
  else if (key == "machine.assist_mode") machine.assist = parse_assist(v);
  else if (key == "machine.variable_latency") machine.variable_latency = to_bool(key, v);
  else if (key == "machine.speculation_window") machine.hw_window = to_u64(key, v);
  else if (key == "machine.attack_variant") machine.attack = parse_attack(v);
  else if (key == "machine.noise_probability") machine.noise = to_double(key, v);
  else if (key == "machine.reps") machine.reps = to_u64(key, v);
  else if (key == "machine.warmups") machine.warmups = to_u64(key, v);
  else if (key == "machine.reset_per_input") machine.reset_per_input = to_bool(key, v);
  else if (key == "machine.priming_batch") machine.priming_batch = to_u64(key, v);
  else if (key == "machine.noise_seed") machine.noise_seed = to_u64(key, v);
  else if (key == "campaign.max_rounds") campaign.max_rounds = to_u64(key, v);
  else if (key == "campaign.time_budget") campaign.time_budget = to_double(key, v);
  else if (key == "campaign.seed") campaign.seed = to_u64(key, v);
  else if (key == "campaign.stop_on_violation") campaign.stop_on_violation = to_bool(key, v);
  else if (key == "campaign.output_dir") campaign.output_dir = v;
  else if (key == "campaign.minimize") campaign.minimize = to_bool(key, v);
  else if (key == "campaign.coverage_feedback") campaign.coverage_feedback = to_bool(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> CampaignConfig::entries() const {
  using std::to_string;
  return {
      {"generator.instruction_set", std::string(subset_name(generator.subset))},
      {"generator.test_case_size", to_string(generator.test_case_size)},
      {"generator.max_mem_accesses", to_string(generator.max_mem_accesses)},
      {"generator.min_bb_per_function", to_string(generator.min_blocks)},
      {"generator.max_bb_per_function", to_string(generator.max_blocks)},
      {"input.entropy_bits", to_string(input.entropy_bits)},
      {"input.inputs_per_test_case", to_string(input.count)},
      {"input.pages", to_string(input.pages)},
      {"contract.contract_observation_mode", std::string(observation_name(contract.observation))},
      {"contract.contract_execution_mode", std::string(execution_name(contract.execution))},
      {"contract.speculation_window", to_string(contract.window)},
      {"contract.nesting", fmt_bool(contract.nesting)},
      {"contract.max_nesting", to_string(contract.max_nesting)},
      {"machine.branch_prediction", fmt_bool(machine.branch_prediction)},
      {"machine.store_bypass", fmt_bool(machine.store_bypass)},
      {"machine.assist_mode", std::string(assist_name(machine.assist))},
      {"machine.variable_latency", fmt_bool(machine.variable_latency)},
      {"machine.speculation_window", to_string(machine.hw_window)},
      {"machine.attack_variant", std::string(attack_name(machine.attack))},
      {"machine.noise_probability", fmt_double(machine.noise)},
      {"machine.reps", to_string(machine.reps)},
      {"machine.warmups", to_string(machine.warmups)},
      {"machine.reset_per_input", fmt_bool(machine.reset_per_input)},
      {"machine.priming_batch", to_string(machine.priming_batch)},
      {"machine.noise_seed", fmt_hex(machine.noise_seed)},
      {"campaign.max_rounds", to_string(campaign.max_rounds)},
      {"campaign.time_budget", fmt_double(campaign.time_budget)},
      {"campaign.seed", fmt_hex(campaign.seed)},
      {"campaign.stop_on_violation", fmt_bool(campaign.stop_on_violation)},
      {"campaign.output_dir", campaign.output_dir},
      {"campaign.minimize", fmt_bool(campaign.minimize)},
      {"campaign.coverage_feedback", fmt_bool(campaign.coverage_feedback)},
  };
}

namespace {

std::string scalar_text(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return n.Scalar();
  if (n.IsSequence()) {
    std::string joined;
    for (const auto& item : n) {
      if (!item.IsScalar()) throw ConfigError(key + ": nested lists are not supported");
      if (!joined.empty()) joined += ",";
      joined += item.Scalar();
    }
    return joined;
  }
  if (n.IsNull()) throw ConfigError(key + ": missing value");
  throw ConfigError(key + ": expected a scalar value");
}

}  // namespace

CampaignConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  CampaignConfig cfg;
  if (root.IsNull()) {
    cfg.check();
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  for (const auto& kv : root) {
    const std::string name = kv.first.as<std::string>();
    const bool section = std::find(std::begin(kSections), std::end(kSections), lower(name)) != std::end(kSections);
    if (section && kv.second.IsMap()) {
      for (const auto& inner : kv.second) {
        const std::string key = lower(name) + "." + inner.first.as<std::string>();
        cfg.set(key, scalar_text(inner.second, key));
      }
    } else if (section && !kv.second.IsNull()) {
      throw ConfigError("section '" + name + "' must be a mapping");
    } else if (!section) {
      cfg.set(name, scalar_text(kv.second, name));
    }
  }
  cfg.check();
  return cfg;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

void apply_overrides(CampaignConfig& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    cfg.set(o.substr(0, eq), o.substr(eq + 1));
  }
}

std::string format_entries(const CampaignConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace mrf
