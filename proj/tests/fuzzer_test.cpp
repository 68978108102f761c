#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "campaigns.hpp"
#include "core/assembler.hpp"
#include "core/errors.hpp"
#include "core/fuzzer.hpp"

namespace fs = std::filesystem;

namespace mrf {
namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("mrf-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  fs::path path() const { return path_; }

 private:
  fs::path path_;
};

TEST(Config, ParsesSectionsAndDefaults) {
  const CampaignConfig cfg = parse_config(
      "generator:\n  instruction_set: BASE+MEM\n  test_case_size: 12\n"
      "contract:\n  contract_execution_mode: [cond, bpas]\n"
      "machine:\n  reps: 7\n");
  EXPECT_EQ(cfg.generator.subset, InstructionSubset::kBaseMem);
  EXPECT_EQ(cfg.generator.test_case_size, 12u);
  EXPECT_EQ(cfg.contract.execution, ExecutionClause::kCondBpas);
  EXPECT_EQ(cfg.machine.reps, 7u);
  EXPECT_EQ(cfg.input, InputConfig{});
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("generator:\n  no_such_key: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("nonsense:\n  x: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("machine:\n  reps: -3\n"), ConfigError);
  EXPECT_THROW(parse_config("machine: [\n"), ConfigError);
  CampaignConfig cfg;
  EXPECT_THROW(cfg.set("speculation_window", "5"), ConfigError);  // ambiguous
  EXPECT_THROW(cfg.set("machine.branch_prediction", "maybe"), ConfigError);
}

TEST(Config, BareKeysAndPatchAlias) {
  CampaignConfig cfg;
  cfg.set("reps", "9");
  EXPECT_EQ(cfg.machine.reps, 9u);
  cfg.set("store_bypass", "true");
  cfg.set("enable_ssbp_patch", "true");
  EXPECT_FALSE(cfg.machine.store_bypass);
  apply_overrides(cfg, {"test_case_size=30", "input.pages=2"});
  EXPECT_EQ(cfg.generator.test_case_size, 30u);
  EXPECT_EQ(cfg.generator.pages, 2u);
}

TEST(Config, ModelWindowMustCoverMachineWindow) {
  CampaignConfig cfg;
  cfg.set("contract.speculation_window", "4");
  cfg.set("machine.speculation_window", "5");
  EXPECT_THROW(cfg.check(), ConfigError);
  EXPECT_THROW(fuzz_campaign(cfg), ConfigError);
  cfg.set("contract.speculation_window", "5");
  EXPECT_NO_THROW(cfg.check());
}

TEST(Config, EntriesRoundTrip) {
  CampaignConfig a = test::latency_window();
  CampaignConfig b;
  for (const auto& [k, v] : a.entries()) b.set(k, v);
  EXPECT_EQ(a, b);
}

TEST(Seeds, RoundSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 10000; ++r) seen.insert(round_seed(1, r));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(round_seed(1, 0), round_seed(2, 0));
}

TEST(Campaign, ZeroRoundsGivesEmptyReport) {
  CampaignConfig cfg;
  cfg.campaign.max_rounds = 0;
  cfg.campaign.output_dir = "";
  const auto rep = fuzz_campaign(cfg);
  EXPECT_EQ(rep.rounds_run, 0u);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_TRUE(rep.log.empty());
}

TEST(Campaign, SameSeedSameLog) {
  CampaignConfig cfg = test::branch_loads();
  cfg.campaign.max_rounds = 40;
  cfg.campaign.minimize = false;
  EXPECT_EQ(fuzz_campaign(cfg).log, fuzz_campaign(cfg).log);
}

TEST(Campaign, StopsOnFirstViolation) {
  CampaignConfig cfg = test::branch_loads();
  cfg.campaign.max_rounds = 200;
  cfg.campaign.stop_on_violation = true;
  std::vector<std::string> lines;
  const auto rep = fuzz_campaign(cfg, [&](const std::string& l) { lines.push_back(l); });
  EXPECT_TRUE(rep.stopped_on_violation);
  EXPECT_EQ(rep.violations, 1u);
  EXPECT_EQ(rep.violating_rounds.back().round + 1, rep.rounds_run);
  EXPECT_EQ(lines, rep.log);
}

class BundleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    CampaignConfig cfg = test::branch_loads();
    cfg.campaign.max_rounds = 200;
    cfg.campaign.stop_on_violation = true;
    cfg.campaign.output_dir = dir_->str();
    report_ = new CampaignReport(fuzz_campaign(cfg));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete dir_;
  }
  static std::string bundle() { return report_->bundles.at(0); }

  static TempDir* dir_;
  static CampaignReport* report_;
};
TempDir* BundleTest::dir_ = nullptr;
CampaignReport* BundleTest::report_ = nullptr;

TEST_F(BundleTest, LayoutOnDisk) {
  ASSERT_EQ(report_->bundles.size(), 1u);
  for (const char* f : {"testcase.tc", "report.txt", "htraces/traces.htrace", "minimized.tc", "fenced.tc"})
    EXPECT_TRUE(fs::exists(fs::path(bundle()) / f)) << f;
  EXPECT_TRUE(fs::exists(dir_->path() / "campaign.log"));
  EXPECT_TRUE(fs::exists(dir_->path() / "report.txt"));
}

TEST_F(BundleTest, ReadBackMatchesRound) {
  const Bundle b = read_bundle(bundle());
  const RoundResult& r = report_->violating_rounds.at(0);
  EXPECT_EQ(disassemble(b.test_case), disassemble(r.test_case));
  EXPECT_EQ(b.inputs, r.inputs);
  EXPECT_EQ(b.htraces, r.htraces);
  EXPECT_EQ(b.ctraces, r.ctraces);
  EXPECT_EQ(b.i, r.violation->i);
  EXPECT_EQ(b.j, r.violation->j);
}

TEST_F(BundleTest, ReproduceRecurs) {
  const auto res = reproduce(bundle());
  EXPECT_TRUE(res.recurs) << res.message;
  EXPECT_TRUE(res.stored_traces_match) << res.message;
}

TEST_F(BundleTest, DisablingTheCulpritRemovesTheViolation) {
  EXPECT_FALSE(reproduce(bundle(), {"branch_prediction=false"}).recurs);
}

TEST_F(BundleTest, TamperedTracesWarn) {
  TempDir copy;
  fs::copy(bundle(), copy.path(), fs::copy_options::recursive);
  const std::string traces = (copy.path() / "htraces/traces.htrace").string();
  auto ht = parse_htraces(read_text_file(traces));
  ht.at(0) ^= 1;
  write_text_file(traces, format_htraces(ht));
  const auto res = reproduce(copy.str());
  EXPECT_FALSE(res.stored_traces_match);
  EXPECT_NE(res.message.find("warning"), std::string::npos);
  EXPECT_TRUE(res.recurs);
}

TEST_F(BundleTest, MinimizeBundleWritesArtifacts) {
  TempDir copy;
  fs::copy(bundle(), copy.path(), fs::copy_options::recursive);
  fs::remove(copy.path() / "minimized.tc");
  const auto m = minimize_bundle(copy.str());
  EXPECT_TRUE(m.reproducible);
  EXPECT_TRUE(fs::exists(copy.path() / "minimized.tc"));
}

TEST_F(BundleTest, MalformedBundleIsAFormatError) {
  TempDir copy;
  fs::copy(bundle(), copy.path(), fs::copy_options::recursive);
  fs::remove(copy.path() / "testcase.tc");
  EXPECT_THROW(read_bundle(copy.str()), Error);
}

TEST(InputFormat, RoundTrip) {
  for (const Input& in : generate_inputs(20, 5, 77, 2)) EXPECT_EQ(parse_input(format_input(in)), in);
  EXPECT_THROW(parse_input("garbage"), FormatError);
}

}  // namespace
}  // namespace mrf
