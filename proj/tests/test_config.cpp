#include "mister/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace mister;

namespace {

std::string error_of(const std::string& text, std::optional<int> factor = std::nullopt) {
  try {
    parse_config(text, factor);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_config(""), default_config(2));
  EXPECT_EQ(parse_config("# only a comment\n\n"), default_config(2));
  EXPECT_EQ(parse_config("factor = 3"), default_config(3));
  EXPECT_EQ(parse_config("", 3), default_config(3));
}

TEST(Config, DefaultsSatisfyInvariants) {
  for (int s : {2, 3}) {
    const PipelineConfig c = default_config(s);
    EXPECT_NO_THROW(validate(c));
    EXPECT_EQ(c.stage1.side_a % s, 0);
    EXPECT_EQ(c.stage1.side_b % s, 0);
    EXPECT_EQ(c.stage2.side % s, 0);
    EXPECT_EQ(c.stage3.side_a % s, 0);
    EXPECT_EQ(c.stage3.side_b % s, 0);
  }
  EXPECT_THROW(default_config(4), Error);
}

TEST(Config, FactorOverrideWins) {
  const PipelineConfig c = parse_config("factor = 2\n", 3);
  EXPECT_EQ(c.factor, 3);
  EXPECT_EQ(c.stage1.side_a, default_config(3).stage1.side_a);
}

TEST(Config, OverridesSingleKeys) {
  const PipelineConfig c = parse_config("stage1.lambda_a = 0.3  # trailing comment\nstage3.keep = intra_patch\n"
                                        "stage4.threshold_mode = single\nguide_mode = ec3\nthreads=4\n");
  EXPECT_EQ(c.stage1.lambda_a, 0.3);
  EXPECT_EQ(c.stage3.keep, KeepMask::intra_patch);
  EXPECT_EQ(c.stage4.mode, ThresholdMode::single);
  EXPECT_EQ(c.guide_mode, GuideMode::ec3);
  EXPECT_EQ(c.threads, 4);
  PipelineConfig expect = default_config(2);
  expect.stage1.lambda_a = 0.3;
  expect.stage3.keep = KeepMask::intra_patch;
  expect.stage4.mode = ThresholdMode::single;
  expect.guide_mode = GuideMode::ec3;
  expect.threads = 4;
  EXPECT_EQ(c, expect);
}

TEST(Config, InvariantViolationsNameTheKey) {
  EXPECT_NE(error_of("stage1.w_a = 20").find("stage1.w_a: window side must be odd"), std::string::npos);
  EXPECT_NE(error_of("stage2.n = 7").find("stage2.n: patch side must be even"), std::string::npos);
  EXPECT_NE(error_of("stage2.n = 8", 3).find("divisible by 3"), std::string::npos);
  EXPECT_NE(error_of("stage1.step = 3").find("stage1.step"), std::string::npos);
  EXPECT_NE(error_of("factor = 4").find("factor must be 2 or 3"), std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  EXPECT_EQ(error_of("\nstage1.k = 10\nstage9.k = 1\n"), "config line 3: unknown key 'stage9.k'");
  EXPECT_EQ(error_of("stage1.k = ten"), "config line 1: stage1.k: expected an integer, got 'ten'");
  EXPECT_EQ(error_of("stage1.k=4\nstage1.k=5"), "config line 2: stage1.k: duplicate key (first set on line 1)");
  EXPECT_EQ(error_of("stage1.k"), "config line 1: expected 'key = value'");
  EXPECT_EQ(error_of("stage1.lambda_a = 0.1x"), "config line 1: stage1.lambda_a: expected a number, got '0.1x'");
  EXPECT_NE(error_of("guide_mode = ec9").find("config line 1: guide_mode"), std::string::npos);
  EXPECT_NE(error_of("stage3.keep = all").find("intra_patch or measured"), std::string::npos);
}

TEST(Config, FormatRoundTrips) {
  for (int s : {2, 3}) {
    PipelineConfig c = default_config(s);
    c.stage1.lambda_a = 0.1 + 0.2;  // not representable in short decimal form
    c.guide.svar.lpf_every_iteration = true;
    c.guide_mode = GuideMode::ec4;
    const std::string text = format_config(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(format_config(parse_config(text)), text);
  }
  const auto keys = config_keys();
  const std::string text = format_config(default_config(2));
  std::size_t lines = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(lines, keys.size());
  EXPECT_EQ(text.rfind(keys.front() + " = ", 0), 0u);
}

TEST(Config, LoadFromFile) {
  const auto p = std::filesystem::temp_directory_path() / "mister_cfg_test.conf";
  {
    std::ofstream f(p);
    f << "stage2.iterations = 1\n";
  }
  EXPECT_EQ(load_config(p.string()).stage2.iterations, 1);
  EXPECT_THROW(load_config("/nonexistent/x.conf"), Error);
}
