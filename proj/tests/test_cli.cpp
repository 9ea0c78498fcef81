#include "mister/config.hpp"
#include "mister/image_io.hpp"
#include "mister/pipeline.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mister;
namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "guide.svar.n = 4\nguide.svar.k_ar = 4\nguide.svar.w = 7\nguide.passes = 1\n"
    "stage1.n_a = 6\nstage1.n_b = 6\nstage1.k = 4\nstage1.w_a = 9\nstage1.w_b = 7\nstage1.iterations = 2\n"
    "stage2.n = 6\nstage2.k = 4\nstage2.w = 7\nstage2.iterations = 1\n"
    "stage3.n_a = 6\nstage3.n_b = 6\nstage3.k = 4\nstage3.w_a = 7\nstage3.w_b = 7\n"
    "stage4.n_a = 4\nstage4.n_b = 2\nstage4.k = 5\nstage4.w = 7\nmargin = 3\n";

struct Outcome {
  int code;
  std::string out;
};

Outcome run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + MISTER_CLI_PATH + " " + args + " 2>&1";
  Outcome r{0, ""};
  FILE* pipe = popen(cmd.c_str(), "r");
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mister_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "small.conf").string();
    std::ofstream(config_) << kSmall;
    std::mt19937 rng(77);
    truth_ = oracle::random_image(rng, 36, 30);
    save_image(truth_, dir_ / "truth.pgm");
    save_image(downsample(truth_, 2), dir_ / "lr2.pgm");
    save_image(downsample(truth_, 3), dir_ / "lr3.pgm");
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string config_;
  Image truth_;
};

}  // namespace

TEST_F(Cli, InterpolateWritesScaledImage) {
  const Outcome r = run("interpolate --factor 2 --config " + config_ + " " + p("lr2.pgm") + " " + p("out.pgm"));
  ASSERT_EQ(r.code, 0) << r.out;
  const Image out = load_image(p("out.pgm"));
  EXPECT_EQ(out.rows(), 30);
  EXPECT_EQ(out.cols(), 36);
}

TEST_F(Cli, ReferencePrintsLibraryPsnr) {
  const Outcome r = run("interpolate --factor 3 --guide-mode ec1 --config " + config_ + " " + p("lr3.pgm") + " " +
                    p("out.png") + " --reference " + p("truth.pgm"));
  ASSERT_EQ(r.code, 0) << r.out;
  PipelineConfig cfg = parse_config(kSmall, 3);
  cfg.guide_mode = GuideMode::ec1;
  const Image lr = load_image(p("lr3.pgm"));
  const Image direct = interpolate(lr, cfg).output;
  EXPECT_EQ(load_image(p("out.png")), Image(direct.unaryExpr([](double v) { return double(quantize(v)); })));
  EXPECT_EQ(r.out, "psnr_db=" + format_db(psnr(direct, truth_)) + "\n");
}

TEST_F(Cli, DumpStagesWritesEveryIntermediate) {
  const Outcome r = run("interpolate --factor 2 --dump-stages --config " + config_ + " " + p("lr2.pgm") + " " +
                    p("cam.pgm"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* st : {"ar", "guide", "s1a", "s1", "s2", "s3", "s4"}) {
    EXPECT_TRUE(fs::exists(p(std::string("cam.") + st + ".pgm"))) << st;
  }
}

TEST_F(Cli, ThreadsDoNotChangeOutput) {
  ASSERT_EQ(run("interpolate --config " + config_ + " --threads 1 " + p("lr2.pgm") + " " + p("a.pgm")).code, 0);
  ASSERT_EQ(run("interpolate --config " + config_ + " --threads 3 " + p("lr2.pgm") + " " + p("b.pgm")).code, 0);
  EXPECT_EQ(slurp(p("a.pgm")), slurp(p("b.pgm")));
}

TEST_F(Cli, BenchmarkCsvIsDeterministicAndAveraged) {
  const fs::path bench = dir_ / "bench";
  fs::create_directories(bench);
  save_image(Image::Constant(24, 24, 100.0), bench / "a_flat.pgm");
  save_image(truth_, bench / "b_noise.pgm");
  std::ofstream(bench / "c_broken.pgm") << "not an image";
  const std::string cmd = "benchmark --config " + config_ + " " + bench.string() + " --csv ";
  const Outcome first = run(cmd + p("one.csv"));
  ASSERT_EQ(first.code, 0) << first.out;
  EXPECT_NE(first.out.find("c_broken.pgm"), std::string::npos);
  ASSERT_EQ(run(cmd + p("two.csv")).code, 0);
  const std::string csv = slurp(p("one.csv"));
  EXPECT_EQ(csv, slurp(p("two.csv")));

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "image,bicubic_db,mister_db");
  std::getline(lines, line);
  EXPECT_EQ(line, "a_flat,inf,inf");
  std::getline(lines, line);
  const auto c1 = line.find(','), c2 = line.rfind(',');
  EXPECT_EQ(line.substr(0, c1), "b_noise");
  const double bic = std::stod(line.substr(c1 + 1, c2 - c1 - 1)), mis = std::stod(line.substr(c2 + 1));
  const BenchmarkRow direct = score_image("b_noise", truth_, parse_config(kSmall));
  EXPECT_EQ(format_db(direct.bicubic_db), format_db(bic));
  EXPECT_EQ(format_db(direct.mister_db), format_db(mis));
  std::getline(lines, line);
  EXPECT_EQ(line, "average,inf,inf");
}

TEST_F(Cli, BenchmarkAverageOfFiniteRows) {
  const fs::path bench = dir_ / "bench2";
  fs::create_directories(bench);
  std::mt19937 rng(5);
  for (const char* name : {"x.pgm", "y.png"}) save_image(oracle::random_image(rng, 24, 18), bench / name);
  const Outcome r = run("benchmark --config " + config_ + " " + bench.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  double sum_b = 0, sum_m = 0, avg_b = 0, avg_m = 0;
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const double b = std::stod(line.substr(c1 + 1, c2 - c1 - 1)), m = std::stod(line.substr(c2 + 1));
    if (line.rfind("average", 0) == 0) {
      avg_b = b, avg_m = m;
    } else {
      sum_b += b, sum_m += m, ++rows;
    }
  }
  ASSERT_EQ(rows, 2);
  EXPECT_NEAR(avg_b, sum_b / rows, 1e-4);
  EXPECT_NEAR(avg_m, sum_m / rows, 1e-4);
}

TEST_F(Cli, EmptyDirectoryFails) {
  fs::create_directories(dir_ / "empty");
  const Outcome r = run("benchmark " + p("empty"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("error:"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitNonzero) {
  std::ofstream(p("bad.conf")) << "stage1.w_a = 20\n";
  const Outcome r = run("interpolate --config " + p("bad.conf") + " " + p("lr2.pgm") + " " + p("x.pgm"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("window side must be odd"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("x.pgm")));

  const Outcome missing = run("interpolate " + p("nope.pgm") + " " + p("x.pgm"));
  EXPECT_NE(missing.code, 0);
  EXPECT_NE(run("interpolate --factor 4 " + p("lr2.pgm") + " " + p("x.pgm")).code, 0);
  EXPECT_NE(run("interpolate --guide-mode ec7 " + p("lr2.pgm") + " " + p("x.pgm")).code, 0);
}

TEST_F(Cli, PrintConfigRoundTripsAndHonoursEnvironment) {
  const Outcome plain = run("--print-config --factor 3");
  ASSERT_EQ(plain.code, 0);
  EXPECT_EQ(parse_config(plain.out), default_config(3));
  EXPECT_EQ(plain.out, format_config(default_config(3)));

  const Outcome env = run("--print-config", "MISTER_CONFIG=" + config_);
  ASSERT_EQ(env.code, 0);
  EXPECT_EQ(parse_config(env.out), parse_config(kSmall));
}

TEST_F(Cli, DownsampleAndPsnr) {
  ASSERT_EQ(run("downsample --factor 3 " + p("truth.pgm") + " " + p("d.pgm")).code, 0);
  EXPECT_EQ(slurp(p("d.pgm")), slurp(p("lr3.pgm")));
  const Outcome r = run("psnr " + p("truth.pgm") + " " + p("truth.pgm"));
  EXPECT_EQ(r.out, "psnr_db=inf\n");
}
