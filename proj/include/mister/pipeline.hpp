#pragma once

#include "mister/aliasing.hpp"
#include "mister/stages.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mister {

/// Source of the Stage 1 guide. mister is the full blurred-reinterpolation
/// scheme; the others are the controlled variants.
enum class GuideMode {
  mister,
  ec1,  // bicubic of the LR image
  ec2,  // mister guide for search, bicubic for the first-iteration weights
  ec3,  // bicubic of the low-passed LR image
  ec4,  // raw SVAR image
};

GuideMode parse_guide_mode(const std::string& name);
std::string guide_mode_name(GuideMode mode);

struct PipelineConfig {
  int factor = 2;
  GuideMode guide_mode = GuideMode::mister;
  GuideConfig guide;
  int ec3_side = 7;
  double ec3_sigma = 1.0;
  Stage1Config stage1;
  Stage2Config stage2;
  Stage3Config stage3;
  Stage4Config stage4;
  int margin = 8;  // reflective padding at LR scale
  int threads = 1;
  bool dump_stages = false;

  bool operator==(const PipelineConfig&) const = default;
};

/// Tuned parameters for one factor. Patch sides are multiples of the factor.
PipelineConfig default_config(int factor);

/// Throws naming the first violated invariant.
void validate(const PipelineConfig& cfg);

struct StageImage {
  std::string name;  // ar, guide, s1a, s1, s2, s3, s4
  Image image;
};

struct Interpolation {
  Image output;
  std::vector<StageImage> stages;  // filled when cfg.dump_stages is set
  bool ran_stage4 = false;
};

/// Full pipeline on an LR image. The output is factor times the input on each
/// axis and matches the input on the measurement grid exactly.
Interpolation interpolate(const Image& lr, const PipelineConfig& cfg);

struct BenchmarkRow {
  std::string image;
  double bicubic_db = 0.0;
  double mister_db = 0.0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  BenchmarkRow average;
};

/// PSNR of bicubic and of the pipeline against every readable .pgm/.png in
/// the directory, in filename order. Unreadable files are reported on `warn`
/// and skipped.
BenchmarkTable benchmark(const std::filesystem::path& dir, const PipelineConfig& cfg, std::ostream* warn = nullptr);

/// Ground truth downsampled, interpolated both ways and scored.
BenchmarkRow score_image(const std::string& name, const Image& truth, const PipelineConfig& cfg);

/// "inf" for infinite values, fixed 4-digit decimals otherwise.
std::string format_db(double db);

/// Header image,bicubic_db,mister_db, one line per row, then the average.
std::string benchmark_csv(const BenchmarkTable& table);

}  // namespace mister
