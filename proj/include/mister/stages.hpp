#pragma once

#include "mister/image.hpp"
#include "mister/numerics.hpp"

#include <functional>

namespace mister {

/// Stage 1: phase-wise reconstruction from measured pixels with weights fitted
/// on the measurement-phase pixels of the guide. Iteration 1 uses the *_a
/// parameters, later iterations the *_b ones.
struct Stage1Config {
  int side_a = 16;
  int side_b = 8;
  int count = 10;
  int window_a = 31;
  int window_b = 21;
  double lambda_a = 0.15;
  double lambda_b = 0.10;
  double decay_scale = 10.0;  // c_w = decay_scale * n^2
  int iterations = 3;
  int step = 2;  // target stride, a multiple of the factor

  bool operator==(const Stage1Config&) const = default;
};

/// Stage 2: as Stage 1 but weights are fitted on every pixel of the patch.
struct Stage2Config {
  int side = 8;
  int count = 10;
  int window = 21;
  double lambda = 0.05;
  double decay_scale = 10.0;
  int iterations = 2;
  int step = 2;

  bool operator==(const Stage2Config&) const = default;
};

/// Which pixels of a Stage 3 target are kept verbatim.
enum class KeepMask {
  intra_patch,  // the patch's own (0,0) phase, whatever the origin
  measured,     // the pixels that sit on the measurement grid
};

/// Stage 3: every-phase targets reconstructed from cosine-similar patches of
/// the mean-removed image.
struct Stage3Config {
  int side_a = 8;
  int side_b = 6;
  int count = 12;
  int window_a = 21;
  int window_b = 21;
  double lambda_a = 0.05;
  double lambda_b = 0.02;
  int iterations_a = 2;
  int iterations_b = 2;
  int step = 1;
  double similarity_floor = 1e-3;
  KeepMask keep = KeepMask::measured;

  bool operator==(const Stage3Config&) const = default;
};

/// Stage 4: low-rank refinement of similar-patch groups (factor 2 only).
struct Stage4Config {
  int side_a = 8;
  int side_b = 6;
  int count = 16;
  int window = 21;
  double alpha_a = 10.0;  // on the [0,255] scale
  double alpha_b = 7.0;
  double threshold_a = 20.0;  // variance gate on the [0,255]^2 scale
  double threshold_b = 10.0;
  double eps = 1e-6;
  int iterations_a = 1;
  int iterations_b = 1;
  double decay_scale = 10.0;
  int step = 1;
  ThresholdMode mode = ThresholdMode::squared;

  bool operator==(const Stage4Config&) const = default;
};

/// Called with the 1-based iteration index and the image it produced.
using IterationObserver = std::function<void(int, const Image&)>;

/// Effective ridge strength: lambda scaled by the mean diagonal of Q^T Q so
/// the penalty does not depend on patch size or intensity scale.
double scaled_lambda(double lambda, const Eigen::Ref<const Eigen::MatrixXd>& Q);

/// HR-sized output that agrees with lr on the measurement grid. The guide is
/// used for search and weights in iteration 1, after which each iteration's
/// output becomes the guide. If weight_guide is given, iteration 1 fits its
/// weights on it instead (the search still runs on guide).
Image stage1(const Image& lr, const Image& guide, const Stage1Config& cfg, int factor, int threads = 1,
             const Image* weight_guide = nullptr, const IterationObserver& observer = {});

Image stage2(const Image& s1, const Stage2Config& cfg, int factor, int threads = 1);

Image stage3(const Image& s2, const Stage3Config& cfg, int factor, int threads = 1);

/// Throws for any factor other than 2.
Image stage4(const Image& s3, const Image& lr, const Stage4Config& cfg, int factor, int threads = 1);

/// Population variance of a patch.
double patch_variance(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace mister
