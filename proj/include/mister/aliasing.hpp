#pragma once

#include "mister/patch.hpp"

#include <functional>

namespace mister {

/// Parameters of the spatially-variant aliasing removal, all at LR scale.
struct SvarConfig {
  int side = 8;
  int count = 8;  // K_ar, similar patches per neighbourhood position
  int window = 21;
  int lpf_side = 7;
  double lpf_sigma = 0.9;
  int components = 3;
  int iterations = 2;
  int step = 1;
  bool lpf_every_iteration = false;

  bool operator==(const SvarConfig&) const = default;
};

struct GuideConfig {
  SvarConfig svar;
  int blur_side = 5;
  double blur_sigma = 0.7;
  int passes = 2;  // interpolate-then-blur rounds after the SVAR image

  bool operator==(const GuideConfig&) const = default;
};

/// Runs Stage 1 on the LR image with the given HR guide.
using Stage1Runner = std::function<Image(const Image& lr, const Image& guide)>;

/// Union of the `count` most similar patches (l1 distance) of each origin in
/// the 3x3 neighbourhood of the target, deduplicated by origin. Neighbours
/// that would leave the image are dropped.
PatchGroup build_union_group(const Image& lp, Origin target, int side, int count, int window);

/// One pass of the projection of every patch onto the top principal axes of
/// its union group, followed by overlap averaging.
Image svar_iterate(const Image& lp, const SvarConfig& cfg, int threads = 1);

/// Low-pass, cfg.iterations SVAR passes, then bicubic to HR size.
Image aliasing_removed_image(const Image& lr, const SvarConfig& cfg, int factor, int threads = 1);

/// SVAR image refined by alternating Stage 1 and a blur. The input to the
/// first round is the SVAR image; each round's blurred output feeds the next.
Image guide_image(const Image& lr, const GuideConfig& cfg, int factor, const Stage1Runner& stage1,
                  int threads = 1);

/// Same, starting from a precomputed SVAR image.
Image guide_from_ar(const Image& lr, const Image& ar, const GuideConfig& cfg, const Stage1Runner& stage1);

}  // namespace mister
