#include "mister/aliasing.hpp"
#include "mister/numerics.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <set>

using namespace mister;

namespace {

Image ramp(int w, int h, double a, double b, double c) {
  Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(y, x) = c + a * x + b * y;
  return img;
}

}  // namespace

TEST(UnionGroup, MatchesIndependentUnion) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const Image lp = oracle::random_image(rng, 14, 12, trial % 2 ? 3 : 256);
    const Origin t{trial % 5, (3 * trial) % 7};
    const PatchGroup g = build_union_group(lp, t, 4, 5, 7);

    std::vector<Origin> expect;
    std::set<Origin> seen;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Origin o{t.row + dy, t.col + dx};
        if (o.row < 0 || o.col < 0 || o.row + 4 > 12 || o.col + 4 > 14) continue;
        for (const auto& r : oracle::brute_rank(lp, o, 4, 7, false, std::nullopt, 5, 1))
          if (seen.insert(r.origin).second) expect.push_back(r.origin);
      }
    EXPECT_EQ(g.origins, expect) << trial;
    ASSERT_EQ(g.rows.rows(), static_cast<Eigen::Index>(expect.size()));
    for (std::size_t k = 0; k < expect.size(); ++k) {
      EXPECT_EQ(g.rows.row(k).transpose(), patch_values(lp, expect[k], 4));
    }
  }
}

TEST(UnionGroup, CornerTargetDropsOutsideNeighbours) {
  const Image lp = Image::Constant(6, 6, 1.0);
  const PatchGroup g = build_union_group(lp, {0, 0}, 3, 2, 3);
  std::set<Origin> unique(g.origins.begin(), g.origins.end());
  EXPECT_EQ(unique.size(), g.origins.size());
  EXPECT_EQ(g.origins.front(), (Origin{0, 0}));
  EXPECT_THROW(build_union_group(lp, {4, 4}, 3, 2, 3), Error);
}

TEST(Svar, ConstantImageIsFixed) {
  const SvarConfig cfg{4, 4, 7, 5, 0.9, 2, 1, 1, false};
  const Image c = Image::Constant(12, 12, 77.0);
  EXPECT_LT((svar_iterate(c, cfg).array() - 77.0).abs().maxCoeff(), 1e-9);
  const Image ar = aliasing_removed_image(c, cfg, 2);
  EXPECT_EQ(ar.rows(), 24);
  EXPECT_LT((ar.array() - 77.0).abs().maxCoeff(), 1e-9);
}

TEST(Svar, LowRankImageIsFixed) {
  // Every patch of a linear ramp is a constant offset of its neighbours, so the
  // centred groups have rank one and projection keeps them intact.
  const Image r = ramp(16, 14, 2.5, -1.25, 90.0);
  for (int k : {1, 3}) {
    const SvarConfig cfg{4, 6, 9, 5, 0.9, k, 1, 1, false};
    EXPECT_LT((svar_iterate(r, cfg) - r).cwiseAbs().maxCoeff(), 1e-8) << k;
  }
}

TEST(Svar, ProjectionDoesNotAddEnergy) {
  // With step equal to the side the patches tile disjointly, so each output
  // patch is an orthogonal projection around its group mean.
  std::mt19937 rng(8);
  const SvarConfig cfg{4, 6, 9, 5, 0.9, 2, 1, 4, false};
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = oracle::random_image(rng, 16, 16);
    const Image out = svar_iterate(img, cfg);
    for (int y = 0; y < 16; y += 4)
      for (int x = 0; x < 16; x += 4) {
        const PatchGroup g = build_union_group(img, {y, x}, 4, 6, 9);
        const Eigen::RowVectorXd mean = g.rows.colwise().mean();
        const double before = (patch_values(img, {y, x}, 4) - mean.transpose()).norm();
        const double after = (patch_values(out, {y, x}, 4) - mean.transpose()).norm();
        EXPECT_LE(after, before + 1e-9);
      }
  }
}

TEST(Svar, RejectsBadConfig) {
  const Image c = Image::Constant(8, 8, 1.0);
  SvarConfig cfg{4, 4, 8, 5, 0.9, 2, 1, 1, false};
  EXPECT_THROW(svar_iterate(c, cfg), Error);
  cfg.window = 7;
  cfg.components = 17;
  EXPECT_THROW(svar_iterate(c, cfg), Error);
  cfg.components = 2;
  cfg.side = 9;
  EXPECT_THROW(svar_iterate(c, cfg), Error);
}

TEST(Svar, ThreadCountDoesNotMatter) {
  std::mt19937 rng(12);
  const Image img = oracle::random_image(rng, 20, 18);
  const SvarConfig cfg{4, 5, 9, 5, 0.9, 2, 1, 1, false};
  EXPECT_EQ(svar_iterate(img, cfg, 1), svar_iterate(img, cfg, 3));
}

TEST(Guide, AlternatesRunnerAndBlur) {
  const Image lr = Image::Constant(8, 8, 10.0);
  const Image ar = Image::Constant(16, 16, 3.0);
  GuideConfig cfg;
  cfg.passes = 3;
  int calls = 0;
  const Stage1Runner runner = [&](const Image& l, const Image& g) {
    EXPECT_EQ(&l, &lr);
    EXPECT_EQ(g.rows(), 16);
    ++calls;
    return Image(g.array() + 1.0);
  };
  const Image guide = guide_from_ar(lr, ar, cfg, runner);
  EXPECT_EQ(calls, 3);
  EXPECT_LT((guide.array() - 6.0).abs().maxCoeff(), 1e-9);
  cfg.passes = 0;
  EXPECT_EQ(guide_from_ar(lr, ar, cfg, runner), ar);
  EXPECT_THROW(guide_from_ar(lr, ar, cfg, Stage1Runner{}), Error);
}
