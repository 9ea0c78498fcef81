#include "mister/aliasing.hpp"

#include "mister/numerics.hpp"
#include "mister/search.hpp"

#include <array>
#include <set>
#include <thread>

namespace mister {

namespace {

std::array<Origin, 9> neighbourhood(Origin o) {
  std::array<Origin, 9> out;
  int k = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) out[k++] = {o.row + dy, o.col + dx};
  return out;
}

// Concatenates best-first lists, keeping the first occurrence of each origin.
PatchGroup union_of(const Image& lp, int side, const std::vector<const SimilarityList*>& lists) {
  std::set<Origin> seen;
  std::vector<Origin> origins;
  for (const SimilarityList* list : lists)
    for (const SimilarEntry& e : list->entries)
      if (seen.insert(e.origin).second) origins.push_back(e.origin);
  PatchGroup group{side, Eigen::MatrixXd(origins.size(), side * side), origins};
  for (std::size_t k = 0; k < origins.size(); ++k) group.rows.row(k) = patch_values(lp, origins[k], side).transpose();
  return group;
}

void require_svar(const Image& img, const SvarConfig& cfg) {
  if (cfg.window < 1 || cfg.window % 2 == 0) throw Error("svar: window side must be odd");
  if (cfg.side < 1 || cfg.count < 1 || cfg.iterations < 0 || cfg.step < 1) {
    throw Error("svar: side, count and step must be positive");
  }
  if (cfg.components < 1 || cfg.components > cfg.side * cfg.side) {
    throw Error("svar: number of components must lie in [1, side^2]");
  }
  if (cfg.side > width(img) || cfg.side > height(img)) throw Error("svar: patch side exceeds the LR image");
}

}  // namespace

PatchGroup build_union_group(const Image& lp, Origin target, int side, int count, int window) {
  if (!patch_fits(target, side, width(lp), height(lp))) throw Error("union group: target outside the image");
  std::vector<SimilarityList> lists;
  for (const Origin& o : neighbourhood(target)) {
    if (!patch_fits(o, side, width(lp), height(lp))) continue;
    lists.push_back(search_similar(lp, o, side, window, Metric::exp_l1(1.0), std::nullopt, count));
  }
  std::vector<const SimilarityList*> refs;
  for (const auto& l : lists) refs.push_back(&l);
  return union_of(lp, side, refs);
}

Image svar_iterate(const Image& lp, const SvarConfig& cfg, int threads) {
  require_valid(lp, "svar_iterate");
  require_svar(lp, cfg);
  const int w = width(lp), h = height(lp), n = cfg.side;
  const int cols = w - n + 1;

  // Every origin may be a neighbour of some target, so search them all.
  const auto all = tile_origins(w, h, n, 1);
  const SearchSpec spec{n, cfg.window, Metric::exp_l1(1.0), static_cast<std::size_t>(cfg.count), 1, false};
  const SearchResult lists = search_batch(lp, all, spec, threads);

  const auto targets = tile_origins(w, h, n, cfg.step);
  std::vector<Eigen::VectorXd> out(targets.size());
  auto work = [&](std::size_t i) {
    std::vector<const SimilarityList*> group_lists;
    for (const Origin& o : neighbourhood(targets[i])) {
      if (!patch_fits(o, n, w, h)) continue;
      group_lists.push_back(&lists[static_cast<std::size_t>(o.row) * cols + o.col][0]);
    }
    const PatchGroup group = union_of(lp, n, group_lists);
    const Eigen::RowVectorXd mean = group.rows.colwise().mean();
    const Eigen::MatrixXd centred = group.rows.rowwise() - mean;
    const Eigen::VectorXd y = patch_values(lp, targets[i], n) - mean.transpose();
    const Eigen::MatrixXd axes = principal_axes(centred, cfg.components);
    Eigen::VectorXd p = mean.transpose();
    if (axes.cols() > 0) p += project_topk(y, axes, axes.cols());
    out[i] = std::move(p);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < targets.size(); i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  PatchAccumulator acc(w, h);
  for (std::size_t i = 0; i < targets.size(); ++i) acc.add(targets[i], n, out[i]);
  return acc.average();
}

Image aliasing_removed_image(const Image& lr, const SvarConfig& cfg, int factor, int threads) {
  require_valid(lr, "aliasing_removed_image");
  Image lp = gaussian_lowpass(lr, cfg.lpf_side, cfg.lpf_sigma);
  for (int it = 1; it <= cfg.iterations; ++it) {
    if (it > 1 && cfg.lpf_every_iteration) lp = gaussian_lowpass(lp, cfg.lpf_side, cfg.lpf_sigma);
    lp = svar_iterate(lp, cfg, threads);
  }
  return bicubic_interpolate(lp, factor);
}

Image guide_from_ar(const Image& lr, const Image& ar, const GuideConfig& cfg, const Stage1Runner& stage1) {
  if (!stage1) throw Error("guide_image: no stage runner supplied");
  if (cfg.passes < 0) throw Error("guide_image: negative pass count");
  Image guide = ar;
  for (int p = 0; p < cfg.passes; ++p) {
    guide = gaussian_lowpass(stage1(lr, guide), cfg.blur_side, cfg.blur_sigma);
  }
  return guide;
}

Image guide_image(const Image& lr, const GuideConfig& cfg, int factor, const Stage1Runner& stage1, int threads) {
  return guide_from_ar(lr, aliasing_removed_image(lr, cfg.svar, factor, threads), cfg, stage1);
}

}  // namespace mister
