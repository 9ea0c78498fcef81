#include "mister/stages.hpp"

#include "mister/patch.hpp"
#include "mister/search.hpp"

#include <thread>

namespace mister {

namespace {

constexpr std::size_t kBlock = 2048;

// Computes results for [0, count) in blocks, in parallel within a block, and
// hands them to consume() strictly in index order so accumulation never
// depends on the schedule.
template <typename Result, typename Compute, typename Consume>
void blocked(std::size_t count, int threads, Compute&& compute, Consume&& consume) {
  std::vector<Result> buffer;
  for (std::size_t begin = 0; begin < count; begin += kBlock) {
    const std::size_t end = std::min(count, begin + kBlock);
    buffer.assign(end - begin, Result{});
    if (threads <= 1) {
      for (std::size_t i = begin; i < end; ++i) buffer[i - begin] = compute(i);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = begin + t; i < end; i += threads) buffer[i - begin] = compute(i);
        });
      }
      for (auto& th : pool) th.join();
    }
    for (std::size_t i = begin; i < end; ++i) consume(i, buffer[i - begin]);
  }
}

void require_factor(int factor, const char* where) {
  if (factor != 2 && factor != 3) {
    throw Error(std::string(where) + ": factor must be 2 or 3, got " + std::to_string(factor));
  }
}

void require_hr(const Image& img, int w, int h, const char* where) {
  if (width(img) != w || height(img) != h) {
    throw Error(std::string(where) + ": expected a " + std::to_string(w) + "x" + std::to_string(h) + " image, got " +
                std::to_string(width(img)) + "x" + std::to_string(height(img)));
  }
}

void require_side(int side, int factor, int w, int h, const char* where) {
  if (side < factor || side % factor != 0) {
    throw Error(std::string(where) + ": patch side " + std::to_string(side) + " must be a positive multiple of " +
                std::to_string(factor));
  }
  if (side > w || side > h) throw Error(std::string(where) + ": patch side exceeds the image");
}

Eigen::MatrixXd gather(const Image& img, const SimilarityList& list, int side, const PhaseMask* compact) {
  const Eigen::Index rows = compact ? static_cast<Eigen::Index>(compact->indices().size()) : side * side;
  Eigen::MatrixXd q(rows, list.size());
  for (std::size_t j = 0; j < list.size(); ++j) {
    const Eigen::VectorXd v = patch_values(img, list.entries[j].origin, side);
    q.col(j) = compact ? compact->compact(v) : v;
  }
  return q;
}

// Masks that pick, inside a patch with (0,0)-phase origin, the pixels that
// are measured in a similar patch of each origin phase.
std::vector<PhaseMask> candidate_masks(int side, int factor) {
  std::vector<PhaseMask> masks;
  for (int f = 0; f < factor * factor; ++f) {
    masks.push_back(PhaseMask::select(side, measured_intra_phase(Phase::from_index(f, factor), factor), factor));
  }
  return masks;
}

// Weights fitted on mean-removed columns; the estimate is rebuilt around the
// target mean so a constant neighbourhood is reproduced exactly.
struct AffineFit {
  Eigen::RowVectorXd means;
  Eigen::VectorXd weights;
  double target_mean = 0.0;

  Eigen::VectorXd apply(const Eigen::MatrixXd& basis) const {
    return ((basis.rowwise() - means) * weights).array() + target_mean;
  }
};

AffineFit fit_affine(const Eigen::MatrixXd& q, const Eigen::VectorXd& target, double lambda,
                     const Eigen::VectorXd& penalty) {
  AffineFit f;
  f.means = q.colwise().mean();
  f.target_mean = target.mean();
  const Eigen::MatrixXd qc = q.rowwise() - f.means;
  f.weights = ridge_solve(qc, Eigen::VectorXd(target.array() - f.target_mean), scaled_lambda(lambda, qc), penalty).weights;
  return f;
}

}  // namespace

double scaled_lambda(double lambda, const Eigen::Ref<const Eigen::MatrixXd>& Q) {
  if (Q.cols() == 0) return lambda;
  return lambda * Q.squaredNorm() / static_cast<double>(Q.cols());
}

double patch_variance(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const double mean = values.mean();
  return (values.array() - mean).square().mean();
}

Image stage1(const Image& lr, const Image& guide_in, const Stage1Config& cfg, int factor, int threads,
             const Image* weight_guide, const IterationObserver& observer) {
  require_factor(factor, "stage1");
  require_valid(lr, "stage1");
  const int s = factor, h = s * height(lr), w = s * width(lr);
  require_hr(guide_in, w, h, "stage1 guide");
  if (weight_guide) require_hr(*weight_guide, w, h, "stage1 weight guide");
  if (cfg.step < 1 || cfg.step % s != 0) throw Error("stage1: target step must be a multiple of the factor");
  if (cfg.iterations < 1) throw Error("stage1: at least one iteration is required");

  const Image zero = upsample_zero_fill(lr, s);
  Image guide = guide_in;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const bool first = it == 1;
    const int n = first ? cfg.side_a : cfg.side_b;
    const int win = first ? cfg.window_a : cfg.window_b;
    const double lambda = first ? cfg.lambda_a : cfg.lambda_b;
    require_side(n, s, w, h, "stage1");

    const auto targets = tile_origins(w, h, n, cfg.step);
    const SearchSpec spec{n, win, Metric::exp_l1(cfg.decay_scale * n * n), static_cast<std::size_t>(cfg.count), s,
                          true};
    const SearchResult lists = search_batch(guide, targets, spec, threads);
    const Image& wg = first && weight_guide ? *weight_guide : guide;
    const PhaseMask measured = PhaseMask::select(n, kOO, s);
    const auto masks = candidate_masks(n, s);

    PatchAccumulator acc(w, h);
    blocked<Eigen::VectorXd>(
        targets.size(), threads,
        [&](std::size_t i) {
          const Origin o = targets[i];
          const Eigen::VectorXd target = measured.compact(patch_values(wg, o, n));
          Eigen::VectorXd out = measured.apply(patch_values(zero, o, n));
          for (int f = 1; f < s * s; ++f) {
            const SimilarityList& list = lists[i][f];
            if (list.empty()) {
              out += masks[f].apply(patch_values(guide, o, n));
              continue;
            }
            const AffineFit fit = fit_affine(gather(wg, list, n, &measured), target, lambda, penalty_matrix(list));
            out += masks[f].apply(fit.apply(gather(zero, list, n, nullptr)));
          }
          return out;
        },
        [&](std::size_t i, const Eigen::VectorXd& v) { acc.add(targets[i], n, v); });
    guide = acc.average();
    if (observer) observer(it, guide);
  }
  return guide;
}

Image stage2(const Image& s1, const Stage2Config& cfg, int factor, int threads) {
  require_factor(factor, "stage2");
  require_valid(s1, "stage2");
  const int s = factor, h = height(s1), w = width(s1), n = cfg.side;
  if (h % s != 0 || w % s != 0) throw Error("stage2: image size must be a multiple of the factor");
  if (cfg.step < 1 || cfg.step % s != 0) throw Error("stage2: target step must be a multiple of the factor");
  require_side(n, s, w, h, "stage2");

  const auto targets = tile_origins(w, h, n, cfg.step);
  const SearchSpec spec{n, cfg.window, Metric::exp_l1(cfg.decay_scale * n * n), static_cast<std::size_t>(cfg.count),
                        s, true};
  const PhaseMask measured = PhaseMask::select(n, kOO, s);
  const auto masks = candidate_masks(n, s);

  Image guide = s1;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const SearchResult lists = search_batch(guide, targets, spec, threads);
    PatchAccumulator acc(w, h);
    blocked<Eigen::VectorXd>(
        targets.size(), threads,
        [&](std::size_t i) {
          const Origin o = targets[i];
          const Eigen::VectorXd target = patch_values(guide, o, n);
          Eigen::VectorXd out = measured.apply(target);
          for (int f = 1; f < s * s; ++f) {
            const SimilarityList& list = lists[i][f];
            if (list.empty()) {
              out += masks[f].apply(target);
              continue;
            }
            const Eigen::MatrixXd q = gather(guide, list, n, nullptr);
            out += masks[f].apply(fit_affine(q, target, cfg.lambda, penalty_matrix(list)).apply(q));
          }
          return out;
        },
        [&](std::size_t i, const Eigen::VectorXd& v) { acc.add(targets[i], n, v); });
    guide = acc.average();
  }
  return guide;
}

Image stage3(const Image& s2, const Stage3Config& cfg, int factor, int threads) {
  require_factor(factor, "stage3");
  require_valid(s2, "stage3");
  const int s = factor, h = height(s2), w = width(s2);
  if (cfg.step < 1) throw Error("stage3: target step must be positive");

  const double c = measured_mean(s2, s);
  Image guide = s2.array() - c;
  for (int it = 1; it <= cfg.iterations_a + cfg.iterations_b; ++it) {
    const bool early = it <= cfg.iterations_a;
    const int n = early ? cfg.side_a : cfg.side_b;
    const int win = early ? cfg.window_a : cfg.window_b;
    const double lambda = early ? cfg.lambda_a : cfg.lambda_b;
    if (n < 1 || n > w || n > h) throw Error("stage3: patch side out of range");

    const auto targets = tile_origins(w, h, n, cfg.step);
    const SearchSpec spec{n, win, Metric::cosine(), static_cast<std::size_t>(cfg.count), s, false};
    const SearchResult lists = search_batch(guide, targets, spec, threads);

    std::vector<PhaseMask> keep;
    for (int p = 0; p < s * s; ++p) {
      const Phase origin_phase = Phase::from_index(p, s);
      keep.push_back(PhaseMask::select(
          n, cfg.keep == KeepMask::measured ? measured_intra_phase(origin_phase, s) : kOO, s));
    }

    PatchAccumulator acc(w, h);
    blocked<Eigen::VectorXd>(
        targets.size(), threads,
        [&](std::size_t i) {
          const Origin o = targets[i];
          const Eigen::VectorXd target = patch_values(guide, o, n);
          const SimilarityList& list = lists[i][0];
          if (list.empty()) return target;
          const Eigen::MatrixXd q = gather(guide, list, n, nullptr);
          const Eigen::VectorXd est =
              fit_affine(q, target, lambda, penalty_matrix(list, cfg.similarity_floor)).apply(q);
          const PhaseMask& m = keep[classify_phase(o, s).index(s)];
          return Eigen::VectorXd(m.apply(target) + est - m.apply(est));
        },
        [&](std::size_t i, const Eigen::VectorXd& v) { acc.add(targets[i], n, v); });
    guide = acc.average();
  }
  return guide.array() + c;
}

Image stage4(const Image& s3, const Image& lr, const Stage4Config& cfg, int factor, int threads) {
  if (factor != 2) throw Error("stage4 is defined for factor 2 only");
  require_valid(s3, "stage4");
  const int s = factor, h = s * height(lr), w = s * width(lr);
  require_hr(s3, w, h, "stage4");
  if (cfg.step < 1) throw Error("stage4: target step must be positive");

  Image guide = s3;
  for (int it = 1; it <= cfg.iterations_a + cfg.iterations_b; ++it) {
    const bool early = it <= cfg.iterations_a;
    const int n = early ? cfg.side_a : cfg.side_b;
    const double alpha = early ? cfg.alpha_a : cfg.alpha_b;
    const double gate = early ? cfg.threshold_a : cfg.threshold_b;
    if (n < 1 || n > w || n > h) throw Error("stage4: patch side out of range");

    const auto targets = tile_origins(w, h, n, cfg.step);
    const SearchSpec spec{n, cfg.window, Metric::exp_l1(cfg.decay_scale * n * n),
                          static_cast<std::size_t>(cfg.count), s, false};
    const SearchResult lists = search_batch(guide, targets, spec, threads);

    PatchAccumulator acc(w, h);
    blocked<Eigen::MatrixXd>(
        targets.size(), threads,
        [&](std::size_t i) {
          const SimilarityList& list = lists[i][0];
          Eigen::MatrixXd x(list.size(), n * n);
          for (std::size_t k = 0; k < list.size(); ++k) {
            x.row(k) = patch_values(guide, list.entries[k].origin, n).transpose();
          }
          const Eigen::RowVectorXd mean = x.colwise().mean();
          Eigen::MatrixXd centred = x.rowwise() - mean;
          if (patch_variance(x.row(0).transpose()) > gate) {
            centred = wnnm_shrink(centred, alpha, cfg.eps, cfg.mode).X;
          }
          return Eigen::MatrixXd(centred.rowwise() + mean);
        },
        [&](std::size_t i, const Eigen::MatrixXd& group) {
          const SimilarityList& list = lists[i][0];
          for (std::size_t k = 0; k < list.size(); ++k) {
            acc.add(list.entries[k].origin, n, group.row(k).transpose());
          }
        });
    guide = acc.average();
    enforce_measurements(guide, lr, s);
  }
  return guide;
}

}  // namespace mister
