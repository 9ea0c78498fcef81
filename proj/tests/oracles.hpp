#pragma once

#include "mister/patch.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace mister::oracle {

inline Image random_image(std::mt19937& rng, int w, int h, int levels = 256) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  Image img(h, w);
  for (int i = 0; i < img.size(); ++i) img.data()[i] = u(rng);
  return img;
}

struct Ranked {
  Origin origin;
  double l1 = 0.0;
};

// Exhaustive windowed ranking written without CandidateRank or the search
// module: score descending, then squared distance, then scan order.
inline std::vector<Ranked> brute_rank(const Image& g, Origin t, int n, int win, bool cosine,
                                      std::optional<Phase> filter, std::size_t k, int s) {
  struct C {
    double key;
    int d2;
    Ranked r;
  };
  std::vector<C> all;
  const Eigen::VectorXd ref = patch_values(g, t, n);
  for (int y = 0; y + n <= height(g); ++y)
    for (int x = 0; x + n <= width(g); ++x) {
      const int dy = y - t.row, dx = x - t.col;
      if (std::abs(dy) > win / 2 || std::abs(dx) > win / 2) continue;
      const bool self = dy == 0 && dx == 0;
      if (filter && (self || y % s != filter->row || x % s != filter->col)) continue;
      const Eigen::VectorXd p = patch_values(g, {y, x}, n);
      const double l1 = (ref - p).cwiseAbs().sum();
      double key;
      if (self) {
        key = 1e300;
      } else if (cosine) {
        key = ref.dot(p) / (ref.norm() * p.norm());
      } else {
        key = -l1;
      }
      all.push_back({key, dy * dy + dx * dx, {{y, x}, l1}});
    }
  std::stable_sort(all.begin(), all.end(), [](const C& a, const C& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.d2 < b.d2;
  });
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].r);
  return out;
}

inline std::vector<Origin> origins_of(const std::vector<Ranked>& r) {
  std::vector<Origin> out;
  for (const auto& e : r) out.push_back(e.origin);
  return out;
}

}  // namespace mister::oracle
