#include "mister/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace mister {

std::vector<int> tile_positions(int extent, int side, int step) {
  if (step < 1) throw Error("tiling step must be positive");
  if (side > extent) throw Error("patch side " + std::to_string(side) + " exceeds image extent " + std::to_string(extent));
  std::vector<int> pos;
  for (int p = 0; p + side <= extent; p += step) pos.push_back(p);
  if (pos.back() != extent - side) pos.push_back(extent - side);
  return pos;
}

std::vector<Origin> tile_origins(int w, int h, int side, int step) {
  const auto rows = tile_positions(h, side, step);
  const auto cols = tile_positions(w, side, step);
  std::vector<Origin> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) out.push_back({r, c});
  return out;
}

namespace {

// Fixed-capacity best-first lists stored flat: slot (t, c) holds up to k
// candidates sorted by CandidateRank.
class TopLists {
 public:
  TopLists(std::size_t slots, std::size_t k) : k_(k), items_(slots * k), sizes_(slots, 0) {}

  void offer(std::size_t slot, const CandidateRank& cand) {
    CandidateRank* base = items_.data() + slot * k_;
    std::size_t& n = sizes_[slot];
    if (n == k_ && !cand.better_than(base[n - 1])) return;
    std::size_t pos = n < k_ ? n : k_ - 1;
    while (pos > 0 && cand.better_than(base[pos - 1])) {
      base[pos] = base[pos - 1];
      --pos;
    }
    base[pos] = cand;
    if (n < k_) ++n;
  }

  std::span<const CandidateRank> slot(std::size_t s) const { return {items_.data() + s * k_, sizes_[s]}; }
  std::size_t slots() const { return sizes_.size(); }

 private:
  std::size_t k_;
  std::vector<CandidateRank> items_;
  std::vector<std::size_t> sizes_;
};

// Summed-area table over a rectangular region; box(r, c, n) sums the n x n
// block whose upper-left corner is (r, c) in region coordinates.
class Integral {
 public:
  void reset(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    table_.assign(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0);
  }
  double* row(int r) { return table_.data() + static_cast<std::size_t>(r + 1) * (cols_ + 1) + 1; }
  void accumulate() {
    const int stride = cols_ + 1;
    for (int r = 1; r <= rows_; ++r) {
      double run = 0.0;
      double* cur = table_.data() + r * stride;
      const double* up = cur - stride;
      for (int c = 1; c <= cols_; ++c) {
        run += cur[c];
        cur[c] = up[c] + run;
      }
    }
  }
  double box(int r, int c, int n) const {
    const int stride = cols_ + 1;
    const double* t = table_.data();
    return t[(r + n) * stride + c + n] - t[r * stride + c + n] - t[(r + n) * stride + c] + t[r * stride + c];
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> table_;
};

struct Displacement {
  int dy, dx;
};

void scan(const Image& guide, std::span<const Origin> targets, const SearchSpec& spec,
          std::span<const Displacement> shifts, const std::vector<double>& self_energy, TopLists& lists) {
  const int h = height(guide), w = width(guide), n = spec.side, s = spec.factor;
  const int classes = spec.by_phase ? s * s : 1;
  const bool cosine = spec.metric.kind == Metric::Kind::cosine;
  Integral table;
  for (const Displacement& d : shifts) {
    const int r0 = std::max(0, -d.dy), r1 = std::min(h, h - d.dy);
    const int c0 = std::max(0, -d.dx), c1 = std::min(w, w - d.dx);
    if (r1 - r0 < n || c1 - c0 < n) continue;
    table.reset(r1 - r0, c1 - c0);
    for (int y = r0; y < r1; ++y) {
      double* out = table.row(y - r0);
      const double* a = guide.row(y).data();
      const double* b = guide.row(y + d.dy).data() + d.dx;
      if (cosine) {
        for (int x = c0; x < c1; ++x) out[x - c0] = a[x] * b[x];
      } else {
        for (int x = c0; x < c1; ++x) out[x - c0] = std::abs(a[x] - b[x]);
      }
    }
    table.accumulate();

    const bool self = d.dy == 0 && d.dx == 0;
    const int d2 = d.dy * d.dy + d.dx * d.dx;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Origin o = targets[t];
      if (o.row < r0 || o.col < c0 || o.row + n > r1 || o.col + n > c1) continue;
      const Origin cand{o.row + d.dy, o.col + d.dx};
      std::size_t slot = t * classes;
      if (spec.by_phase) {
        const Phase pc = classify_phase(cand, s);
        if (pc == classify_phase(o, s)) continue;
        slot += pc.index(s);
      }
      double score;
      if (self && !spec.by_phase) {
        if (cosine && self_energy[(o.row) * w + o.col] == 0.0) continue;
        score = std::numeric_limits<double>::infinity();
      } else if (cosine) {
        const double et = self_energy[o.row * w + o.col];
        const double ec = self_energy[cand.row * w + cand.col];
        if (et == 0.0 || ec == 0.0) continue;
        score = table.box(o.row - r0, o.col - c0, n) / std::sqrt(et * ec);
      } else {
        score = -std::max(0.0, table.box(o.row - r0, o.col - c0, n));
      }
      lists.offer(slot, CandidateRank{score, d2, cand});
    }
  }
}

}  // namespace

SearchResult search_batch(const Image& guide, std::span<const Origin> targets, const SearchSpec& spec, int threads) {
  if (spec.window < 1 || spec.window % 2 == 0) throw Error("search window side must be odd");
  if (spec.count < 1) throw Error("search: K must be at least 1");
  if (spec.metric.kind == Metric::Kind::exp_l1 && !(spec.metric.decay > 0.0)) {
    throw Error("similarity: decay constant must be positive");
  }
  const int h = height(guide), w = width(guide), n = spec.side, s = spec.factor;
  for (const Origin& o : targets) {
    if (!patch_fits(o, n, w, h)) throw Error("search: target patch outside the guide image");
  }
  const int classes = spec.by_phase ? s * s : 1;

  // Squared norm of every patch, for the cosine denominator.
  std::vector<double> energy;
  if (spec.metric.kind == Metric::Kind::cosine) {
    energy.assign(static_cast<std::size_t>(h) * w, 0.0);
    for (int y = 0; y + n <= h; ++y)
      for (int x = 0; x + n <= w; ++x) energy[y * w + x] = guide.block(y, x, n, n).squaredNorm();
  }

  std::vector<Displacement> shifts;
  const int half = spec.window / 2;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) shifts.push_back({dy, dx});

  threads = std::clamp(threads, 1, static_cast<int>(shifts.size()));
  std::vector<TopLists> partial;
  for (int i = 0; i < threads; ++i) partial.emplace_back(targets.size() * classes, spec.count);
  if (threads == 1) {
    scan(guide, targets, spec, shifts, energy, partial[0]);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (shifts.size() + threads - 1) / threads;
    for (int i = 0; i < threads; ++i) {
      const std::size_t b = std::min(shifts.size(), i * chunk), e = std::min(shifts.size(), b + chunk);
      pool.emplace_back([&, i, b, e] {
        scan(guide, targets, spec, std::span<const Displacement>(shifts).subspan(b, e - b), energy, partial[i]);
      });
    }
    for (auto& t : pool) t.join();
    for (int i = 1; i < threads; ++i)
      for (std::size_t slot = 0; slot < partial[0].slots(); ++slot)
        for (const CandidateRank& c : partial[i].slot(slot)) partial[0].offer(slot, c);
  }

  SearchResult result(targets.size(), std::vector<SimilarityList>(classes));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Phase own = classify_phase(targets[t], s);
    for (int c = 0; c < classes; ++c) {
      if (spec.by_phase && c == own.index(s)) continue;
      SimilarityList& list = result[t][c];
      bool zero_target = false;
      if (spec.metric.kind == Metric::Kind::cosine) {
        zero_target = energy[targets[t].row * w + targets[t].col] == 0.0;
      }
      for (const CandidateRank& r : partial[0].slot(t * classes + c)) {
        double sim;
        if (std::isinf(r.score)) {
          sim = 1.0;
        } else if (spec.metric.kind == Metric::Kind::exp_l1) {
          sim = std::exp(r.score / spec.metric.decay);
        } else {
          sim = r.score;
        }
        list.entries.push_back({r.origin, sim});
      }
      list.shortfall = !zero_target && list.entries.size() < spec.count;
    }
  }
  return result;
}

}  // namespace mister
