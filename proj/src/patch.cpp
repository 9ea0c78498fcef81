#include "mister/patch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mister {

Phase classify_phase(Origin origin, int factor) {
  auto mod = [factor](int v) { return ((v % factor) + factor) % factor; };
  return {mod(origin.row), mod(origin.col)};
}

std::string phase_name(Phase phase, int factor) {
  if (factor == 2) {
    // 0-based even index == 1-based odd coordinate
    std::string name;
    name += phase.row == 0 ? 'O' : 'E';
    name += phase.col == 0 ? 'O' : 'E';
    return name;
  }
  return "(" + std::to_string(phase.row) + "," + std::to_string(phase.col) + ")";
}

Phase measured_intra_phase(Phase origin_phase, int factor) {
  return {(factor - origin_phase.row) % factor, (factor - origin_phase.col) % factor};
}

PhaseMask::PhaseMask(int side, Eigen::VectorXd diagonal) : side_(side), diagonal_(std::move(diagonal)) {
  for (int i = 0; i < diagonal_.size(); ++i)
    if (diagonal_[i] != 0.0) indices_.push_back(i);
}

PhaseMask PhaseMask::select(int side, Phase phase, int factor) {
  if (side < 1) throw Error("phase mask side must be positive");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(side * side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      if (i % factor == phase.row && j % factor == phase.col) d[i * side + j] = 1.0;
  return PhaseMask(side, std::move(d));
}

PhaseMask PhaseMask::rest(int side, int factor) {
  PhaseMask measured = select(side, kOO, factor);
  return PhaseMask(side, Eigen::VectorXd::Ones(side * side) - measured.diagonal());
}

Eigen::VectorXd PhaseMask::apply(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return diagonal_.cwiseProduct(v);
}

Eigen::VectorXd PhaseMask::compact(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::VectorXd out(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) out[k] = v[indices_[k]];
  return out;
}

Eigen::MatrixXd PhaseMask::compact_rows(const Eigen::Ref<const Eigen::MatrixXd>& m) const {
  Eigen::MatrixXd out(indices_.size(), m.cols());
  for (std::size_t k = 0; k < indices_.size(); ++k) out.row(k) = m.row(indices_[k]);
  return out;
}

Eigen::VectorXd PhaseMask::expand(const Eigen::Ref<const Eigen::VectorXd>& compacted) const {
  if (compacted.size() != static_cast<Eigen::Index>(indices_.size())) {
    throw Error("PhaseMask::expand: length mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(diagonal_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = compacted[k];
  return out;
}

bool patch_fits(Origin origin, int side, int w, int h) {
  return origin.row >= 0 && origin.col >= 0 && origin.row + side <= h && origin.col + side <= w;
}

Eigen::VectorXd patch_values(const Image& img, Origin origin, int side) {
  if (side < 1 || !patch_fits(origin, side, width(img), height(img))) {
    throw Error("patch of side " + std::to_string(side) + " at (" + std::to_string(origin.row) + "," +
                std::to_string(origin.col) + ") is outside the " + std::to_string(width(img)) + "x" +
                std::to_string(height(img)) + " image");
  }
  Eigen::VectorXd v(side * side);
  for (int i = 0; i < side; ++i) v.segment(i * side, side) = img.row(origin.row + i).segment(origin.col, side);
  return v;
}

Patch extract_patch(const Image& img, Origin origin, int side) {
  return Patch{origin, side, patch_values(img, origin, side)};
}

PatchAccumulator::PatchAccumulator(int w, int h) : sum_(Image::Zero(h, w)), coverage_(Image::Zero(h, w)) {}

void PatchAccumulator::add(Origin origin, int side, const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (!patch_fits(origin, side, width(sum_), height(sum_))) {
    throw Error("synthesis: patch at (" + std::to_string(origin.row) + "," + std::to_string(origin.col) +
                ") leaves the canvas");
  }
  if (values.size() != side * side) throw Error("synthesis: patch length is not side^2");
  for (int i = 0; i < side; ++i) {
    sum_.row(origin.row + i).segment(origin.col, side) += values.segment(i * side, side).transpose();
    coverage_.row(origin.row + i).segment(origin.col, side).array() += 1.0;
  }
}

Image PatchAccumulator::average() const {
  for (int y = 0; y < height(coverage_); ++y)
    for (int x = 0; x < width(coverage_); ++x)
      if (coverage_(y, x) == 0.0) {
        throw Error("synthesis hole at (" + std::to_string(y) + "," + std::to_string(x) + ")");
      }
  return sum_.cwiseQuotient(coverage_);
}

Image synthesize_patches(std::span<const Patch> patches, int w, int h) {
  PatchAccumulator acc(w, h);
  for (const Patch& p : patches) acc.add(p.origin, p.side, p.values);
  return acc.average();
}

Image synthesize_groups(std::span<const PatchGroup> groups, int w, int h) {
  PatchAccumulator acc(w, h);
  for (const PatchGroup& g : groups) {
    if (g.rows.rows() != static_cast<Eigen::Index>(g.origins.size())) {
      throw Error("synthesis: group has " + std::to_string(g.rows.rows()) + " rows but " +
                  std::to_string(g.origins.size()) + " origins");
    }
    for (std::size_t k = 0; k < g.origins.size(); ++k) acc.add(g.origins[k], g.side, g.rows.row(k).transpose());
  }
  return acc.average();
}

double similarity_exp_l1(const Patch& a, const Patch& b, double decay) {
  if (a.side != b.side) throw Error("similarity: patch sides differ");
  if (!(decay > 0.0)) throw Error("similarity: decay constant must be positive");
  return std::exp(-(a.values - b.values).lpNorm<1>() / decay);
}

double similarity_cosine(const Patch& a, const Patch& b) {
  if (a.side != b.side) throw Error("similarity: patch sides differ");
  const double na = a.values.norm(), nb = b.values.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine similarity of a zero-norm patch");
  return a.values.dot(b.values) / (na * nb);
}

SimilarityList search_similar(const Image& guide, Origin target, int side, int window, const Metric& metric,
                              std::optional<Phase> phase_filter, std::size_t count, int factor) {
  if (window < 1 || window % 2 == 0) throw Error("search window side must be odd");
  if (count < 1) throw Error("search: K must be at least 1");
  const Patch ref = extract_patch(guide, target, side);
  if (metric.kind == Metric::Kind::cosine && ref.values.squaredNorm() == 0.0) return {};
  const int half = window / 2;
  const int w = width(guide), h = height(guide);

  std::vector<std::pair<CandidateRank, double>> ranked;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const Origin cand{target.row + dy, target.col + dx};
      if (!patch_fits(cand, side, w, h)) continue;
      const bool self = dy == 0 && dx == 0;
      if (phase_filter) {
        if (self || classify_phase(cand, factor) != *phase_filter) continue;
      }
      const Patch p = extract_patch(guide, cand, side);
      double score = 0.0, sim = 0.0;
      if (metric.kind == Metric::Kind::exp_l1) {
        const double dist = (ref.values - p.values).lpNorm<1>();
        score = -dist;
        sim = std::exp(-dist / metric.decay);
      } else {
        if (p.values.squaredNorm() == 0.0) continue;
        sim = similarity_cosine(ref, p);
        score = sim;
      }
      if (self && !phase_filter) {
        score = std::numeric_limits<double>::infinity();
        sim = 1.0;
      }
      ranked.push_back({CandidateRank{score, dy * dy + dx * dx, cand}, sim});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first.better_than(b.first); });

  SimilarityList list;
  list.shortfall = ranked.size() < count;
  const std::size_t keep = std::min(count, ranked.size());
  for (std::size_t k = 0; k < keep; ++k) list.entries.push_back({ranked[k].first.origin, ranked[k].second});
  return list;
}

Eigen::VectorXd penalty_matrix(const SimilarityList& list, double floor) {
  if (list.empty()) return {};
  Eigen::VectorXd s(list.size());
  for (std::size_t j = 0; j < list.size(); ++j) {
    const double v = std::max(list.entries[j].similarity, floor);
    if (!(v > 0.0)) throw Error("penalty matrix needs positive similarities");
    s[j] = v;
  }
  return s.cwiseInverse() * s[0];
}

}  // namespace mister
