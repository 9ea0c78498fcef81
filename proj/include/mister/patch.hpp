#pragma once

#include "mister/image.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mister {

/// Residue class of a coordinate pair modulo the interpolation factor. For
/// factor 2 the four classes are OO (0,0), OE (0,1), EO (1,0) and EE (1,1),
/// named after the parity of the 1-based coordinates. (0,0) is measured.
struct Phase {
  int row = 0;
  int col = 0;
  auto operator<=>(const Phase&) const = default;

  int index(int factor) const { return row * factor + col; }
  static Phase from_index(int index, int factor) { return {index / factor, index % factor}; }
};

inline constexpr Phase kOO{0, 0};
inline constexpr Phase kOE{0, 1};
inline constexpr Phase kEO{1, 0};
inline constexpr Phase kEE{1, 1};

Phase classify_phase(Origin origin, int factor = 2);
std::string phase_name(Phase phase, int factor = 2);

/// Intra-patch phase that carries measured pixels in a patch whose origin has
/// the given phase. Identity for factor 2.
Phase measured_intra_phase(Phase origin_phase, int factor);

/// n x n block at an origin, vectorised row-major.
struct Patch {
  Origin origin;
  int side = 0;
  Eigen::VectorXd values;
};

/// K patches stacked as rows, with the origin each row came from.
struct PatchGroup {
  int side = 0;
  Eigen::MatrixXd rows;
  std::vector<Origin> origins;
};

/// Diagonal 0/1 selector over the n^2 intra-patch coordinates.
class PhaseMask {
 public:
  /// Pixels of one intra-patch phase (M^OO, M^OE, M^EO, M^EE, ...).
  static PhaseMask select(int side, Phase phase, int factor = 2);
  /// Every pixel off the intra-patch measured phase (M^r).
  static PhaseMask rest(int side, int factor = 2);

  int side() const { return side_; }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  /// Selected coordinates in scan order; compact() follows this order.
  const std::vector<int>& indices() const { return indices_; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// Compacting selector (M_c): n^2 -> |indices|.
  Eigen::VectorXd compact(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// Compacts each column of an n^2 x K matrix.
  Eigen::MatrixXd compact_rows(const Eigen::Ref<const Eigen::MatrixXd>& m) const;
  /// Inverse placement of compact(): zeros off the selection.
  Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& compacted) const;

 private:
  PhaseMask(int side, Eigen::VectorXd diagonal);

  int side_;
  Eigen::VectorXd diagonal_;
  std::vector<int> indices_;
};

bool patch_fits(Origin origin, int side, int width, int height);

Patch extract_patch(const Image& img, Origin origin, int side);
/// Same as extract_patch but returns the raw vector.
Eigen::VectorXd patch_values(const Image& img, Origin origin, int side);

/// Running sum of patch contributions and per-pixel coverage.
class PatchAccumulator {
 public:
  PatchAccumulator(int width, int height);

  void add(Origin origin, int side, const Eigen::Ref<const Eigen::VectorXd>& values);
  /// Sum divided by coverage. Throws on any uncovered pixel.
  Image average() const;

  const Image& sum() const { return sum_; }
  const Image& coverage() const { return coverage_; }

 private:
  Image sum_;
  Image coverage_;
};

/// Per-pixel average of overlapping patch contributions.
Image synthesize_patches(std::span<const Patch> patches, int width, int height);
/// Same for groups: every member row is placed at its recorded origin.
Image synthesize_groups(std::span<const PatchGroup> groups, int width, int height);

double similarity_exp_l1(const Patch& a, const Patch& b, double decay);
double similarity_cosine(const Patch& a, const Patch& b);

struct Metric {
  enum class Kind { exp_l1, cosine };
  Kind kind = Kind::exp_l1;
  double decay = 1.0;  // c_w, exp_l1 only

  static Metric exp_l1(double decay) { return {Kind::exp_l1, decay}; }
  static Metric cosine() { return {Kind::cosine, 0.0}; }
};

struct SimilarEntry {
  Origin origin;
  double similarity = 0.0;
};

/// Best-first list of similar patches.
struct SimilarityList {
  std::vector<SimilarEntry> entries;
  bool shortfall = false;  // fewer candidates than requested were available

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Strict ranking key: higher score first, then the candidate nearer to the
/// target, then row-major scan order.
struct CandidateRank {
  double score;
  int distance2;
  Origin origin;

  bool better_than(const CandidateRank& other) const {
    if (score != other.score) return score > other.score;
    if (distance2 != other.distance2) return distance2 < other.distance2;
    return origin < other.origin;
  }
};

/// Exhaustive top-K search over the W x W window centred on the target's
/// upper-left pixel. With a phase filter only candidates of that phase are
/// considered and the target itself is excluded; without one the target is
/// always the first entry.
SimilarityList search_similar(const Image& guide, Origin target, int side, int window, const Metric& metric,
                              std::optional<Phase> phase_filter, std::size_t count, int factor = 2);

/// Diagonal of the penalty matrix diag(S(1)/S(j)). Similarities are replaced
/// by max(S, floor) first; with floor == 0 nonpositive values are rejected.
Eigen::VectorXd penalty_matrix(const SimilarityList& list, double floor = 0.0);

}  // namespace mister
