#pragma once

#include "mister/patch.hpp"

#include <span>
#include <vector>

namespace mister {

/// Patch origins every `step` pixels along each axis, plus a final row and
/// column clamped to height - side and width - side so the tiling reaches the
/// border.
std::vector<int> tile_positions(int extent, int side, int step);
std::vector<Origin> tile_origins(int width, int height, int side, int step);

struct SearchSpec {
  int side = 8;
  int window = 21;
  Metric metric;
  std::size_t count = 10;
  int factor = 2;
  /// Split candidates by phase (one list per phase other than the target's)
  /// instead of returning a single list headed by the target itself.
  bool by_phase = false;
};

/// lists[t][c] for target t. With by_phase, c is Phase::index() and the entry
/// for the target's own phase stays empty; otherwise there is a single list.
using SearchResult = std::vector<std::vector<SimilarityList>>;

/// Windowed top-K search for many targets at once. Ranking is identical to
/// search_similar for every target; the result does not depend on `threads`.
SearchResult search_batch(const Image& guide, std::span<const Origin> targets, const SearchSpec& spec,
                          int threads = 1);

}  // namespace mister
