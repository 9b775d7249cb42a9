#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/grid.hpp"

namespace symdepth {

struct MatcherConfig {
  int patch_radius = 5;
  int search_radius = 0;       // 0 = half the image width
  double min_contrast = 0.02;  // reference patch standard deviation floor
  double zncc_accept = 0.8;
  double lr_tolerance = 1.5;   // px, left-right re-match agreement
};

struct FilterConfig {
  double cycle_threshold = 7.0;  // px
};

namespace detail {

// Patch statistics and the mirrored cross term, summed row-major (dy outer,
// dx inner). The summation order is part of the matcher contract: the
// brute-force oracle in the test suite reproduces it bit for bit.
struct PatchStats {
  double mean = 0.0;
  double var = 0.0;
};

inline PatchStats patch_stats(const IntensityImage& img, int c, int r, int radius) {
  double sum = 0.0, sum_sq = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double v = img(c + dx, r + dy);
      sum += v;
      sum_sq += v * v;
    }
  const double n = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  PatchStats st;
  st.mean = sum / n;
  st.var = std::max(sum_sq / n - st.mean * st.mean, 0.0);
  return st;
}

/// Correlation of the horizontally flipped patch at `ref` against the patch
/// at `cand` on the same row.
inline double mirrored_cross(const IntensityImage& img, int ref_c, int cand_c, int r,
                             int radius) {
  double cross = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      cross += img(ref_c - dx, r + dy) * img(cand_c + dx, r + dy);
  return cross;
}

constexpr double kVarFloor = 1e-12;

inline double mirrored_zncc(const IntensityImage& img, int ref_c, int cand_c, int r, int radius,
                            const PatchStats& ref_st, const PatchStats& cand_st) {
  const double n = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  const double cross = mirrored_cross(img, ref_c, cand_c, r, radius);
  return (cross - n * ref_st.mean * cand_st.mean) /
         (n * std::sqrt(ref_st.var) * std::sqrt(cand_st.var));
}

}  // namespace detail

/// Dense 1D symmetry matching on the rectified image. For every masked pixel
/// the horizontally mirrored reference patch is correlated (ZNCC) against
/// candidate patches along the same row within the search radius; candidates
/// must be masked with their patch inside the image and non-degenerate
/// variance. A match is emitted when the best score reaches `zncc_accept`,
/// the best integer candidate's own best re-match lands within `lr_tolerance`
/// of the reference column, and the reference patch has contrast at least
/// `min_contrast`. The peak is refined by a parabola fit over the three
/// scores around the best column; ties prefer the leftmost candidate.
inline Flow1D match_scanlines(const IntensityImage& rectified, const Mask& rectified_mask,
                              const MatcherConfig& cfg) {
  const int w = rectified.width(), h = rectified.height();
  if (!rectified_mask.same_size(w, h)) throw invalid_input("match_scanlines: size mismatch");
  const int radius = cfg.patch_radius;
  const int search = cfg.search_radius > 0 ? cfg.search_radius : w / 2;
  Flow1D flow(w, h);

  // Pass 1: per-pixel best integer candidate (used as the left-right check).
  Grid<int> best_col(w, h, -1);
  Grid<double> stats_mean(w, h, 0.0), stats_var(w, h, -1.0);
  std::vector<double> row_scores(w);

  const auto eligible = [&](int c, int r) {
    return rectified_mask(c, r) && c >= radius && c < w - radius && r >= radius && r < h - radius;
  };

  for (int r = radius; r < h - radius; ++r)
    for (int c = radius; c < w - radius; ++c)
      if (rectified_mask(c, r)) {
        const detail::PatchStats st = detail::patch_stats(rectified, c, r, radius);
        stats_mean(c, r) = st.mean;
        stats_var(c, r) = st.var;
      }

  for (int r = radius; r < h - radius; ++r) {
    for (int c = radius; c < w - radius; ++c) {
      if (!rectified_mask(c, r)) continue;
      const detail::PatchStats ref{stats_mean(c, r), stats_var(c, r)};
      if (std::sqrt(ref.var) < cfg.min_contrast) continue;
      const int lo = std::max(c - search, radius);
      const int hi = std::min(c + search, w - 1 - radius);
      int best = -1;
      double best_score = -2.0;
      for (int cand = lo; cand <= hi; ++cand) {
        if (!eligible(cand, r)) continue;
        const detail::PatchStats cs{stats_mean(cand, r), stats_var(cand, r)};
        if (cs.var <= detail::kVarFloor) continue;
        const double score = detail::mirrored_zncc(rectified, c, cand, r, radius, ref, cs);
        if (score > best_score) {
          best_score = score;
          best = cand;
        }
      }
      if (best >= 0 && best_score >= cfg.zncc_accept) {
        best_col(c, r) = best;
        flow.score(c, r) = best_score;
      }
    }
  }

  // Pass 2: left-right consistency and subpixel refinement.
  for (int r = radius; r < h - radius; ++r) {
    for (int c = radius; c < w - radius; ++c) {
      const int best = best_col(c, r);
      if (best < 0) continue;
      const int back = best_col(best, r);
      if (back < 0 || std::abs(back - c) > cfg.lr_tolerance) continue;

      const detail::PatchStats ref{stats_mean(c, r), stats_var(c, r)};
      double delta = 0.0;
      if (best - 1 >= std::max(c - search, radius) && best + 1 <= std::min(c + search, w - 1 - radius) &&
          eligible(best - 1, r) && eligible(best + 1, r) && stats_var(best - 1, r) > detail::kVarFloor &&
          stats_var(best + 1, r) > detail::kVarFloor) {
        const double s0 = flow.score(c, r);
        const double sm = detail::mirrored_zncc(rectified, c, best - 1, r, radius, ref,
                                                {stats_mean(best - 1, r), stats_var(best - 1, r)});
        const double sp = detail::mirrored_zncc(rectified, c, best + 1, r, radius, ref,
                                                {stats_mean(best + 1, r), stats_var(best + 1, r)});
        const double denom = sm - 2.0 * s0 + sp;
        if (std::abs(denom) > 1e-12) delta = std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
      }
      flow.value(c, r) = (best + delta) - c;
      flow.valid(c, r) = 1;
    }
  }

  // Clear scores where no match survived, so score mirrors validity.
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (!flow.valid(c, r)) flow.score(c, r) = 0.0;
  return flow;
}

/// Cycle-consistency filter: a pair (a, b) survives when some pair (b', c)
/// has its source b' within 1 px of b and the chain closes to within
/// `cycle_threshold` pixels of a; pairs whose target has no outgoing match
/// are dropped.
inline CorrespondenceSet consistency_filter(const CorrespondenceSet& pairs,
                                            const FilterConfig& cfg, const ImageFrame& frame) {
  if (!(cfg.cycle_threshold > 0)) throw invalid_input("cycle_threshold must be positive");
  CorrespondenceSet kept;
  const PairLookup lookup(pairs, frame);
  for (const auto& pr : pairs) {
    const int j = lookup.nearest_source(pr.q.col, pr.q.row, 1.0);
    if (j < 0) continue;
    const PixelCoord& c = pairs[j].q;
    if (std::hypot(pr.p.col - c.col, pr.p.row - c.row) <= cfg.cycle_threshold) kept.push_back(pr);
  }
  return kept;
}

/// Keeps at most one pair per `block`x`block` tile of source pixels, by
/// strongest score (first seen wins ties). Bounds the solver's system size;
/// near-duplicate constraints add nothing.
inline CorrespondenceSet subsample_pairs(const CorrespondenceSet& pairs, int block = 2) {
  std::map<std::pair<int, int>, std::size_t> best;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::pair<int, int> cell{static_cast<int>(std::floor(pairs[i].p.col / block)),
                                   static_cast<int>(std::floor(pairs[i].p.row / block))};
    const auto it = best.find(cell);
    if (it == best.end() || pairs[i].score > pairs[it->second].score)
      best[cell] = i;
  }
  std::vector<std::size_t> keep;
  keep.reserve(best.size());
  for (const auto& [cell, idx] : best) keep.push_back(idx);
  std::sort(keep.begin(), keep.end());
  CorrespondenceSet out;
  out.reserve(keep.size());
  for (const std::size_t i : keep) out.push_back(pairs[i]);
  return out;
}

}  // namespace symdepth
