#include "symdepth/matching.hpp"

#include <gtest/gtest.h>

#include "symdepth/metrics.hpp"
#include "symdepth/rectify.hpp"
#include "symdepth/rng.hpp"
#include "symdepth/synth.hpp"

namespace symdepth {
namespace {

// Exhaustive per-row brute-force matcher, written independently of the
// library implementation but to the same arithmetic contract (summation
// order dy outer / dx inner, strict-greater best, leftmost tie winner), so
// agreement must be exact.
Flow1D oracle_match(const IntensityImage& img, const Mask& mask, const MatcherConfig& cfg) {
  const int w = img.width(), h = img.height();
  const int rad = cfg.patch_radius;
  const int search = cfg.search_radius > 0 ? cfg.search_radius : w / 2;
  Flow1D flow(w, h);

  const auto stats = [&](int c, int r, double* mean, double* var) {
    double sum = 0, sum_sq = 0;
    for (int dy = -rad; dy <= rad; ++dy)
      for (int dx = -rad; dx <= rad; ++dx) {
        const double v = img(c + dx, r + dy);
        sum += v;
        sum_sq += v * v;
      }
    const double n = static_cast<double>((2 * rad + 1) * (2 * rad + 1));
    *mean = sum / n;
    *var = std::max(sum_sq / n - *mean * *mean, 0.0);
  };
  const auto ok_pixel = [&](int c, int r) {
    return mask(c, r) && c >= rad && c < w - rad && r >= rad && r < h - rad;
  };
  const auto zncc = [&](int ref_c, int cand_c, int r) {
    double mr, vr, mc, vc;
    stats(ref_c, r, &mr, &vr);
    stats(cand_c, r, &mc, &vc);
    double cross = 0;
    for (int dy = -rad; dy <= rad; ++dy)
      for (int dx = -rad; dx <= rad; ++dx)
        cross += img(ref_c - dx, r + dy) * img(cand_c + dx, r + dy);
    const double n = static_cast<double>((2 * rad + 1) * (2 * rad + 1));
    return (cross - n * mr * mc) / (n * std::sqrt(vr) * std::sqrt(vc));
  };

  Grid<int> best_col(w, h, -1);
  Grid<double> best_score(w, h, 0.0);
  for (int r = rad; r < h - rad; ++r)
    for (int c = rad; c < w - rad; ++c) {
      if (!mask(c, r)) continue;
      double mr, vr;
      stats(c, r, &mr, &vr);
      if (std::sqrt(vr) < cfg.min_contrast) continue;
      int best = -1;
      double score = -2.0;
      for (int cand = std::max(c - search, rad); cand <= std::min(c + search, w - 1 - rad); ++cand) {
        if (!ok_pixel(cand, r)) continue;
        double mc, vc;
        stats(cand, r, &mc, &vc);
        if (vc <= 1e-12) continue;
        const double s = zncc(c, cand, r);
        if (s > score) {
          score = s;
          best = cand;
        }
      }
      if (best >= 0 && score >= cfg.zncc_accept) {
        best_col(c, r) = best;
        best_score(c, r) = score;
      }
    }

  for (int r = rad; r < h - rad; ++r)
    for (int c = rad; c < w - rad; ++c) {
      const int best = best_col(c, r);
      if (best < 0) continue;
      const int back = best_col(best, r);
      if (back < 0 || std::abs(back - c) > cfg.lr_tolerance) continue;
      const int lo = std::max(c - search, rad), hi = std::min(c + search, w - 1 - rad);
      double delta = 0.0;
      double vm = -1.0, vp = -1.0, mm = 0.0, mp = 0.0;
      if (best - 1 >= lo && best + 1 <= hi && ok_pixel(best - 1, r) && ok_pixel(best + 1, r)) {
        stats(best - 1, r, &mm, &vm);
        stats(best + 1, r, &mp, &vp);
        if (vm > 1e-12 && vp > 1e-12) {
          const double s0 = best_score(c, r);
          const double sm = zncc(c, best - 1, r);
          const double sp = zncc(c, best + 1, r);
          const double denom = sm - 2.0 * s0 + sp;
          if (std::abs(denom) > 1e-12) delta = std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
        }
      }
      flow.value(c, r) = (best + delta) - c;
      flow.valid(c, r) = 1;
      flow.score(c, r) = best_score(c, r);
    }
  return flow;
}

// Exactly mirror-symmetric textured image with a non-periodic pattern.
IntensityImage symmetric_image(int w, int h, std::uint64_t seed) {
  IntensityImage img(w, h, 0.0);
  Rng rng(seed);
  const double a = rng.uniform(0.31, 0.43), b = rng.uniform(0.17, 0.29);
  const double c2 = rng.uniform(0.011, 0.019), p = rng.uniform(0.0, 6.0);
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const double u = std::abs(col - (w - 1) / 2.0);
      const double v = static_cast<double>(r);
      double val = 0.5 + 0.21 * std::sin(a * u + 0.8 * std::sin(0.23 * v + p)) +
                   0.17 * std::sin(b * v + c2 * u * u) + 0.08 * std::sin(0.61 * u - 0.4 * v);
      img(col, r) = std::clamp(val, 0.02, 0.98);
    }
  return img;
}

TEST(Matcher, ExactlySymmetricImageMatchesNearlyAllMaskedPixels) {
  const int w = 96, h = 64;
  const IntensityImage img = symmetric_image(w, h, 11);
  MatcherConfig cfg;
  Mask mask(w, h, 0);
  for (int r = cfg.patch_radius; r < h - cfg.patch_radius; ++r)
    for (int c = cfg.patch_radius; c < w - cfg.patch_radius; ++c) mask(c, r) = 1;
  const Flow1D flow = match_scanlines(img, mask, cfg);
  int masked = 0, within = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!mask(c, r)) continue;
      ++masked;
      if (!flow.valid(c, r)) continue;
      const double gt = (w - 1 - c) - c;  // mirror column displacement
      if (std::abs(flow.value(c, r) - gt) <= 1.0) ++within;
    }
  EXPECT_GE(static_cast<double>(within) / masked, 0.99);
}

TEST(Matcher, AgreesExactlyWithBruteForceOracle) {
  // Synthetic rectified scenes and the plain symmetric fixture.
  MatcherConfig cfg;
  {
    const int w = 72, h = 48;
    const IntensityImage img = symmetric_image(w, h, 12);
    Mask mask(w, h, 0);
    for (int r = 6; r < h - 6; ++r)
      for (int c = 6; c < w - 6; ++c) mask(c, r) = 1;
    const Flow1D a = match_scanlines(img, mask, cfg);
    const Flow1D b = oracle_match(img, mask, cfg);
    ASSERT_TRUE(a.valid == b.valid);
    ASSERT_TRUE(a.value == b.value);
    ASSERT_TRUE(a.score == b.score);
  }
  {
    SceneSpec spec;
    spec.seed = 13;
    spec.width = 96;
    spec.height = 96;
    spec.camera.tx_min = 0.15;
    spec.camera.tx_max = 0.35;
    const Scene scene = render(instantiate_scene(spec, 0));
    const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
    const IntensityImage rect = warp_bilinear(scene.intensity, t);
    const Mask rect_mask = warp_nearest(scene.mask, t);
    const Flow1D a = match_scanlines(rect, rect_mask, cfg);
    const Flow1D b = oracle_match(rect, rect_mask, cfg);
    int n_valid = 0;
    for (auto v : a.valid.values()) n_valid += v ? 1 : 0;
    ASSERT_GT(n_valid, 200);
    ASSERT_TRUE(a.valid == b.valid);
    ASSERT_TRUE(a.value == b.value);
    ASSERT_TRUE(a.score == b.score);
  }
}

TEST(Matcher, ConstantRowsEmitNothing) {
  const int w = 64, h = 32;
  IntensityImage img(w, h, 0.5);  // zero contrast everywhere
  Mask mask(w, h, 1);
  const Flow1D flow = match_scanlines(img, mask, MatcherConfig{});
  for (auto v : flow.valid.values()) EXPECT_EQ(v, 0);
}

TEST(Matcher, DisplacementBoundedBySearchRadius) {
  SceneSpec spec;
  spec.seed = 14;
  spec.width = 96;
  spec.height = 96;
  const Scene scene = render(instantiate_scene(spec, 0));
  const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
  const IntensityImage rect = warp_bilinear(scene.intensity, t);
  const Mask rect_mask = warp_nearest(scene.mask, t);
  MatcherConfig cfg;
  cfg.search_radius = 17;
  const Flow1D flow = match_scanlines(rect, rect_mask, cfg);
  for (int r = 0; r < flow.value.height(); ++r)
    for (int c = 0; c < flow.value.width(); ++c)
      if (flow.valid(c, r)) EXPECT_LE(std::abs(flow.value(c, r)), cfg.search_radius + 1.0);
}

TEST(Matcher, DeterministicAcrossRuns) {
  const IntensityImage img = symmetric_image(80, 40, 15);
  Mask mask(80, 40, 0);
  for (int r = 5; r < 35; ++r)
    for (int c = 5; c < 75; ++c) mask(c, r) = 1;
  const Flow1D a = match_scanlines(img, mask, MatcherConfig{});
  const Flow1D b = match_scanlines(img, mask, MatcherConfig{});
  EXPECT_TRUE(a.value == b.value);
  EXPECT_TRUE(a.valid == b.valid);
  EXPECT_TRUE(a.score == b.score);
}

TEST(Filter, PaperChainExample) {
  const ImageFrame frame{512, 512};
  const CorrespondenceSet pairs = {{{10, 5}, {100, 5}}, {{100, 5}, {12, 5}}};
  const CorrespondenceSet kept = consistency_filter(pairs, FilterConfig{7.0}, frame);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_DOUBLE_EQ(kept[0].p.col, 10);
  EXPECT_DOUBLE_EQ(kept[0].q.col, 100);
}

TEST(Filter, LargeCycleErrorDropped) {
  const ImageFrame frame{512, 512};
  const CorrespondenceSet pairs = {{{10, 5}, {100, 5}}, {{100, 5}, {30, 5}}};
  // chain closes 20 px away from the source: both directions die
  EXPECT_TRUE(consistency_filter(pairs, FilterConfig{7.0}, frame).empty());
}

TEST(Filter, MissingChainDropped) {
  const ImageFrame frame{512, 512};
  const CorrespondenceSet pairs = {{{10, 5}, {100, 5}}};
  EXPECT_TRUE(consistency_filter(pairs, FilterConfig{7.0}, frame).empty());
}

TEST(Filter, OutputIsSubsetAndIdempotentOnCleanData) {
  SceneSpec spec;
  spec.seed = 16;
  spec.width = 96;
  spec.height = 96;
  const Scene scene = render(instantiate_scene(spec, 0));
  const FilterConfig cfg{7.0};
  const CorrespondenceSet once = consistency_filter(scene.pairs, cfg, scene.frame);
  EXPECT_EQ(once.size(), scene.pairs.size());
  const CorrespondenceSet twice = consistency_filter(once, cfg, scene.frame);
  EXPECT_EQ(twice.size(), once.size());

  NoiseSpec noise;
  noise.corr_outlier_frac = 0.2;
  noise.seed = 17;
  const Scene noisy = corrupt(scene, noise);
  const CorrespondenceSet kept = consistency_filter(noisy.pairs, cfg, scene.frame);
  EXPECT_LT(kept.size(), noisy.pairs.size());
  // subset, order preserved
  std::size_t j = 0;
  for (const auto& pr : noisy.pairs) {
    if (j < kept.size() && pr.p.col == kept[j].p.col && pr.p.row == kept[j].p.row &&
        pr.q.col == kept[j].q.col && pr.q.row == kept[j].q.row)
      ++j;
  }
  EXPECT_EQ(j, kept.size());
}

// With 20% outliers the filter keeps nearly all inliers (ground-truth cycle
// error within the threshold) and lowers the mean target error.
TEST(Filter, RetainsInliersUnderInjectedOutliers) {
  SceneSpec spec;
  spec.seed = 18;
  NoiseSpec noise;
  noise.corr_outlier_frac = 0.2;
  noise.seed = 19;
  int inliers = 0, inliers_kept = 0;
  double err_before = 0, err_after = 0;
  int n_before = 0, n_after = 0;
  for (int i = 0; i < 4; ++i) {
    const Scene scene = render(instantiate_scene(spec, i));
    const Scene noisy = corrupt(scene, noise);
    const PairLookup gt(scene.pairs, scene.frame);
    const auto gt_cycle_err = [&](const Correspondence& pr) {
      const int j = gt.nearest_source(pr.q.col, pr.q.row, 1.0);
      if (j < 0) return 1e300;
      const auto& t = gt.set()[j].q;
      return std::hypot(pr.p.col - t.col, pr.p.row - t.row);
    };
    std::vector<char> is_inlier(noisy.pairs.size());
    for (std::size_t k = 0; k < noisy.pairs.size(); ++k)
      is_inlier[k] = gt_cycle_err(noisy.pairs[k]) <= 7.0;

    const CorrespondenceSet kept = consistency_filter(noisy.pairs, FilterConfig{7.0}, scene.frame);
    // Identify kept entries by position in the (order-preserving) subset.
    std::size_t j = 0;
    for (std::size_t k = 0; k < noisy.pairs.size() && j < kept.size(); ++k) {
      const auto& a = noisy.pairs[k];
      const auto& b = kept[j];
      const bool same = a.p.col == b.p.col && a.p.row == b.p.row && a.q.col == b.q.col &&
                        a.q.row == b.q.row;
      if (!same) continue;
      if (is_inlier[k]) ++inliers_kept;
      ++j;
    }
    for (std::size_t k = 0; k < noisy.pairs.size(); ++k)
      if (is_inlier[k]) ++inliers;

    const SymReport before = symmetry_metrics(noisy.pairs, scene.pairs, scene.frame);
    const SymReport after = symmetry_metrics(kept, scene.pairs, scene.frame);
    err_before += before.mean_pixel_err * before.n_pairs;
    n_before += before.n_pairs;
    err_after += after.mean_pixel_err * after.n_pairs;
    n_after += after.n_pairs;
  }
  ASSERT_GT(inliers, 1000);
  EXPECT_GE(static_cast<double>(inliers_kept) / inliers, 0.95);
  EXPECT_LT(err_after / n_after, err_before / n_before);
}

TEST(Subsample, KeepsStrongestPerBlock) {
  CorrespondenceSet pairs = {
      {{10.2, 6.1}, {40, 6}, 0.85},
      {{10.8, 6.7}, {41, 6}, 0.95},  // same 2x2 block as above, stronger
      {{12.1, 6.0}, {42, 6}, 0.5},
  };
  const CorrespondenceSet out = subsample_pairs(pairs, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].score, 0.95);
  EXPECT_DOUBLE_EQ(out[1].score, 0.5);
}

}  // namespace
}  // namespace symdepth
