#include "symdepth/rectify.hpp"

#include <gtest/gtest.h>

#include "symdepth/rng.hpp"
#include "symdepth/synth.hpp"

namespace symdepth {
namespace {

SceneSpec nondegenerate_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.family = SceneSpec::Family::box_union;
  spec.width = 128;
  spec.height = 128;
  spec.seed = seed;
  // Keep azimuth and elevation well away from zero so both vanishing points
  // stay finite.
  spec.camera.tx_min = 0.35;
  spec.camera.tx_max = 0.9;
  spec.camera.elev_min_deg = 10;
  spec.camera.elev_max_deg = 24;
  return spec;
}

TEST(VanishingPoints, IdentityRotationIsDoublyDegenerate) {
  const VanishingPoints vp = vanishing_points(Eigen::Matrix3d::Identity(), 1.0);
  EXPECT_TRUE(vp.v1_at_infinity);
  EXPECT_TRUE(vp.v2_at_infinity);
  EXPECT_TRUE(vp.v1.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  EXPECT_TRUE(vp.v2.isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));
}

TEST(VanishingPoints, ThirtyDegreesAboutX) {
  const Eigen::Matrix3d r = exp_map({30.0 * M_PI / 180.0, 0, 0});
  const VanishingPoints vp = vanishing_points(r, 1.0);
  EXPECT_TRUE(vp.v1_at_infinity);
  EXPECT_TRUE(vp.v1.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  EXPECT_FALSE(vp.v2_at_infinity);
  EXPECT_TRUE(vp.v2.isApprox(Eigen::Vector3d(0, -std::sqrt(3.0), 1), 1e-9)) << vp.v2.transpose();
}

// A finite vanishing point is the projection of a point far along the world
// axis, independently of the cross-product formula.
TEST(VanishingPoints, MatchesFarPointProjection) {
  Rng rng(8101);
  for (int i = 0; i < 200; ++i) {
    CameraPose cam;
    cam.rotation = exp_map(rng.unit_vector() * rng.uniform(0.2, 1.2));
    cam.s = rng.uniform(0.3, 2.0);
    cam.t_x = rng.uniform(-1.0, 1.0);
    const VanishingPoints vp = vanishing_points(cam.rotation, cam.s);
    const Eigen::Vector3d base = back_project({0.07, -0.04}, 3.0, cam);
    for (int axis = 0; axis < 2; ++axis) {
      const Eigen::Vector3d& v = axis == 0 ? vp.v1 : vp.v2;
      if ((axis == 0 && vp.v1_at_infinity) || (axis == 1 && vp.v2_at_infinity)) continue;
      const Eigen::Vector3d dir = axis == 0 ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0);
      Eigen::Vector2d nf;
      double zf = 0.0;
      const Eigen::Vector3d far = base + 1e12 * dir;
      if (!project(far, cam, &nf, &zf)) {
        EXPECT_TRUE(project(base - 1e12 * dir, cam, &nf, &zf));
      }
      const double tol = 1e-6 * (1.0 + v.head<2>().norm());
      EXPECT_NEAR(nf.x(), v.x(), tol);
      EXPECT_NEAR(nf.y(), v.y(), tol);
    }
  }
}

TEST(BuildTransform, EmptyMaskRejected) {
  Mask empty(8, 8, 0);
  EXPECT_THROW(build_transform(CameraPose{}, {8, 8}, empty), invalid_input);
}

TEST(BuildTransform, IdentityRotationKeepsRows) {
  Mask mask(64, 64, 0);
  for (int r = 20; r < 44; ++r)
    for (int c = 12; c < 52; ++c) mask(c, r) = 1;
  const RectifyTransform t = build_transform(CameraPose{}, {64, 64}, mask);
  EXPECT_TRUE(t.degenerate);
  EXPECT_TRUE(t.H.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  // Pixels on a common row stay on a common row under the fit similarity.
  const auto a = apply_homography(t.T, {15.0, 30.0});
  const auto b = apply_homography(t.T, {40.0, 30.0});
  ASSERT_TRUE(a && b);
  EXPECT_NEAR(a->row, b->row, 1e-9);
}

TEST(BuildTransform, WarpedMaskFitsCanvasWithMargin) {
  const SceneSpec spec = nondegenerate_spec(42);
  const Scene scene = render(instantiate_scene(spec, 0));
  const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
  for (int r = 0; r < scene.mask.height(); ++r)
    for (int c = 0; c < scene.mask.width(); ++c) {
      if (!scene.mask(c, r)) continue;
      const auto q = apply_homography(t.T, {static_cast<double>(c), static_cast<double>(r)});
      ASSERT_TRUE(q);
      EXPECT_GE(q->col, 4.0 - 1e-6);
      EXPECT_LE(q->col, scene.frame.width - 4.0 + 1e-6);
      EXPECT_GE(q->row, 4.0 - 1e-6);
      EXPECT_LE(q->row, scene.frame.height - 4.0 + 1e-6);
    }
}

TEST(BuildTransform, XVanishingDirectionMapsHorizontal) {
  const SceneSpec spec = nondegenerate_spec(43);
  for (int i = 0; i < 5; ++i) {
    const Scene scene = render(instantiate_scene(spec, i));
    const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
    ASSERT_FALSE(t.degenerate);
    // v1 in pixel coordinates, mapped through T, must be at infinity along
    // the column axis.
    const Eigen::Matrix3d n = detail::norm_matrix(scene.frame);
    const Eigen::Vector3d v1_px = n.inverse() * t.vps.v1;
    const Eigen::Vector3d img = t.T * v1_px;
    const double len = std::hypot(img.x(), img.y());
    ASSERT_GT(len, 0.0);
    EXPECT_LT(std::abs(img.z()) / len, 1e-9);
    EXPECT_LT(std::abs(img.y()) / len, 1e-9);
  }
}

TEST(BuildTransform, VanishingLineMapsToInfinity) {
  const SceneSpec spec = nondegenerate_spec(44);
  for (int i = 0; i < 10; ++i) {
    const Scene scene = render(instantiate_scene(spec, i));
    const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
    ASSERT_FALSE(t.degenerate);
    const Eigen::Matrix3d n = detail::norm_matrix(scene.frame);
    const Eigen::Vector3d l_norm = t.vps.v1.cross(t.vps.v2);
    const Eigen::Vector3d l_px = n.transpose() * l_norm;  // lines pull back by N^T
    const Eigen::Vector3d l_out = t.T_inv.transpose() * l_px;
    const double kappa = std::abs(l_out.z());
    ASSERT_GT(kappa, 0.0);
    EXPECT_LT(std::hypot(l_out.x(), l_out.y()) / kappa, 1e-9);
  }
}

// Ground-truth symmetric pairs share a rectified scanline.
TEST(BuildTransform, ScanlinePropertyOnSyntheticScenes) {
  const SceneSpec spec = nondegenerate_spec(45);
  int total = 0, close = 0;
  for (int i = 0; i < 8; ++i) {
    const Scene scene = render(instantiate_scene(spec, i));
    const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
    ASSERT_FALSE(t.degenerate);
    for (const auto& pr : scene.pairs) {
      const auto a = apply_homography(t.T, pr.p);
      const auto b = apply_homography(t.T, pr.q);
      ASSERT_TRUE(a && b);
      ++total;
      if (std::abs(a->row - b->row) <= 0.5) ++close;
    }
  }
  ASSERT_GT(total, 1000);
  EXPECT_GE(static_cast<double>(close) / total, 0.95);
}

RectifyTransform identity_transform(int w, int h) {
  RectifyTransform t;
  t.out_width = w;
  t.out_height = h;
  return t;
}

TEST(Warp, IdentityReproducesInput) {
  Rng rng(8102);
  Grid<double> img(17, 13);
  for (auto& v : img.values()) v = rng.uniform01();
  const Grid<double> out = warp_bilinear(img, identity_transform(17, 13));
  EXPECT_TRUE(out == img);
}

TEST(Warp, IntegerTranslationIsExactOnInterior) {
  Rng rng(8103);
  Grid<double> img(32, 16);
  for (auto& v : img.values()) v = rng.uniform01();
  RectifyTransform t = identity_transform(32, 16);
  t.T(0, 2) = 3.0;  // shift +3 columns
  t.T_inv = t.T.inverse();
  const Grid<double> out = warp_bilinear(img, t);
  for (int r = 0; r < 16; ++r)
    for (int c = 3; c < 32; ++c) EXPECT_EQ(out(c, r), img(c - 3, r));
}

TEST(Warp, RoundTripIsCloseOnSmoothImages) {
  SceneSpec spec;
  spec.family = SceneSpec::Family::superellipsoid_union;
  Primitive body;
  body.kind = Primitive::Kind::superellipsoid;
  body.half = {0.95, 0.75, 0.6};
  body.exponent = 2.5;
  spec.parts = {body};
  spec.width = 128;
  spec.height = 128;
  spec.seed = 46;
  spec.camera.tx_min = 0.3;
  spec.camera.tx_max = 0.6;
  spec.camera.elev_min_deg = 10;
  spec.camera.elev_max_deg = 18;

  const Scene scene = render(instantiate_scene(spec, 0));
  const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
  const Grid<double> rectified = warp_bilinear(scene.intensity, t);
  RectifyTransform inv = t;
  std::swap(inv.T, inv.T_inv);
  const Grid<double> back = warp_bilinear(rectified, inv);

  // Compare a few pixels inside the mask (2 px erosion keeps the silhouette
  // and resampling boundary out of the measurement).
  double max_err = 0.0;
  int measured = 0;
  for (int r = 2; r < 126; ++r)
    for (int c = 2; c < 126; ++c) {
      bool interior = true;
      for (int dr = -2; dr <= 2 && interior; ++dr)
        for (int dc = -2; dc <= 2 && interior; ++dc)
          if (!scene.mask(c + dc, r + dr)) interior = false;
      if (!interior) continue;
      max_err = std::max(max_err, std::abs(back(c, r) - scene.intensity(c, r)));
      ++measured;
    }
  ASSERT_GT(measured, 500);
  EXPECT_LE(max_err, 0.02);
}

TEST(LiftFlow, ZeroFlowIsDegenerate) {
  Flow1D flow(16, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 16; ++c) flow.valid(c, r) = 1;
  const LiftResult res = lift_flow_to_correspondences(flow, identity_transform(16, 8), {16, 8});
  EXPECT_TRUE(res.pairs.empty());
  EXPECT_EQ(res.dropped_degenerate, 16 * 8);
}

TEST(LiftFlow, SinglePixelDisplacement) {
  Flow1D flow(64, 16);
  flow.valid(10, 5) = 1;
  flow.value(10, 5) = 20.0;
  const LiftResult res = lift_flow_to_correspondences(flow, identity_transform(64, 16), {64, 16});
  ASSERT_EQ(res.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(res.pairs[0].p.col, 10.0);
  EXPECT_DOUBLE_EQ(res.pairs[0].p.row, 5.0);
  EXPECT_DOUBLE_EQ(res.pairs[0].q.col, 30.0);
  EXPECT_DOUBLE_EQ(res.pairs[0].q.row, 5.0);
}

// Projecting ground-truth pairs into the rectified frame and lifting back
// recovers them to within a pixel (splat quantization only).
TEST(LiftFlow, GeneratorRoundTrip) {
  const SceneSpec spec = nondegenerate_spec(47);
  const Scene scene = render(instantiate_scene(spec, 1));
  const RectifyTransform t = build_transform(scene.camera, scene.frame, scene.mask);
  const Flow1D gt_flow = flow_from_pairs(scene.pairs, t);
  const LiftResult res = lift_flow_to_correspondences(gt_flow, t, scene.frame);
  ASSERT_GT(res.pairs.size(), 500u);

  const PairLookup lookup(scene.pairs, scene.frame);
  double sq_sum = 0.0;
  int n = 0;
  for (const auto& pr : res.pairs) {
    const int i = lookup.nearest_source(pr.p.col, pr.p.row, 1.0);
    if (i < 0) continue;
    const auto& gt = lookup.set()[i];
    sq_sum += std::pow(pr.q.col - gt.q.col, 2) + std::pow(pr.q.row - gt.q.row, 2);
    ++n;
  }
  ASSERT_GT(n, 500);
  EXPECT_LE(std::sqrt(sq_sum / n), 1.0);
}

}  // namespace
}  // namespace symdepth
