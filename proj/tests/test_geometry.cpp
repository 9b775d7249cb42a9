#include "symdepth/geometry.hpp"

#include <gtest/gtest.h>

#include "symdepth/rng.hpp"

namespace symdepth {
namespace {

Eigen::Matrix3d quarter_turn_z() {
  Eigen::Matrix3d m;
  m << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  return m;
}

TEST(Quaternion, IdentityMapsToIdentity) {
  EXPECT_TRUE(quat_to_rotation({1, 0, 0, 0}).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST(Quaternion, HalfTurnAboutZ) {
  Eigen::Matrix3d expect = Eigen::Vector3d(-1, -1, 1).asDiagonal();
  EXPECT_TRUE(quat_to_rotation({0, 0, 0, 1}).isApprox(expect, 1e-15));
}

TEST(Quaternion, QuarterTurnAboutZ) {
  const double h = std::sqrt(0.5);
  EXPECT_LT((quat_to_rotation({h, 0, 0, h}) - quarter_turn_z()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Quaternion, ZeroQuaternionRejected) {
  EXPECT_THROW(quat_to_rotation({0, 0, 0, 0}), invalid_input);
}

TEST(Quaternion, RandomConversionsAreRotations) {
  Rng rng(7001);
  for (int i = 0; i < 10000; ++i) {
    Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    if (q.norm() < 1e-3) continue;
    const Eigen::Matrix3d r = quat_to_rotation(q);
    ASSERT_TRUE(is_rotation(r, 1e-9)) << "sample " << i;
  }
}

TEST(Quaternion, RoundTripThroughMatrix) {
  Rng rng(7002);
  for (int i = 0; i < 1000; ++i) {
    Quaternion q = Quaternion{rng.normal(), rng.normal(), rng.normal(), rng.normal()}.normalized();
    const Eigen::Matrix3d r = quat_to_rotation(q);
    const Quaternion back = rotation_to_quat(r);
    const Eigen::Matrix3d r2 = quat_to_rotation(back);
    ASSERT_LT((r - r2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ExpMap, ZeroGivesIdentity) {
  EXPECT_TRUE(exp_map(Eigen::Vector3d::Zero()).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST(ExpMap, QuarterTurnAboutZ) {
  EXPECT_LT((exp_map({0, 0, M_PI / 2}) - quarter_turn_z()).cwiseAbs().maxCoeff(), 1e-14);
}

// Cross-check the two closed forms: exp_map against the axis-angle quaternion.
TEST(ExpMap, MatchesQuaternionRoute) {
  Rng rng(7003);
  for (int i = 0; i < 10000; ++i) {
    Eigen::Vector3d c = rng.unit_vector() * rng.uniform(0.0, 0.5);
    const double theta = c.norm();
    Quaternion q{std::cos(theta / 2), 0, 0, 0};
    if (theta > 0) {
      const Eigen::Vector3d axis = c / theta * std::sin(theta / 2);
      q = {std::cos(theta / 2), axis.x(), axis.y(), axis.z()};
    }
    ASSERT_LT((exp_map(c) - quat_to_rotation(q)).cwiseAbs().maxCoeff(), 1e-10) << "sample " << i;
  }
}

TEST(ExpMap, InverseComposesToIdentity) {
  Rng rng(7004);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d c = rng.unit_vector() * rng.uniform(0.0, 3.0);
    const Eigen::Matrix3d prod = exp_map(c) * exp_map(-c);
    ASSERT_LT((prod - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExpMap, TinyAngleSeriesBranch) {
  const Eigen::Vector3d c(1e-9, -2e-9, 5e-10);
  const Eigen::Matrix3d r = exp_map(c);
  EXPECT_TRUE(is_rotation(r, 1e-12));
  EXPECT_LT((r - (Eigen::Matrix3d::Identity() + skew(c))).cwiseAbs().maxCoeff(), 1e-17);
}

TEST(BackProject, OpticalAxis) {
  CameraPose cam;
  EXPECT_TRUE(back_project({0, 0}, 2.0, cam).isApprox(Eigen::Vector3d(0, 0, 2), 1e-15));
}

TEST(BackProject, OffAxisWithScaleAndTranslation) {
  CameraPose cam;
  cam.t_x = 1.5;
  cam.s = 2.0;
  EXPECT_TRUE(back_project({0.5, -0.25}, 4.0, cam).isApprox(Eigen::Vector3d(5.5, -2, 4), 1e-12));
}

TEST(BackProject, RotatedAxis) {
  CameraPose cam;
  cam.rotation = quarter_turn_z();
  EXPECT_TRUE(back_project({0.5, 0}, 1.0, cam).isApprox(Eigen::Vector3d(0, 0.5, 1), 1e-12));
}

TEST(BackProject, NonPositiveDepthRejected) {
  EXPECT_THROW(back_project({0, 0}, 0.0, CameraPose{}), invalid_input);
  EXPECT_THROW(back_project({0, 0}, -1.0, CameraPose{}), invalid_input);
}

TEST(BackProject, ProjectInverts) {
  Rng rng(7005);
  for (int i = 0; i < 1000; ++i) {
    CameraPose cam;
    cam.rotation = exp_map(rng.unit_vector() * rng.uniform(0.0, 3.0));
    cam.t_x = rng.uniform(-2.0, 2.0);
    cam.s = rng.uniform(0.2, 3.0);
    const Eigen::Vector2d n(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double z = rng.uniform(0.1, 10.0);
    Eigen::Vector2d n2;
    double z2 = 0;
    ASSERT_TRUE(project(back_project(n, z, cam), cam, &n2, &z2));
    ASSERT_LT((n - n2).norm(), 1e-10);
    ASSERT_NEAR(z, z2, 1e-10 * z);
  }
}

TEST(Reflect, BasicAndFixedPlane) {
  EXPECT_TRUE(reflect_x({1, 2, 3}).isApprox(Eigen::Vector3d(-1, 2, 3)));
  EXPECT_TRUE(reflect_x({0, 4, -7}).isApprox(Eigen::Vector3d(0, 4, -7)));
}

TEST(Reflect, InvolutionAndIsometry) {
  Rng rng(7006);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d b(rng.normal(), rng.normal(), rng.normal());
    ASSERT_TRUE(reflect_x(reflect_x(a)).isApprox(a, 1e-15));
    ASSERT_NEAR((reflect_x(a) - reflect_x(b)).norm(), (a - b).norm(), 1e-12);
  }
}

TEST(RayDepth, Examples) {
  EXPECT_DOUBLE_EQ(ray_depth({0, 0}, 5.0, 1.0), 5.0);
  EXPECT_NEAR(ray_depth({0.6, 0.8}, 1.0, 1.0), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ray_depth({1.2, 1.6}, 2.0, 0.5), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(RayDepth, AtLeastPerpendicularDepth) {
  Rng rng(7007);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector2d n(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double z = rng.uniform(0.1, 10.0);
    const double s = rng.uniform(0.2, 3.0);
    const double d = ray_depth(n, z, s);
    ASSERT_GE(d, z);
    if (n.norm() > 1e-12) ASSERT_GT(d, z);
  }
  EXPECT_DOUBLE_EQ(ray_depth({0, 0}, 3.0, 2.0), 3.0);
}

TEST(ImageFrame, PixelNormBijection) {
  const ImageFrame f{640, 480};
  Rng rng(7008);
  for (int i = 0; i < 500; ++i) {
    const PixelCoord p{rng.uniform(-0.5, 639.5), rng.uniform(-0.5, 479.5)};
    const PixelCoord back = f.to_pixel(f.to_norm(p));
    ASSERT_NEAR(p.col, back.col, 1e-10);
    ASSERT_NEAR(p.row, back.row, 1e-10);
  }
  // y points up: the top row has larger ny than the bottom row.
  EXPECT_GT(f.to_norm({0, 0}).y(), f.to_norm({0, 479}).y());
  // Longer side spans [-1, 1] at pixel edges.
  EXPECT_NEAR(f.to_norm({-0.5, 0}).x(), -1.0, 1e-12);
  EXPECT_NEAR(f.to_norm({639.5, 0}).x(), 1.0, 1e-12);
}

}  // namespace
}  // namespace symdepth
