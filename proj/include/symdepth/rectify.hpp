#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"
#include "symdepth/grid.hpp"

namespace symdepth {

struct VanishingPoints {
  // Homogeneous coordinates in the normalized image frame. Finite points are
  // scaled to w = 1; points at infinity carry their direction with w = 0.
  Eigen::Vector3d v1;  // image of the world x direction
  Eigen::Vector3d v2;  // image of the world y direction
  bool v1_at_infinity = false;
  bool v2_at_infinity = false;
};

/// Vanishing points of the world x/y directions from the camera rotation and
/// scale: v1 ~ (r2 x r3) and v2 ~ (r1 x r3) over the rows of R, divided by
/// their z component and by s. A z component below 1e-9 flags the point at
/// infinity and the direction is returned instead.
inline VanishingPoints vanishing_points(const Eigen::Matrix3d& rotation, double s) {
  if (!(s > 0.0)) throw invalid_input("vanishing_points requires s > 0");
  VanishingPoints out;
  const Eigen::Vector3d r1 = rotation.row(0), r2 = rotation.row(1), r3 = rotation.row(2);
  const auto one = [&](const Eigen::Vector3d& cross, Eigen::Vector3d* v, bool* at_inf) {
    if (std::abs(cross.z()) < 1e-9) {
      *at_inf = true;
      Eigen::Vector2d dir(cross.x(), cross.y());
      if (dir.norm() > 0) dir.normalize();
      if (dir.x() < 0 || (dir.x() == 0 && dir.y() < 0)) dir = -dir;  // canonical sign
      *v = Eigen::Vector3d(dir.x(), dir.y(), 0.0);
    } else {
      *at_inf = false;
      *v = Eigen::Vector3d(cross.x() / (s * cross.z()), cross.y() / (s * cross.z()), 1.0);
    }
  };
  one(r2.cross(r3), &out.v1, &out.v1_at_infinity);
  one(r1.cross(r3), &out.v2, &out.v2_at_infinity);
  return out;
}

/// Original -> rectified pixel transform. The projective part H (defined in
/// the normalized image frame, third row = v1 x v2) sends the vanishing line
/// to infinity; the similarity A then rotates the image of the world x
/// direction onto the +col axis and fits the warped mask to the canvas with a
/// 4 px margin. With both vanishing points at infinity the projective part is
/// the identity and only the fit remains.
struct RectifyTransform {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();      // normalized frame
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();      // pixel frame similarity
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();      // pixel frame: A * N^-1 H N
  Eigen::Matrix3d T_inv = Eigen::Matrix3d::Identity();
  VanishingPoints vps;
  bool degenerate = false;
  int out_width = 0;
  int out_height = 0;
};

namespace detail {

inline Eigen::Matrix3d norm_matrix(const ImageFrame& f) {
  const double m = f.unit();
  Eigen::Matrix3d n;
  n << 2.0 / m, 0.0, (1.0 - f.width) / m,
       0.0, -2.0 / m, (f.height - 1.0) / m,
       0.0, 0.0, 1.0;
  return n;
}

}  // namespace detail

inline std::optional<PixelCoord> apply_homography(const Eigen::Matrix3d& m, const PixelCoord& p) {
  const Eigen::Vector3d h = m * Eigen::Vector3d(p.col, p.row, 1.0);
  if (std::abs(h.z()) < 1e-12) return std::nullopt;
  return PixelCoord{h.x() / h.z(), h.y() / h.z()};
}

inline RectifyTransform build_transform(const CameraPose& cam, const ImageFrame& frame,
                                        const Mask& mask) {
  if (!mask.same_size(frame.width, frame.height))
    throw invalid_input("build_transform: mask size mismatch");
  if (count_mask(mask) == 0) throw invalid_input("build_transform: empty mask");

  RectifyTransform out;
  out.vps = vanishing_points(cam.rotation, cam.s);
  out.degenerate = out.vps.v1_at_infinity && out.vps.v2_at_infinity;
  out.out_width = frame.width;
  out.out_height = frame.height;

  if (!out.degenerate) {
    // The third row is the vanishing line v1 x v2, rescaled so the mask
    // centroid keeps unit weight: a projectively equivalent choice that makes
    // H roughly scale-preserving around the object and fixes the sign of w
    // across the mask.
    Eigen::Vector3d l = out.vps.v1.cross(out.vps.v2);
    double sum_c = 0, sum_r = 0;
    int n_mask = 0;
    for (int r = 0; r < mask.height(); ++r)
      for (int c = 0; c < mask.width(); ++c)
        if (mask(c, r)) {
          sum_c += c;
          sum_r += r;
          ++n_mask;
        }
    const Eigen::Vector2d centroid =
        frame.to_norm({sum_c / n_mask, sum_r / n_mask});
    const double w0 = l.x() * centroid.x() + l.y() * centroid.y() + l.z();
    if (std::abs(w0) < 1e-12) throw invalid_input("build_transform: vanishing line crosses the mask");
    l /= w0;
    out.H << 1, 0, 0, 0, 1, 0, l.x(), l.y(), l.z();
  }

  const Eigen::Matrix3d n = detail::norm_matrix(frame);
  Eigen::Matrix3d proj_px = n.inverse() * out.H * n;
  if (std::abs(proj_px.determinant()) < 1e-12) {
    // Vanishing points collinear with the origin; fall back to the fit alone.
    out.degenerate = true;
    out.H = Eigen::Matrix3d::Identity();
    proj_px = Eigen::Matrix3d::Identity();
  }

  // H maps v1 to the direction (v1.x, v1.y, 0) in the normalized frame; the
  // same direction in pixel coordinates is (v1.x, -v1.y) since pixel rows
  // grow downward.
  const double theta = std::atan2(-out.vps.v1.y(), out.vps.v1.x());
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  rot(0, 0) = std::cos(theta);
  rot(0, 1) = std::sin(theta);
  rot(1, 0) = -std::sin(theta);
  rot(1, 1) = std::cos(theta);

  const Eigen::Matrix3d rp = rot * proj_px;
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(c, r)) continue;
      const auto q = apply_homography(rp, {static_cast<double>(c), static_cast<double>(r)});
      if (!q) continue;
      min_x = std::min(min_x, q->col);
      max_x = std::max(max_x, q->col);
      min_y = std::min(min_y, q->row);
      max_y = std::max(max_y, q->row);
    }
  if (!(min_x <= max_x)) throw invalid_input("build_transform: mask vanished under warp");

  constexpr double kMargin = 4.0;
  const double bw = std::max(max_x - min_x, 1e-9);
  const double bh = std::max(max_y - min_y, 1e-9);
  double scale = std::min((frame.width - 1 - 2 * kMargin) / bw, (frame.height - 1 - 2 * kMargin) / bh);
  scale = std::clamp(scale, 0.1, 10.0);

  Eigen::Matrix3d fit = Eigen::Matrix3d::Identity();
  fit(0, 0) = fit(1, 1) = scale;
  fit(0, 2) = (frame.width - 1) / 2.0 - scale * (min_x + max_x) / 2.0;
  fit(1, 2) = (frame.height - 1) / 2.0 - scale * (min_y + max_y) / 2.0;

  out.A = fit * rot;
  out.T = out.A * proj_px;
  out.T_inv = out.T.inverse();
  return out;
}

/// Inverse-mapping warp with bilinear interpolation; pixels that map outside
/// the source are set to `fill`.
inline Grid<double> warp_bilinear(const Grid<double>& src, const RectifyTransform& t,
                                  double fill = 0.0) {
  Grid<double> out(t.out_width, t.out_height, fill);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) {
      const auto p = apply_homography(t.T_inv, {static_cast<double>(c), static_cast<double>(r)});
      if (!p) continue;
      double v;
      if (sample_bilinear(src, p->col, p->row, &v)) out(c, r) = v;
    }
  return out;
}

/// Nearest-neighbor warp for masks.
inline Mask warp_nearest(const Mask& src, const RectifyTransform& t) {
  Mask out(t.out_width, t.out_height, 0);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) {
      const auto p = apply_homography(t.T_inv, {static_cast<double>(c), static_cast<double>(r)});
      if (!p) continue;
      const int sc = static_cast<int>(std::lround(p->col));
      const int sr = static_cast<int>(std::lround(p->row));
      if (src.in_bounds(sc, sr)) out(c, r) = src(sc, sr);
    }
  return out;
}

struct LiftResult {
  CorrespondenceSet pairs;
  int dropped_degenerate = 0;
  int dropped_out_of_bounds = 0;
};

/// Transfers a 1D rectified flow back to 2D pixel pairs on the original
/// image: each valid rectified pixel r with displacement f maps to the pair
/// (T^-1 r, T^-1 (r + (f, 0))).
inline LiftResult lift_flow_to_correspondences(const Flow1D& flow, const RectifyTransform& t,
                                               const ImageFrame& original) {
  LiftResult out;
  for (int r = 0; r < flow.value.height(); ++r)
    for (int c = 0; c < flow.value.width(); ++c) {
      if (!flow.valid(c, r)) continue;
      const double f = flow.value(c, r);
      const auto p = apply_homography(t.T_inv, {static_cast<double>(c), static_cast<double>(r)});
      const auto q = apply_homography(t.T_inv, {c + f, static_cast<double>(r)});
      if (!p || !q || !original.contains(*p) || !original.contains(*q)) {
        ++out.dropped_out_of_bounds;
        continue;
      }
      if (p->col == q->col && p->row == q->row) {
        ++out.dropped_degenerate;
        continue;
      }
      out.pairs.push_back({*p, *q, flow.score(c, r)});
    }
  return out;
}

/// Projects pixel pairs into the rectified frame and splats them onto integer
/// pixels as a 1D flow (nearest source pixel wins). Used to build reference
/// flows from ground-truth pairs.
inline Flow1D flow_from_pairs(const CorrespondenceSet& pairs, const RectifyTransform& t) {
  Flow1D flow(t.out_width, t.out_height);
  Grid<double> best_dist(t.out_width, t.out_height, 1e300);
  for (const auto& pr : pairs) {
    const auto p = apply_homography(t.T, pr.p);
    const auto q = apply_homography(t.T, pr.q);
    if (!p || !q) continue;
    const int c = static_cast<int>(std::lround(p->col));
    const int r = static_cast<int>(std::lround(p->row));
    if (!flow.value.in_bounds(c, r)) continue;
    const double dc = p->col - c, dr = p->row - r;
    const double d2 = dc * dc + dr * dr;
    if (d2 >= best_dist(c, r)) continue;
    best_dist(c, r) = d2;
    flow.value(c, r) = q->col - p->col;
    flow.valid(c, r) = 1;
    flow.score(c, r) = pr.score;
  }
  return flow;
}

}  // namespace symdepth
