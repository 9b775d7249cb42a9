#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

#include "symdepth/errors.hpp"

namespace symdepth {

/// Unit quaternion (w, x, y, z); w is the real part.
struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    const double n = norm();
    if (n == 0.0) throw invalid_input("cannot normalize a zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Rotation matrix from a quaternion:
///   R = (1 - 2|q_n|^2) I + 2 q_n q_n^T + 2 q_r [q_n]x
/// The input is normalized first; a zero quaternion is rejected.
inline Eigen::Matrix3d quat_to_rotation(const Quaternion& q_in) {
  const Quaternion q = q_in.normalized();
  const Eigen::Vector3d qn(q.x, q.y, q.z);
  return (1.0 - 2.0 * qn.squaredNorm()) * Eigen::Matrix3d::Identity() +
         2.0 * qn * qn.transpose() + 2.0 * q.w * skew(qn);
}

/// Quaternion from a rotation matrix, canonical sign (w >= 0).
inline Quaternion rotation_to_quat(const Eigen::Matrix3d& r) {
  Quaternion q;
  const double tr = r.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (r(2, 1) - r(1, 2)) / s;
    q.y = (r(0, 2) - r(2, 0)) / s;
    q.z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  if (q.w < 0.0) {
    q.w = -q.w;
    q.x = -q.x;
    q.y = -q.y;
    q.z = -q.z;
  }
  return q.normalized();
}

/// Rotation exponential map:
///   exp(c x) = I + sin|c|/|c| [c]x + (1 - cos|c|)/|c|^2 [c]x^2
/// with a series fallback near |c| = 0.
inline Eigen::Matrix3d exp_map(const Eigen::Vector3d& c) {
  const double theta = c.norm();
  double a, b;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const Eigen::Matrix3d cx = skew(c);
  return Eigen::Matrix3d::Identity() + a * cx + b * (cx * cx);
}

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
  const double ortho =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

/// Five-parameter camera: rotation R, translation (t_x, 0, 0), scale s.
/// World points relate to pixels by  p = z R (s nx, s ny, 1)^T + (t_x,0,0)^T.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double t_x = 0.0;
  double s = 1.0;

  Eigen::Vector3d translation() const { return {t_x, 0.0, 0.0}; }
};

/// Fractional pixel position, origin at the top-left pixel center.
struct PixelCoord {
  double col = 0.0;
  double row = 0.0;
};

/// Maps between pixel coordinates and the normalized image frame used by the
/// camera model. The longer image side spans [-1, 1] and y points up:
///   nx = (2(col + 1/2) - W) / max(W,H),  ny = (H - 2(row + 1/2)) / max(W,H).
struct ImageFrame {
  int width = 0;
  int height = 0;

  double unit() const { return static_cast<double>(std::max(width, height)); }

  Eigen::Vector2d to_norm(const PixelCoord& p) const {
    const double m = unit();
    return {(2.0 * (p.col + 0.5) - width) / m, (height - 2.0 * (p.row + 0.5)) / m};
  }

  PixelCoord to_pixel(const Eigen::Vector2d& n) const {
    const double m = unit();
    return {(m * n.x() + width) / 2.0 - 0.5, (height - m * n.y()) / 2.0 - 0.5};
  }

  bool contains(const PixelCoord& p) const {
    return p.col >= -0.5 && p.col <= width - 0.5 && p.row >= -0.5 &&
           p.row <= height - 0.5;
  }
};

/// Back-projects a normalized image point with depth z into the world frame.
inline Eigen::Vector3d back_project(const Eigen::Vector2d& norm_xy, double z,
                                    const CameraPose& cam) {
  if (!(z > 0.0)) throw invalid_input("back_project requires positive depth");
  const Eigen::Vector3d ray(cam.s * norm_xy.x(), cam.s * norm_xy.y(), 1.0);
  return z * (cam.rotation * ray) + cam.translation();
}

/// Inverse of back_project. Returns false when the point lies at or behind
/// the camera plane (z <= 0).
inline bool project(const Eigen::Vector3d& world, const CameraPose& cam,
                    Eigen::Vector2d* norm_xy, double* z) {
  const Eigen::Vector3d pc = cam.rotation.transpose() * (world - cam.translation());
  if (!(pc.z() > 0.0)) return false;
  *z = pc.z();
  *norm_xy = Eigen::Vector2d(pc.x() / (cam.s * pc.z()), pc.y() / (cam.s * pc.z()));
  return true;
}

/// Reflection across the symmetry plane x = 0.
inline Eigen::Vector3d reflect_x(const Eigen::Vector3d& p) {
  return {-p.x(), p.y(), p.z()};
}

/// Length of the pixel's camera ray per unit depth.
inline double ray_scale(const Eigen::Vector2d& norm_xy, double s) {
  return Eigen::Vector3d(s * norm_xy.x(), s * norm_xy.y(), 1.0).norm();
}

/// Distance from the camera center to the 3D point along the pixel's ray,
/// d = z |(s nx, s ny, 1)|.
inline double ray_depth(const Eigen::Vector2d& norm_xy, double z, double s) {
  if (!(z > 0.0)) throw invalid_input("ray_depth requires positive depth");
  return z * ray_scale(norm_xy, s);
}

}  // namespace symdepth
