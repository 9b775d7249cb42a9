#pragma once

#include <json.hpp>

#include <cmath>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"
#include "symdepth/grid.hpp"

namespace symdepth {

// ---------------------------------------------------------------------------
// Depth: rel, rms, sigma-threshold accuracies and the scale-invariant
// log-depth error  (1/N) sum e^2 - (1/(2N^2)) (sum e)^2,  e = log z - log z*.

struct DepthReport {
  double rel = 0.0;
  double rms = 0.0;
  double sigma_125 = 0.0;
  double sigma_15625 = 0.0;
  double scale_invariant = 0.0;
  int n_pixels = 0;
};

inline DepthReport depth_metrics(const DepthMap& pred, const DepthMap& gt, const Mask& mask) {
  if (!pred.same_size(gt.width(), gt.height()) || !pred.same_size(mask.width(), mask.height()))
    throw invalid_input("depth_metrics: size mismatch");
  DepthReport rep;
  double sum_rel = 0, sum_sq = 0, sum_e = 0, sum_e2 = 0;
  int n = 0, n125 = 0, n15625 = 0;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(c, r)) continue;
      const double z = pred(c, r), zs = gt(c, r);
      if (!(zs > 0.0)) throw invalid_input("depth_metrics: non-positive ground truth depth");
      if (!(z > 0.0)) throw invalid_input("depth_metrics: non-positive predicted depth");
      ++n;
      sum_rel += std::abs(z - zs) / zs;
      sum_sq += (z - zs) * (z - zs);
      const double ratio = std::max(z / zs, zs / z);
      n125 += ratio < 1.25 ? 1 : 0;
      n15625 += ratio < 1.25 * 1.25 ? 1 : 0;
      const double e = std::log(z) - std::log(zs);
      sum_e += e;
      sum_e2 += e * e;
    }
  if (n == 0) throw invalid_input("depth_metrics: empty mask");
  rep.n_pixels = n;
  rep.rel = sum_rel / n;
  rep.rms = std::sqrt(sum_sq / n);
  rep.sigma_125 = static_cast<double>(n125) / n;
  rep.sigma_15625 = static_cast<double>(n15625) / n;
  rep.scale_invariant = sum_e2 / n - (sum_e * sum_e) / (2.0 * static_cast<double>(n) * n);
  return rep;
}

// ---------------------------------------------------------------------------
// Pose: rotation angle in degrees, translation error relative to the object
// size, |s - s*|, a derived field-of-view angle difference, and the squared
// pose loss |q/<q>-q*|^2 + |t_x-t_x*|^2 + (s-s*)^2 with the quaternion sign
// aligned to the ground truth (q and -q encode the same rotation).

struct PoseReport {
  double rot_err_deg = 0.0;
  double tx_rel_err = 0.0;
  double s_abs_err = 0.0;
  double fov_err_deg = 0.0;
  double pose_loss = 0.0;
};

inline PoseReport pose_metrics(const CameraPose& pred, const CameraPose& gt, double object_size) {
  if (!(object_size > 0.0)) throw invalid_input("pose_metrics: object_size must be positive");
  PoseReport rep;
  const Eigen::Matrix3d rel = pred.rotation * gt.rotation.transpose();
  const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  rep.rot_err_deg = std::acos(cos_angle) * 180.0 / M_PI;
  rep.tx_rel_err = std::abs(pred.t_x - gt.t_x) / object_size;
  rep.s_abs_err = std::abs(pred.s - gt.s);
  rep.fov_err_deg = std::abs(2.0 * std::atan(1.0 / pred.s) - 2.0 * std::atan(1.0 / gt.s)) * 180.0 / M_PI;

  Quaternion qp = rotation_to_quat(pred.rotation);
  const Quaternion qg = rotation_to_quat(gt.rotation);
  const double dot = qp.w * qg.w + qp.x * qg.x + qp.y * qg.y + qp.z * qg.z;
  if (dot < 0) qp = {-qp.w, -qp.x, -qp.y, -qp.z};
  const double dq = (qp.w - qg.w) * (qp.w - qg.w) + (qp.x - qg.x) * (qp.x - qg.x) +
                    (qp.y - qg.y) * (qp.y - qg.y) + (qp.z - qg.z) * (qp.z - qg.z);
  rep.pose_loss = dq + (pred.t_x - gt.t_x) * (pred.t_x - gt.t_x) + (pred.s - gt.s) * (pred.s - gt.s);
  return rep;
}

// ---------------------------------------------------------------------------
// Normals: mean L2 chord error and mean angular error in degrees.

struct NormalReport {
  double mean_l2 = 0.0;
  double mean_angle_deg = 0.0;
  int n_pixels = 0;
};

inline NormalReport normal_metrics(const NormalMap& pred, const NormalMap& gt, const Mask& mask) {
  if (!pred.same_size(gt.width(), gt.height()) || !pred.same_size(mask.width(), mask.height()))
    throw invalid_input("normal_metrics: size mismatch");
  NormalReport rep;
  double sum_l2 = 0, sum_deg = 0;
  int n = 0;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(c, r)) continue;
      const Eigen::Vector3d a = pred(c, r).normalized();
      const Eigen::Vector3d b = gt(c, r).normalized();
      sum_l2 += (a - b).norm();
      sum_deg += std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * 180.0 / M_PI;
      ++n;
    }
  if (n == 0) throw invalid_input("normal_metrics: empty mask");
  rep.n_pixels = n;
  rep.mean_l2 = sum_l2 / n;
  rep.mean_angle_deg = sum_deg / n;
  return rep;
}

// ---------------------------------------------------------------------------
// Symmetry: mean pixel distance between predicted targets and the ground
// truth target of the nearest ground-truth source; plus the 1D flow MSE on
// shared valid rectified pixels.

struct SymReport {
  double mean_pixel_err = 0.0;
  double flow_mse = 0.0;
  int n_pairs = 0;
  int n_unmatched = 0;
};

inline SymReport symmetry_metrics(const CorrespondenceSet& pred, const CorrespondenceSet& gt,
                                  const ImageFrame& frame, double source_match_radius = 0.75) {
  SymReport rep;
  if (pred.empty()) throw invalid_input("symmetry_metrics: no predicted pairs");
  const PairLookup lookup(gt, frame);
  double sum = 0;
  for (const auto& pr : pred) {
    const int i = lookup.nearest_source(pr.p.col, pr.p.row, source_match_radius);
    if (i < 0) {
      ++rep.n_unmatched;
      continue;
    }
    sum += std::hypot(pr.q.col - gt[i].q.col, pr.q.row - gt[i].q.row);
    ++rep.n_pairs;
  }
  if (rep.n_pairs == 0) throw invalid_input("symmetry_metrics: no overlapping pairs");
  rep.mean_pixel_err = sum / rep.n_pairs;
  return rep;
}

inline double flow_mse(const Flow1D& pred, const Flow1D& gt) {
  if (!pred.value.same_size(gt.value.width(), gt.value.height()))
    throw invalid_input("flow_mse: size mismatch");
  double sum = 0;
  int n = 0;
  for (int r = 0; r < pred.value.height(); ++r)
    for (int c = 0; c < pred.value.width(); ++c) {
      if (!pred.valid(c, r) || !gt.valid(c, r)) continue;
      const double d = pred.value(c, r) - gt.value(c, r);
      sum += d * d;
      ++n;
    }
  if (n == 0) throw invalid_input("flow_mse: no shared valid pixels");
  return sum / n;
}

/// Bounding-box diagonal of the masked world points; the reference object
/// size for relative translation errors.
inline double object_diameter(const DepthMap& depth, const Mask& mask, const CameraPose& cam,
                              const ImageFrame& frame) {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = Eigen::Vector3d::Constant(-1e300);
  int n = 0;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(c, r)) continue;
      const Eigen::Vector3d x = back_project(
          frame.to_norm({static_cast<double>(c), static_cast<double>(r)}), depth(c, r), cam);
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
      ++n;
    }
  if (n == 0) throw invalid_input("object_diameter: empty mask");
  return (hi - lo).norm();
}

// JSON bindings used by report files.

inline nlohmann::json to_json(const DepthReport& r) {
  return {{"rel", r.rel},
          {"rms", r.rms},
          {"sigma_125", r.sigma_125},
          {"sigma_15625", r.sigma_15625},
          {"scale_invariant", r.scale_invariant},
          {"n_pixels", r.n_pixels}};
}

inline nlohmann::json to_json(const PoseReport& r) {
  return {{"rot_err_deg", r.rot_err_deg},
          {"tx_rel_err", r.tx_rel_err},
          {"s_abs_err", r.s_abs_err},
          {"fov_err_deg", r.fov_err_deg},
          {"pose_loss", r.pose_loss}};
}

inline nlohmann::json to_json(const SymReport& r) {
  return {{"mean_pixel_err", r.mean_pixel_err},
          {"flow_mse", r.flow_mse},
          {"n_pairs", r.n_pairs},
          {"n_unmatched", r.n_unmatched}};
}

}  // namespace symdepth
