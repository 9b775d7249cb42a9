#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"
#include "symdepth/grid.hpp"
#include "symdepth/rng.hpp"

namespace symdepth {

// ---------------------------------------------------------------------------
// Implicit primitives. Each evaluates an inside-outside function F (negative
// inside) and an analytic outward gradient; unions take the pointwise min.

struct Primitive {
  enum class Kind { box, superellipsoid, extrusion_rect, extrusion_disc };
  Kind kind = Kind::box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half = Eigen::Vector3d::Ones();  // box/ellipsoid semi-axes;
                                                   // extrusions: (x, y-extent, z)
  double exponent = 4.0;                           // superellipsoid power
  double rounding = 0.0;                           // extrusion_rect corner radius
  int tone = 0;                                    // albedo group, shared with twin
};

namespace sdf {

inline double box_value(const Eigen::Vector3d& q, const Eigen::Vector3d& h) {
  const Eigen::Vector3d d = q.cwiseAbs() - h;
  const Eigen::Vector3d dpos = d.cwiseMax(0.0);
  return dpos.norm() + std::min(d.maxCoeff(), 0.0);
}

inline Eigen::Vector3d box_gradient(const Eigen::Vector3d& q, const Eigen::Vector3d& h) {
  const Eigen::Vector3d d = q.cwiseAbs() - h;
  if ((d.array() > 0.0).any()) {
    Eigen::Vector3d g = d.cwiseMax(0.0);
    for (int k = 0; k < 3; ++k) g[k] *= q[k] < 0 ? -1.0 : 1.0;
    const double n = g.norm();
    return n > 0 ? Eigen::Vector3d(g / n) : Eigen::Vector3d(0, 0, 1);
  }
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (d[k] > d[axis]) axis = k;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  g[axis] = q[axis] < 0 ? -1.0 : 1.0;
  return g;
}

inline double superellipsoid_value(const Eigen::Vector3d& q, const Eigen::Vector3d& h,
                                   double r) {
  double f = -1.0;
  for (int k = 0; k < 3; ++k) f += std::pow(std::abs(q[k]) / h[k], r);
  return f;
}

inline Eigen::Vector3d superellipsoid_gradient(const Eigen::Vector3d& q,
                                               const Eigen::Vector3d& h, double r) {
  Eigen::Vector3d g;
  for (int k = 0; k < 3; ++k) {
    const double t = std::abs(q[k]) / h[k];
    g[k] = (r / h[k]) * std::pow(t, r - 1.0) * (q[k] < 0 ? -1.0 : 1.0);
  }
  const double n = g.norm();
  return n > 0 ? Eigen::Vector3d(g / n) : Eigen::Vector3d(0, 0, 1);
}

// 2D profile in the (x, z) plane, extruded along y.
inline double profile_value(const Primitive& p, double x, double z) {
  if (p.kind == Primitive::Kind::extrusion_disc) {
    return std::hypot(x, z) - p.half.x();
  }
  const Eigen::Vector2d b(p.half.x() - p.rounding, p.half.z() - p.rounding);
  const Eigen::Vector2d d(std::abs(x) - b.x(), std::abs(z) - b.y());
  const Eigen::Vector2d dpos = d.cwiseMax(0.0);
  return dpos.norm() + std::min(d.maxCoeff(), 0.0) - p.rounding;
}

inline Eigen::Vector2d profile_gradient(const Primitive& p, double x, double z) {
  if (p.kind == Primitive::Kind::extrusion_disc) {
    const double n = std::hypot(x, z);
    return n > 0 ? Eigen::Vector2d(x / n, z / n) : Eigen::Vector2d(1, 0);
  }
  const Eigen::Vector2d b(p.half.x() - p.rounding, p.half.z() - p.rounding);
  const Eigen::Vector2d d(std::abs(x) - b.x(), std::abs(z) - b.y());
  if (d.x() > 0.0 || d.y() > 0.0) {
    Eigen::Vector2d g = d.cwiseMax(0.0);
    g.x() *= x < 0 ? -1.0 : 1.0;
    g.y() *= z < 0 ? -1.0 : 1.0;
    const double n = g.norm();
    return n > 0 ? Eigen::Vector2d(g / n) : Eigen::Vector2d(1, 0);
  }
  if (d.x() >= d.y()) return {x < 0 ? -1.0 : 1.0, 0.0};
  return {0.0, z < 0 ? -1.0 : 1.0};
}

inline double extrusion_value(const Primitive& p, const Eigen::Vector3d& q) {
  const double wx = profile_value(p, q.x(), q.z());
  const double wy = std::abs(q.y()) - p.half.y();
  const Eigen::Vector2d w(wx, wy);
  const Eigen::Vector2d wpos = w.cwiseMax(0.0);
  return std::min(std::max(wx, wy), 0.0) + wpos.norm();
}

inline Eigen::Vector3d extrusion_gradient(const Primitive& p, const Eigen::Vector3d& q) {
  const double wx = profile_value(p, q.x(), q.z());
  const double wy = std::abs(q.y()) - p.half.y();
  const double sy = q.y() < 0 ? -1.0 : 1.0;
  const Eigen::Vector2d g2 = profile_gradient(p, q.x(), q.z());
  const Eigen::Vector3d grad_side(g2.x(), 0.0, g2.y());
  const Eigen::Vector3d grad_cap(0.0, sy, 0.0);
  if (wx > 0.0 && wy > 0.0) {
    Eigen::Vector3d g = wx * grad_side + wy * grad_cap;
    const double n = g.norm();
    return n > 0 ? Eigen::Vector3d(g / n) : grad_side;
  }
  return wx >= wy ? grad_side : grad_cap;
}

}  // namespace sdf

inline double primitive_value(const Primitive& p, const Eigen::Vector3d& x) {
  const Eigen::Vector3d q = x - p.center;
  switch (p.kind) {
    case Primitive::Kind::box: return sdf::box_value(q, p.half);
    case Primitive::Kind::superellipsoid:
      return sdf::superellipsoid_value(q, p.half, p.exponent);
    default: return sdf::extrusion_value(p, q);
  }
}

inline Eigen::Vector3d primitive_gradient(const Primitive& p, const Eigen::Vector3d& x) {
  const Eigen::Vector3d q = x - p.center;
  switch (p.kind) {
    case Primitive::Kind::box: return sdf::box_gradient(q, p.half);
    case Primitive::Kind::superellipsoid:
      return sdf::superellipsoid_gradient(q, p.half, p.exponent);
    default: return sdf::extrusion_gradient(p, q);
  }
}

inline double primitive_bound_radius(const Primitive& p) {
  switch (p.kind) {
    case Primitive::Kind::box:
    case Primitive::Kind::superellipsoid: return p.half.norm();
    case Primitive::Kind::extrusion_rect:
      return Eigen::Vector3d(p.half.x(), p.half.y(), p.half.z()).norm();
    default: return Eigen::Vector3d(p.half.x(), p.half.y(), p.half.x()).norm();
  }
}

/// Mirror twin across the plane x = 0.
inline Primitive mirrored(const Primitive& p) {
  Primitive m = p;
  m.center.x() = -m.center.x();
  return m;
}

// ---------------------------------------------------------------------------
// Scene specification and instantiation.

struct CameraRanges {
  double dist_min = 2.8, dist_max = 4.2;        // distance to the object center
  double elev_min_deg = 8.0, elev_max_deg = 26.0;  // magnitude, random sign
  double tx_min = 0.25, tx_max = 0.9;              // magnitude, random sign
  double roll_deg = 8.0;
  double look_jitter_deg = 4.0;
  double s_min = 0.36, s_max = 0.5;
  bool fronto = false;  // exact fronto-parallel pose (R = I), for fixtures
};

struct SceneSpec {
  enum class Family { box_union, mirrored_extrusion, superellipsoid_union };
  Family family = Family::superellipsoid_union;
  std::vector<Primitive> parts;  // canonical object frame; empty = randomize
  CameraRanges camera;
  int width = 128, height = 128;
  std::uint64_t seed = 0;
  bool light_in_plane = true;
};

/// A fully placed scene: parts in world coordinates (twins included), camera,
/// light and texture parameters. Everything downstream is deterministic.
struct SceneDefinition {
  std::vector<Primitive> parts;
  CameraPose camera;
  ImageFrame frame;
  Eigen::Vector3d light = Eigen::Vector3d(0, 0.4, -0.9).normalized();
  // Procedural albedo: tone per group plus three mirror-symmetric waves.
  std::vector<double> tones;
  Eigen::Vector3d wave_freq = Eigen::Vector3d(11, 14, 17);
  Eigen::Matrix3d wave_dirs = Eigen::Matrix3d::Identity();
  Eigen::Vector3d wave_phase = Eigen::Vector3d::Zero();
  std::uint64_t seed = 0;
};

inline double scene_value(const SceneDefinition& def, const Eigen::Vector3d& x,
                          int* argmin = nullptr) {
  double best = 1e300;
  int best_i = 0;
  for (std::size_t i = 0; i < def.parts.size(); ++i) {
    const double v = primitive_value(def.parts[i], x);
    if (v < best) {
      best = v;
      best_i = static_cast<int>(i);
    }
  }
  if (argmin) *argmin = best_i;
  return best;
}

namespace detail {

inline std::vector<Primitive> random_parts(SceneSpec::Family family, Rng& rng) {
  std::vector<Primitive> parts;
  const auto u = [&](double a, double b) { return rng.uniform(a, b); };
  switch (family) {
    case SceneSpec::Family::box_union: {
      Primitive body;
      body.kind = Primitive::Kind::box;
      body.center = {0.0, u(-0.15, 0.15), u(-0.15, 0.15)};
      body.half = {u(0.55, 0.9), u(0.4, 0.7), u(0.35, 0.6)};
      body.tone = 0;
      parts.push_back(body);
      const int extra = 1 + static_cast<int>(rng.below(2));
      for (int i = 0; i < extra; ++i) {
        Primitive side;
        side.kind = Primitive::Kind::box;
        side.center = {u(0.35, 0.8), u(-0.45, 0.45), u(-0.35, 0.35)};
        side.half = {u(0.18, 0.4), u(0.18, 0.45), u(0.15, 0.4)};
        side.tone = 1 + i;
        parts.push_back(side);
      }
      break;
    }
    case SceneSpec::Family::superellipsoid_union: {
      Primitive body;
      body.kind = Primitive::Kind::superellipsoid;
      body.center = {0.0, u(-0.1, 0.1), u(-0.1, 0.1)};
      body.half = {u(0.6, 0.95), u(0.45, 0.75), u(0.4, 0.65)};
      body.exponent = u(0.0, 1.0) < 0.5 ? 2.5 : 4.0;
      body.tone = 0;
      parts.push_back(body);
      const int extra = static_cast<int>(rng.below(3));  // 0..2 side lobes
      for (int i = 0; i < extra; ++i) {
        Primitive side;
        side.kind = Primitive::Kind::superellipsoid;
        side.center = {u(0.4, 0.75), u(-0.35, 0.35), u(-0.3, 0.3)};
        side.half = {u(0.22, 0.4), u(0.22, 0.42), u(0.2, 0.38)};
        side.exponent = 3.0;
        side.tone = 1 + i;
        parts.push_back(side);
      }
      break;
    }
    case SceneSpec::Family::mirrored_extrusion: {
      Primitive slab;
      slab.kind = Primitive::Kind::extrusion_rect;
      slab.center = {0.0, u(-0.1, 0.1), u(-0.1, 0.1)};
      slab.half = {u(0.55, 0.85), u(0.45, 0.7), u(0.3, 0.5)};
      slab.rounding = u(0.04, 0.12);
      slab.tone = 0;
      parts.push_back(slab);
      const int extra = 1 + static_cast<int>(rng.below(2));
      for (int i = 0; i < extra; ++i) {
        Primitive rod;
        rod.kind = Primitive::Kind::extrusion_disc;
        rod.center = {u(0.35, 0.7), u(-0.5, -0.1), u(-0.25, 0.25)};
        rod.half = {u(0.12, 0.22), u(0.35, 0.6), 0.0};
        rod.tone = 1 + i;
        parts.push_back(rod);
      }
      break;
    }
  }
  return parts;
}

inline CameraPose sample_camera(const CameraRanges& cr, const Eigen::Vector3d& target, Rng& rng) {
  CameraPose cam;
  cam.s = rng.uniform(cr.s_min, cr.s_max);
  if (cr.fronto) {
    cam.rotation = Eigen::Matrix3d::Identity();
    cam.t_x = 0.0;
    return cam;
  }
  const double sign_tx = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  cam.t_x = sign_tx * rng.uniform(cr.tx_min, cr.tx_max);

  const Eigen::Vector3d eye(cam.t_x, 0.0, 0.0);
  const Eigen::Vector3d fwd = (target - eye).normalized();
  Eigen::Vector3d right = Eigen::Vector3d(0, 1, 0).cross(fwd);
  if (right.norm() < 1e-9) right = Eigen::Vector3d(1, 0, 0);
  right.normalize();
  const Eigen::Vector3d up = fwd.cross(right);
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = up;
  r.col(2) = fwd;

  const double deg = M_PI / 180.0;
  const double jx = rng.normal(0.0, cr.look_jitter_deg * deg / 2.0);
  const double jy = rng.normal(0.0, cr.look_jitter_deg * deg / 2.0);
  const double roll = rng.uniform(-cr.roll_deg, cr.roll_deg) * deg;
  cam.rotation = r * exp_map({jx, jy, roll});
  return cam;
}

}  // namespace detail

/// Places parts (mirror twins added), samples the camera and texture for one
/// scene of the dataset. Determinism: (spec.seed, scene_index) fixes all draws.
inline SceneDefinition instantiate_scene(const SceneSpec& spec, std::uint64_t scene_index) {
  Rng root = Rng(spec.seed).substream("scene", scene_index);
  Rng shape_rng = root.substream("shape");
  Rng cam_rng = root.substream("camera");
  Rng tex_rng = root.substream("texture");

  SceneDefinition def;
  def.frame = {spec.width, spec.height};
  def.seed = detail::splitmix64(spec.seed + scene_index);

  std::vector<Primitive> canon =
      spec.parts.empty() ? detail::random_parts(spec.family, shape_rng) : spec.parts;

  const CameraRanges& cr = spec.camera;
  Eigen::Vector3d target(0, 0, cam_rng.uniform(cr.dist_min, cr.dist_max));
  if (!cr.fronto) {
    const double elev = (cam_rng.uniform01() < 0.5 ? -1.0 : 1.0) *
                        cam_rng.uniform(cr.elev_min_deg, cr.elev_max_deg) * M_PI / 180.0;
    const double dist = target.z();
    target = {0.0, dist * std::sin(elev), dist * std::cos(elev)};
  }

  int max_tone = 0;
  for (auto& p : canon) max_tone = std::max(max_tone, p.tone);
  for (const auto& p : canon) {
    Primitive placed = p;
    placed.center += target;
    def.parts.push_back(placed);
    if (std::abs(p.center.x()) > 1e-12) {
      Primitive twin = mirrored(p);
      twin.center += target;
      def.parts.push_back(twin);
    }
  }

  def.camera = detail::sample_camera(cr, target, cam_rng);

  def.tones.resize(max_tone + 1);
  for (auto& t : def.tones) t = tex_rng.uniform(0.42, 0.62);
  for (int k = 0; k < 3; ++k) {
    def.wave_freq[k] = tex_rng.uniform(8.0, 22.0);
    Eigen::Vector3d d(tex_rng.normal(), tex_rng.normal(), tex_rng.normal());
    if (d.norm() < 1e-6) d = Eigen::Vector3d(1, 1, 1);
    def.wave_dirs.col(k) = d.normalized();
    def.wave_phase[k] = tex_rng.uniform(0.0, 2.0 * M_PI);
  }

  // Light: roughly opposite the viewing direction, restricted to the yz-plane
  // so shading is mirror-consistent.
  const Eigen::Vector3d view = def.camera.rotation.col(2);
  Eigen::Vector3d l(0.0, 0.55 - view.y(), -view.z());
  if (!spec.light_in_plane) l.x() = 0.45;
  def.light = l.normalized();
  return def;
}

/// Mirror-symmetric procedural albedo: a tone per primitive group modulated
/// by waves in (|x|, y, z) relative to the scene center.
inline double scene_albedo(const SceneDefinition& def, const Eigen::Vector3d& x, int part) {
  const int tone_id = def.parts[part].tone;
  const double base =
      def.tones.empty() ? 0.5 : def.tones[std::min<std::size_t>(tone_id, def.tones.size() - 1)];
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : def.parts) centroid += p.center;
  centroid /= static_cast<double>(def.parts.size());
  const Eigen::Vector3d q(std::abs(x.x()), x.y() - centroid.y(), x.z() - centroid.z());
  double a = base;
  const double amp[3] = {0.11, 0.09, 0.07};
  for (int k = 0; k < 3; ++k)
    a += amp[k] * std::sin(def.wave_freq[k] * def.wave_dirs.col(k).dot(q) + def.wave_phase[k]);
  return std::clamp(a, 0.05, 0.95);
}

// ---------------------------------------------------------------------------
// Rendering: per-pixel ray casting against the implicit union.

struct Scene {
  ImageFrame frame;
  CameraPose camera;
  DepthMap depth;
  NormalMap normals_cam;
  Mask mask;
  IntensityImage intensity;
  CorrespondenceSet pairs;
  double diameter = 0.0;  // bounding-box diagonal of masked world points
  std::uint64_t seed = 0;
};

namespace detail {

struct RayHit {
  bool hit = false;
  double z = 0.0;
  int part = 0;
};

inline RayHit cast_ray(const SceneDefinition& def, const Eigen::Vector3d& origin,
                       const Eigen::Vector3d& dir, const Eigen::Vector3d& bound_center,
                       double bound_radius) {
  RayHit out;
  // Clip the depth parameter to the bounding sphere: |o + z d - c|^2 = R^2.
  const Eigen::Vector3d oc = origin - bound_center;
  const double a = dir.squaredNorm();
  const double b = 2.0 * oc.dot(dir);
  const double cc = oc.squaredNorm() - bound_radius * bound_radius;
  const double disc = b * b - 4 * a * cc;
  if (disc <= 0) return out;
  const double sq = std::sqrt(disc);
  double z0 = (-b - sq) / (2 * a);
  double z1 = (-b + sq) / (2 * a);
  z0 = std::max(z0, 1e-3);
  if (z1 <= z0) return out;

  const double world_step = 0.008;
  const double dz = world_step / std::sqrt(a);
  const int nsteps = std::min(4096, static_cast<int>(std::ceil((z1 - z0) / dz)) + 1);
  double prev_z = z0;
  double prev_f = scene_value(def, origin + z0 * dir);
  if (prev_f <= 0) return out;  // camera inside the object: treat as a miss
  for (int i = 1; i <= nsteps; ++i) {
    const double z = z0 + (z1 - z0) * i / nsteps;
    const double f = scene_value(def, origin + z * dir);
    if (f <= 0) {
      double lo = prev_z, hi = z;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (scene_value(def, origin + mid * dir) <= 0)
          hi = mid;
        else
          lo = mid;
      }
      out.hit = true;
      out.z = 0.5 * (lo + hi);
      scene_value(def, origin + out.z * dir, &out.part);
      return out;
    }
    prev_z = z;
    prev_f = f;
  }
  return out;
}

}  // namespace detail

/// Renders ground truth: perpendicular depth z per pixel, camera-frame
/// normals, mask, shaded intensity, and symmetric correspondences. For each
/// masked pixel the reflected surface point is projected back; the pair is
/// kept when that point is visible (depth within 0.5% of the depth buffer at
/// its pixel).
inline Scene render(const SceneDefinition& def) {
  Scene scene;
  scene.frame = def.frame;
  scene.camera = def.camera;
  scene.seed = def.seed;
  const int w = def.frame.width, h = def.frame.height;
  scene.depth = DepthMap(w, h, 0.0);
  scene.normals_cam = NormalMap(w, h, Eigen::Vector3d::Zero());
  scene.mask = Mask(w, h, 0);
  scene.intensity = IntensityImage(w, h, 0.0);

  Eigen::Vector3d bc = Eigen::Vector3d::Zero();
  for (const auto& p : def.parts) bc += p.center;
  bc /= static_cast<double>(def.parts.size());
  double br = 0.0;
  for (const auto& p : def.parts)
    br = std::max(br, (p.center - bc).norm() + primitive_bound_radius(p));
  br += 0.05;

  const Eigen::Vector3d origin = def.camera.translation();
  Grid<Eigen::Vector3d> world(w, h, Eigen::Vector3d::Zero());
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = Eigen::Vector3d::Constant(-1e300);

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const Eigen::Vector2d n = def.frame.to_norm({static_cast<double>(c), static_cast<double>(r)});
      const Eigen::Vector3d dir =
          def.camera.rotation * Eigen::Vector3d(def.camera.s * n.x(), def.camera.s * n.y(), 1.0);
      const detail::RayHit hit = detail::cast_ray(def, origin, dir, bc, br);
      if (!hit.hit) continue;
      const Eigen::Vector3d x = origin + hit.z * dir;
      const Eigen::Vector3d nrm = primitive_gradient(def.parts[hit.part], x);
      scene.mask(c, r) = 1;
      scene.depth(c, r) = hit.z;
      scene.normals_cam(c, r) = def.camera.rotation.transpose() * nrm;
      const double shade = 0.22 + 0.78 * std::max(0.0, nrm.dot(def.light));
      scene.intensity(c, r) = std::clamp(scene_albedo(def, x, hit.part) * shade, 0.0, 1.0);
      world(c, r) = x;
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }

  if (count_mask(scene.mask) == 0)
    throw invalid_input("render: camera sees an empty mask; resample the camera");
  scene.diameter = (hi - lo).norm();

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!scene.mask(c, r)) continue;
      const Eigen::Vector3d reflected = reflect_x(world(c, r));
      Eigen::Vector2d nq;
      double zq = 0.0;
      if (!project(reflected, def.camera, &nq, &zq)) continue;
      const PixelCoord q = def.frame.to_pixel(nq);
      if (!def.frame.contains(q)) continue;
      const int qc = static_cast<int>(std::lround(q.col));
      const int qr = static_cast<int>(std::lround(q.row));
      if (!scene.mask.in_bounds(qc, qr) || !scene.mask(qc, qr)) continue;
      // Occlusion test on the exact ray through q: the reflected point must
      // be the first surface the ray meets. This is stricter than comparing
      // against the stored buffer (well within its 0.5% band) and keeps the
      // emitted pairs exact.
      const Eigen::Vector3d dir_q =
          def.camera.rotation * Eigen::Vector3d(def.camera.s * nq.x(), def.camera.s * nq.y(), 1.0);
      const detail::RayHit vis = detail::cast_ray(def, origin, dir_q, bc, br);
      if (!vis.hit || std::abs(vis.z - zq) > 1e-6 * zq) continue;
      if (std::hypot(q.col - c, q.row - r) < 1e-6) continue;  // on the symmetry axis
      scene.pairs.push_back(
          {{static_cast<double>(c), static_cast<double>(r)}, q, 0.0});
    }
  return scene;
}

// ---------------------------------------------------------------------------
// Noise models calibrated to mimic network prediction errors.

struct NoiseSpec {
  double depth_log_sigma = 0.2;        // multiplicative log-normal on z
  double depth_lowfreq_amp = 0.1;      // smooth multiplicative bias field
  double normal_angle_sigma_deg = 10;  // random-axis rotation of normals
  double corr_jitter_sigma = 2.0;      // RMS 2D displacement of targets, px
  double corr_outlier_frac = 0.1;      // uniform in-mask replacement targets
  double pose_rot_sigma_deg = 2.0;
  double pose_tx_sigma = 0.05;
  double pose_s_sigma = 0.01;
  std::uint64_t seed = 0;
};

/// Degrades a clean scene per the noise spec. Deterministic in
/// (noise.seed, scene.seed); mask and intensity are left untouched.
inline Scene corrupt(const Scene& clean, const NoiseSpec& noise) {
  Scene out = clean;
  Rng root = Rng(detail::splitmix64(noise.seed) ^ clean.seed);
  const int w = clean.frame.width, h = clean.frame.height;

  {  // depth: z * exp(white + smooth bias)
    Rng rng = root.substream("depth");
    Rng brng = root.substream("depth-bias");
    constexpr int kWaves = 4;
    double fx[kWaves], fy[kWaves], ph[kWaves];
    for (int k = 0; k < kWaves; ++k) {
      fx[k] = (brng.uniform01() < 0.5 ? -1.0 : 1.0) * brng.uniform(0.4, 1.3);
      fy[k] = (brng.uniform01() < 0.5 ? -1.0 : 1.0) * brng.uniform(0.4, 1.3);
      ph[k] = brng.uniform(0.0, 2.0 * M_PI);
    }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (!clean.mask(c, r)) continue;
        double bias = 0.0;
        for (int k = 0; k < kWaves; ++k)
          bias += std::cos(2.0 * M_PI * (fx[k] * c / w + fy[k] * r / h) + ph[k]);
        bias *= noise.depth_lowfreq_amp;
        out.depth(c, r) = clean.depth(c, r) * std::exp(rng.normal(0.0, noise.depth_log_sigma) + bias);
      }
  }

  {  // normals: rotate about a random axis by N(0, sigma) degrees
    Rng rng = root.substream("normal");
    const double sig = noise.normal_angle_sigma_deg * M_PI / 180.0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (!clean.mask(c, r)) continue;
        const Eigen::Vector3d axis = rng.unit_vector();
        const double angle = rng.normal(0.0, sig);
        out.normals_cam(c, r) = exp_map(axis * angle) * clean.normals_cam(c, r);
      }
  }

  {  // correspondences: jitter targets; replace a fraction by in-mask outliers
    Rng rng = root.substream("corr");
    std::vector<std::pair<int, int>> mask_px;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (clean.mask(c, r)) mask_px.push_back({c, r});
    const double axis_sigma = noise.corr_jitter_sigma / std::sqrt(2.0);
    for (auto& pr : out.pairs) {
      if (rng.uniform01() < noise.corr_outlier_frac) {
        for (int attempt = 0; attempt < 16; ++attempt) {
          const auto [c, r] = mask_px[rng.below(mask_px.size())];
          if (c == pr.p.col && r == pr.p.row) continue;
          pr.q = {static_cast<double>(c), static_cast<double>(r)};
          break;
        }
      } else {
        pr.q.col = std::clamp(pr.q.col + rng.normal(0.0, axis_sigma), -0.49, w - 0.51);
        pr.q.row = std::clamp(pr.q.row + rng.normal(0.0, axis_sigma), -0.49, h - 0.51);
      }
    }
  }

  {  // camera
    Rng rng = root.substream("pose");
    const Eigen::Vector3d axis = rng.unit_vector();
    const double angle = rng.normal(0.0, noise.pose_rot_sigma_deg * M_PI / 180.0);
    out.camera.rotation = exp_map(axis * angle) * clean.camera.rotation;
    out.camera.t_x = clean.camera.t_x + rng.normal(0.0, noise.pose_tx_sigma);
    out.camera.s = std::max(clean.camera.s + rng.normal(0.0, noise.pose_s_sigma), 0.05);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON bindings for the spec documents used by the CLI.

inline nlohmann::json to_json(const NoiseSpec& n) {
  return {{"depth_log_sigma", n.depth_log_sigma},
          {"depth_lowfreq_amp", n.depth_lowfreq_amp},
          {"normal_angle_sigma_deg", n.normal_angle_sigma_deg},
          {"corr_jitter_sigma", n.corr_jitter_sigma},
          {"corr_outlier_frac", n.corr_outlier_frac},
          {"pose_rot_sigma_deg", n.pose_rot_sigma_deg},
          {"pose_tx_sigma", n.pose_tx_sigma},
          {"pose_s_sigma", n.pose_s_sigma},
          {"seed", n.seed}};
}

inline NoiseSpec noise_from_json(const nlohmann::json& j) {
  NoiseSpec n;
  const auto get = [&](const char* key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
  };
  n.depth_log_sigma = get("depth_log_sigma", n.depth_log_sigma);
  n.depth_lowfreq_amp = get("depth_lowfreq_amp", n.depth_lowfreq_amp);
  n.normal_angle_sigma_deg = get("normal_angle_sigma_deg", n.normal_angle_sigma_deg);
  n.corr_jitter_sigma = get("corr_jitter_sigma", n.corr_jitter_sigma);
  n.corr_outlier_frac = get("corr_outlier_frac", n.corr_outlier_frac);
  n.pose_rot_sigma_deg = get("pose_rot_sigma_deg", n.pose_rot_sigma_deg);
  n.pose_tx_sigma = get("pose_tx_sigma", n.pose_tx_sigma);
  n.pose_s_sigma = get("pose_s_sigma", n.pose_s_sigma);
  if (j.contains("seed")) n.seed = j.at("seed").get<std::uint64_t>();
  return n;
}

inline nlohmann::json to_json(const Primitive& p) {
  static const char* names[] = {"box", "superellipsoid", "extrusion_rect", "extrusion_disc"};
  return {{"kind", names[static_cast<int>(p.kind)]},
          {"center", {p.center.x(), p.center.y(), p.center.z()}},
          {"half", {p.half.x(), p.half.y(), p.half.z()}},
          {"exponent", p.exponent},
          {"rounding", p.rounding},
          {"tone", p.tone}};
}

inline Primitive primitive_from_json(const nlohmann::json& j) {
  Primitive p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") p.kind = Primitive::Kind::box;
  else if (kind == "superellipsoid") p.kind = Primitive::Kind::superellipsoid;
  else if (kind == "extrusion_rect") p.kind = Primitive::Kind::extrusion_rect;
  else if (kind == "extrusion_disc") p.kind = Primitive::Kind::extrusion_disc;
  else throw io_error("unknown primitive kind '" + kind + "'");
  const auto c = j.at("center").get<std::vector<double>>();
  const auto hf = j.at("half").get<std::vector<double>>();
  if (c.size() != 3 || hf.size() != 3) throw io_error("primitive center/half need 3 values");
  p.center = {c[0], c[1], c[2]};
  p.half = {hf[0], hf[1], hf[2]};
  if (j.contains("exponent")) p.exponent = j.at("exponent").get<double>();
  if (j.contains("rounding")) p.rounding = j.at("rounding").get<double>();
  if (j.contains("tone")) p.tone = j.at("tone").get<int>();
  return p;
}

inline nlohmann::json to_json(const SceneSpec& s) {
  static const char* families[] = {"box-union", "mirrored-extrusion",
                                   "mirrored-superellipsoid-union"};
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : s.parts) parts.push_back(to_json(p));
  return {{"family", families[static_cast<int>(s.family)]},
          {"parts", parts},
          {"camera",
           {{"dist", {s.camera.dist_min, s.camera.dist_max}},
            {"elevation_deg", {s.camera.elev_min_deg, s.camera.elev_max_deg}},
            {"t_x", {s.camera.tx_min, s.camera.tx_max}},
            {"roll_deg", s.camera.roll_deg},
            {"look_jitter_deg", s.camera.look_jitter_deg},
            {"s", {s.camera.s_min, s.camera.s_max}},
            {"fronto", s.camera.fronto}}},
          {"width", s.width},
          {"height", s.height},
          {"seed", s.seed},
          {"light_in_plane", s.light_in_plane}};
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec s;
  if (j.contains("family")) {
    const std::string f = j.at("family").get<std::string>();
    if (f == "box-union") s.family = SceneSpec::Family::box_union;
    else if (f == "mirrored-extrusion") s.family = SceneSpec::Family::mirrored_extrusion;
    else if (f == "mirrored-superellipsoid-union")
      s.family = SceneSpec::Family::superellipsoid_union;
    else throw io_error("unknown shape family '" + f + "'");
  }
  if (j.contains("parts"))
    for (const auto& p : j.at("parts")) s.parts.push_back(primitive_from_json(p));
  if (j.contains("camera")) {
    const auto& c = j.at("camera");
    const auto range = [&](const char* key, double* lo, double* hi) {
      if (!c.contains(key)) return;
      const auto v = c.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw io_error(std::string("camera.") + key + " needs [lo, hi]");
      *lo = v[0];
      *hi = v[1];
    };
    range("dist", &s.camera.dist_min, &s.camera.dist_max);
    range("elevation_deg", &s.camera.elev_min_deg, &s.camera.elev_max_deg);
    range("t_x", &s.camera.tx_min, &s.camera.tx_max);
    range("s", &s.camera.s_min, &s.camera.s_max);
    if (c.contains("roll_deg")) s.camera.roll_deg = c.at("roll_deg").get<double>();
    if (c.contains("look_jitter_deg"))
      s.camera.look_jitter_deg = c.at("look_jitter_deg").get<double>();
    if (c.contains("fronto")) s.camera.fronto = c.at("fronto").get<bool>();
  }
  if (j.contains("width")) s.width = j.at("width").get<int>();
  if (j.contains("height")) s.height = j.at("height").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("light_in_plane")) s.light_in_plane = j.at("light_in_plane").get<bool>();
  return s;
}

}  // namespace symdepth
