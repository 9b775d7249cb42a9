#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"
#include "symdepth/grid.hpp"

namespace symdepth {

struct Tradeoffs {
  double lambda = 1.0;  // normal term
  double mu = 1.0;      // symmetry term
};

struct SolverConfig {
  Tradeoffs tradeoffs;
  int max_outer_iters = 30;
  int gn_steps_per_reweight = 1;
  double converge_tol = 1e-6;   // relative change of the total objective
  double damping = 1e-8;        // Tikhonov term on the normal equations
  int line_search_max_halvings = 10;
  bool optimize_camera = true;
  double linear_solver_tol = 1e-10;
  int dense_threshold = 500;    // below this many unknowns solve densely
};

/// Robust weights of the three residual classes plus the shared scale sigma
/// (median of the pooled scaled residual magnitudes).
struct Weights {
  std::vector<double> pixel;
  std::vector<double> edge;
  std::vector<double> pair;
  double sigma = 0.0;
  bool residuals_vanished = false;  // sigma under 1e-12: already at an optimum
};

struct ObjectiveTerms {
  double total = 0.0;
  double depth = 0.0;     // sum |d - d_bar|
  double normal = 0.0;    // sum |(p - q) . n|
  double symmetry = 0.0;  // sum |reflect(p) - q|
};

struct CameraDelta {
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();
  double t_x = 0.0;
  double s = 0.0;
};

struct GnStep {
  std::vector<double> dz;
  CameraDelta cam;
};

struct SolverReport {
  std::vector<double> objective_trace;  // entry 0 = initial, then per iteration
  ObjectiveTerms final_terms;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  double sigma_final = 0.0;
  std::array<int, 10> weight_hist_pixel{};
  std::array<int, 10> weight_hist_edge{};
  std::array<int, 10> weight_hist_pair{};
  int n_pixels = 0;
  int n_edges = 0;
  int n_pairs = 0;
  int pairs_dropped = 0;  // snapped off the mask or degenerate
};

struct RefineResult {
  DepthMap depth;
  CameraPose camera;
  SolverReport report;
};

/// Rounds correspondence endpoints to masked pixels; pairs landing off the
/// mask or collapsing onto themselves are dropped.
struct SnappedPairs {
  std::vector<std::array<int, 4>> pixels;  // p_col, p_row, q_col, q_row
  int dropped = 0;
};

inline SnappedPairs snap_pairs(const CorrespondenceSet& pairs, const Mask& mask) {
  SnappedPairs out;
  for (const auto& pr : pairs) {
    const int pc = static_cast<int>(std::lround(pr.p.col));
    const int prow = static_cast<int>(std::lround(pr.p.row));
    const int qc = static_cast<int>(std::lround(pr.q.col));
    const int qr = static_cast<int>(std::lround(pr.q.row));
    if (!mask.in_bounds(pc, prow) || !mask.in_bounds(qc, qr) || !mask(pc, prow) ||
        !mask(qc, qr) || (pc == qc && prow == qr)) {
      ++out.dropped;
      continue;
    }
    out.pixels.push_back({pc, prow, qc, qr});
  }
  return out;
}

struct SolverInputs {
  ImageFrame frame;
  Mask mask;
  DepthMap predicted_depth;          // z_bar, the data term anchor
  NormalMap predicted_normals_cam;   // camera-frame normals
  SnappedPairs pairs;
  CameraPose camera;                 // predicted camera, initial state
};

/// Joint IRLS / Gauss-Newton refinement of per-pixel depth and the camera.
///
/// Outer loop: recompute robust weights from the current residuals, then take
/// Gauss-Newton steps on the weighted least-squares surrogate
///   sum w_p (d + dd - d_bar)^2 + lambda sum w_e ((p - q + dp - dq) . n)^2
///     + mu sum w_c |reflect(p + dp) - (q + dq)|^2
/// with a backtracking line search that keeps both the fixed-weight surrogate
/// and the recorded robust objective non-increasing. Updates follow the
/// manifold rule z += dz, s += ds, t_x += dt, R = exp(c) R.
class RefineSolver {
 public:
  RefineSolver(SolverInputs inputs, SolverConfig config)
      : cfg_(config), frame_(inputs.frame), mask_(inputs.mask) {
    const int w = frame_.width, h = frame_.height;
    if (!mask_.same_size(w, h) || !inputs.predicted_depth.same_size(w, h) ||
        !inputs.predicted_normals_cam.same_size(w, h))
      throw invalid_input("solver inputs disagree in size");
    if (!(cfg_.max_outer_iters > 0) || !(cfg_.gn_steps_per_reweight > 0) ||
        !(cfg_.converge_tol > 0) || !(cfg_.linear_solver_tol > 0))
      throw invalid_input("solver config: iteration counts and tolerances must be positive");
    if (cfg_.tradeoffs.lambda < 0 || cfg_.tradeoffs.mu < 0)
      throw invalid_input("tradeoff parameters must be non-negative");

    index_ = Grid<int>(w, h, -1);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (!mask_(c, r)) continue;
        const double zb = inputs.predicted_depth(c, r);
        if (!(zb > 0.0)) throw invalid_input("predicted depth must be positive on the mask");
        index_(c, r) = static_cast<int>(cols_.size());
        cols_.push_back(c);
        rows_.push_back(r);
        const Eigen::Vector2d n = frame_.to_norm({static_cast<double>(c), static_cast<double>(r)});
        norm_x_.push_back(n.x());
        norm_y_.push_back(n.y());
        z_.push_back(zb);
        Eigen::Vector3d nc = inputs.predicted_normals_cam(c, r);
        if (!(nc.norm() > 1e-6)) throw invalid_input("predicted normal is degenerate on the mask");
        normals_cam_.push_back(nc.normalized());
      }
    if (z_.empty()) throw invalid_input("solver requires a non-empty mask");

    cam_ = inputs.camera;
    if (!(cam_.s > 0.0)) throw invalid_input("camera scale must be positive");

    // The data target: predicted z converted to ray depth with the predicted
    // camera scale, fixed for the whole solve.
    d_bar_.resize(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i)
      d_bar_[i] = z_[i] * ray_scale({norm_x_[i], norm_y_[i]}, cam_.s);

    // 8-neighbor adjacency, both directions (each ordered pair uses the
    // source pixel's normal).
    static constexpr int kOff[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                       {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
    for (std::size_t i = 0; i < z_.size(); ++i)
      for (const auto& o : kOff) {
        const int nc = cols_[i] + o[0], nr = rows_[i] + o[1];
        if (nc < 0 || nc >= w || nr < 0 || nr >= h) continue;
        const int j = index_(nc, nr);
        if (j >= 0) edges_.push_back({static_cast<int>(i), j});
      }

    for (const auto& pq : inputs.pairs.pixels) {
      const int i = index_(pq[0], pq[1]);
      const int j = index_(pq[2], pq[3]);
      if (i < 0 || j < 0 || i == j) {
        ++report_.pairs_dropped;
        continue;
      }
      pairs_.push_back({i, j});
    }
    report_.pairs_dropped += inputs.pairs.dropped;
    report_.n_pixels = static_cast<int>(z_.size());
    report_.n_edges = static_cast<int>(edges_.size());
    report_.n_pairs = static_cast<int>(pairs_.size());
  }

  int num_pixels() const { return static_cast<int>(z_.size()); }
  int num_unknowns() const { return num_pixels() + (cfg_.optimize_camera ? 5 : 0); }
  int pixel_index(int col, int row) const { return index_(col, row); }
  const std::vector<double>& depths() const { return z_; }
  const std::vector<double>& target_ray_depths() const { return d_bar_; }
  const CameraPose& camera() const { return cam_; }
  const SolverReport& report() const { return report_; }

  void set_state(std::vector<double> z, const CameraPose& cam) {
    if (z.size() != z_.size()) throw invalid_input("set_state: wrong depth count");
    for (double v : z)
      if (!(v > 0.0)) throw invalid_input("set_state: depths must be positive");
    z_ = std::move(z);
    cam_ = cam;
  }

  DepthMap depth_map() const {
    DepthMap out(frame_.width, frame_.height, 0.0);
    for (std::size_t i = 0; i < z_.size(); ++i) out(cols_[i], rows_[i]) = z_[i];
    return out;
  }

  /// Robust (unweighted) objective at the current state.
  ObjectiveTerms objective() const { return objective_of(evaluate(z_, cam_)); }

  /// IRLS weights from the current residuals (Weights are not stored; step()
  /// recomputes them at the top of each outer iteration).
  Weights update_weights() const { return weights_of(evaluate(z_, cam_)); }

  GnStep gauss_newton_step(const Weights& w) const {
    return solve_normal_equations(evaluate(z_, cam_), w);
  }

  /// One outer iteration; returns false once converged.
  bool step() {
    if (converged_) return false;
    Evaluation eval = evaluate(z_, cam_);
    const double f_before = objective_of(eval).total;
    if (!std::isfinite(f_before)) throw solver_failure("non-finite objective");
    if (report_.objective_trace.empty()) report_.objective_trace.push_back(f_before);

    const Weights w = weights_of(eval);
    last_weights_ = w;
    if (w.residuals_vanished) {
      finish(f_before, true, "all residuals vanished");
      return false;
    }

    bool progressed = false;
    for (int k = 0; k < cfg_.gn_steps_per_reweight; ++k) {
      if (k > 0) eval = evaluate(z_, cam_);
      const GnStep delta = solve_normal_equations(eval, w);
      if (try_step(delta, eval, w)) progressed = true;
    }

    const double f_after = objective_of(evaluate(z_, cam_)).total;
    if (!std::isfinite(f_after)) throw solver_failure("non-finite objective");
    report_.objective_trace.push_back(f_after);
    ++report_.iterations;

    if (!progressed) {
      finish(f_after, true, "no admissible step");
      return false;
    }
    if (std::abs(f_before - f_after) <= cfg_.converge_tol * std::max(f_before, 1e-300)) {
      finish(f_after, true, "objective change under tolerance");
      return false;
    }
    if (report_.iterations >= cfg_.max_outer_iters) {
      finish(f_after, false, "iteration limit");
      return false;
    }
    return true;
  }

  RefineResult run() {
    while (step()) {
    }
    if (report_.objective_trace.empty())
      report_.objective_trace.push_back(objective().total);
    return {depth_map(), cam_, report_};
  }

 private:
  struct Evaluation {
    Eigen::Matrix3d rot;
    double s = 1.0;
    std::vector<Eigen::Vector3d> ray;      // R (s nx, s ny, 1)
    std::vector<Eigen::Vector3d> point;    // world points
    std::vector<Eigen::Vector3d> normal_w; // R n_cam
    std::vector<double> alpha;             // |(s nx, s ny, 1)|
    std::vector<double> depth_res;
    std::vector<double> edge_res;
    std::vector<Eigen::Vector3d> pair_res;
  };

  Evaluation evaluate(const std::vector<double>& z, const CameraPose& cam) const {
    Evaluation e;
    e.rot = cam.rotation;
    e.s = cam.s;
    const std::size_t n = z.size();
    e.ray.resize(n);
    e.point.resize(n);
    e.normal_w.resize(n);
    e.alpha.resize(n);
    e.depth_res.resize(n);
    const Eigen::Vector3d t = cam.translation();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d u(cam.s * norm_x_[i], cam.s * norm_y_[i], 1.0);
      e.alpha[i] = u.norm();
      e.ray[i] = cam.rotation * u;
      e.point[i] = z[i] * e.ray[i] + t;
      e.normal_w[i] = cam.rotation * normals_cam_[i];
      e.depth_res[i] = z[i] * e.alpha[i] - d_bar_[i];
    }
    e.edge_res.resize(edges_.size());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto [i, j] = edges_[k];
      e.edge_res[k] = (e.point[i] - e.point[j]).dot(e.normal_w[i]);
    }
    e.pair_res.resize(pairs_.size());
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [i, j] = pairs_[k];
      e.pair_res[k] = reflect_x(e.point[i]) - e.point[j];
    }
    return e;
  }

  ObjectiveTerms objective_of(const Evaluation& e) const {
    ObjectiveTerms t;
    for (double r : e.depth_res) t.depth += std::abs(r);
    for (double r : e.edge_res) t.normal += std::abs(r);
    for (const auto& r : e.pair_res) t.symmetry += r.norm();
    t.total = t.depth + cfg_.tradeoffs.lambda * t.normal + cfg_.tradeoffs.mu * t.symmetry;
    return t;
  }

  double surrogate_of(const Evaluation& e, const Weights& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < e.depth_res.size(); ++i)
      s += w.pixel[i] * e.depth_res[i] * e.depth_res[i];
    for (std::size_t k = 0; k < e.edge_res.size(); ++k)
      s += cfg_.tradeoffs.lambda * w.edge[k] * e.edge_res[k] * e.edge_res[k];
    for (std::size_t k = 0; k < e.pair_res.size(); ++k)
      s += cfg_.tradeoffs.mu * w.pair[k] * e.pair_res[k].squaredNorm();
    return s;
  }

  Weights weights_of(const Evaluation& e) const {
    const double lambda = cfg_.tradeoffs.lambda, mu = cfg_.tradeoffs.mu;
    Weights w;
    w.pixel.assign(e.depth_res.size(), 1.0);
    w.edge.assign(e.edge_res.size(), 1.0);
    w.pair.assign(e.pair_res.size(), 1.0);

    // Pooled scaled magnitudes; classes with a zero tradeoff contribute no
    // residuals, so a disabled term cannot drag the median to zero.
    std::vector<double> pooled;
    pooled.reserve(e.depth_res.size() + e.edge_res.size() + e.pair_res.size());
    for (double r : e.depth_res) pooled.push_back(std::abs(r));
    if (lambda > 0)
      for (double r : e.edge_res) pooled.push_back(std::sqrt(lambda) * std::abs(r));
    if (mu > 0)
      for (const auto& r : e.pair_res) pooled.push_back(std::sqrt(mu) * r.norm());

    w.sigma = median(pooled);
    if (w.sigma < 1e-12) {
      w.residuals_vanished = true;
      return w;
    }
    const double s2 = w.sigma * w.sigma;
    for (std::size_t i = 0; i < e.depth_res.size(); ++i)
      w.pixel[i] = w.sigma / std::sqrt(s2 + e.depth_res[i] * e.depth_res[i]);
    for (std::size_t k = 0; k < e.edge_res.size(); ++k)
      w.edge[k] = w.sigma / std::sqrt(s2 + lambda * e.edge_res[k] * e.edge_res[k]);
    for (std::size_t k = 0; k < e.pair_res.size(); ++k)
      w.pair[k] = w.sigma / std::sqrt(s2 + mu * e.pair_res[k].squaredNorm());
    return w;
  }

  static double median(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
      std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
      m = 0.5 * (m + v[mid - 1]);
    }
    return m;
  }

  // Assembles and solves the damped weighted normal equations of the
  // linearized surrogate. Unknown layout: [dz_0 .. dz_{N-1}, c, dt_x, ds].
  GnStep solve_normal_equations(const Evaluation& e, const Weights& w) const {
    const int n_pix = num_pixels();
    const bool opt_cam = cfg_.optimize_camera;
    const int n_unknowns = num_unknowns();
    const int col_rot = n_pix, col_tx = n_pix + 3, col_s = n_pix + 4;
    const double lambda = cfg_.tradeoffs.lambda, mu = cfg_.tradeoffs.mu;

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> row_w, row_r;
    const std::size_t n_rows = e.depth_res.size() + e.edge_res.size() + 3 * e.pair_res.size();
    trips.reserve(e.depth_res.size() * 2 + e.edge_res.size() * 6 + e.pair_res.size() * 21);
    row_w.reserve(n_rows);
    row_r.reserve(n_rows);

    int row = 0;
    // Depth rows: alpha dz (+ beta ds), residual d - d_bar.
    for (int i = 0; i < n_pix; ++i, ++row) {
      trips.emplace_back(row, i, e.alpha[i]);
      if (opt_cam) {
        const double rho2 = norm_x_[i] * norm_x_[i] + norm_y_[i] * norm_y_[i];
        trips.emplace_back(row, col_s, z_[i] * e.s * rho2 / e.alpha[i]);
      }
      row_w.push_back(w.pixel[i]);
      row_r.push_back(e.depth_res[i]);
    }
    // Edge rows: n . (dp_i - dp_j); the translation column cancels.
    for (std::size_t k = 0; k < edges_.size(); ++k, ++row) {
      const auto [i, j] = edges_[k];
      const Eigen::Vector3d& nw = e.normal_w[i];
      trips.emplace_back(row, i, nw.dot(e.ray[i]));
      trips.emplace_back(row, j, -nw.dot(e.ray[j]));
      if (opt_cam) {
        const Eigen::Vector3d c_coef = nw.cross(e.point[j] - e.point[i]);
        for (int m = 0; m < 3; ++m) trips.emplace_back(row, col_rot + m, c_coef[m]);
        const Eigen::Vector3d gi = z_[i] * (e.ray[i] - e.rot.col(2)) / e.s;
        const Eigen::Vector3d gj = z_[j] * (e.ray[j] - e.rot.col(2)) / e.s;
        trips.emplace_back(row, col_s, nw.dot(gi - gj));
      }
      row_w.push_back(lambda * w.edge[k]);
      row_r.push_back(e.edge_res[k]);
    }
    // Pair rows (3 per pair): reflect(dp_i) - dp_j.
    const Eigen::Vector3d phat(-1.0, 1.0, 1.0);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [i, j] = pairs_[k];
      Eigen::Matrix3d c_block;
      if (opt_cam) {
        // d reflect(p_i)/dc - d p_j/dc with dp/dc = -z skew(ray).
        c_block = -z_[i] * (phat.asDiagonal() * skew(e.ray[i])) + z_[j] * skew(e.ray[j]);
      }
      const Eigen::Vector3d gi = z_[i] * (e.ray[i] - e.rot.col(2)) / e.s;
      const Eigen::Vector3d gj = z_[j] * (e.ray[j] - e.rot.col(2)) / e.s;
      for (int m = 0; m < 3; ++m, ++row) {
        trips.emplace_back(row, i, phat[m] * e.ray[i][m]);
        trips.emplace_back(row, j, -e.ray[j][m]);
        if (opt_cam) {
          for (int mm = 0; mm < 3; ++mm) trips.emplace_back(row, col_rot + mm, c_block(m, mm));
          if (m == 0) trips.emplace_back(row, col_tx, -2.0);
          trips.emplace_back(row, col_s, phat[m] * gi[m] - gj[m]);
        }
        row_w.push_back(mu * w.pair[k]);
        row_r.push_back(e.pair_res[k][m]);
      }
    }

    Eigen::SparseMatrix<double> jac(row, n_unknowns);
    jac.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd wvec = Eigen::Map<const Eigen::VectorXd>(row_w.data(), row);
    Eigen::VectorXd rvec = Eigen::Map<const Eigen::VectorXd>(row_r.data(), row);

    Eigen::SparseMatrix<double> a = jac.transpose() * wvec.asDiagonal() * jac;
    for (int i = 0; i < n_unknowns; ++i) a.coeffRef(i, i) += cfg_.damping;
    a.makeCompressed();
    const Eigen::VectorXd b = -jac.transpose() * wvec.cwiseProduct(rvec).matrix();

    Eigen::VectorXd x;
    if (n_unknowns < cfg_.dense_threshold) {
      const Eigen::MatrixXd ad(a);
      x = ad.ldlt().solve(b);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(cfg_.linear_solver_tol);
      cg.setMaxIterations(20000);
      cg.compute(a);
      x = cg.solve(b);
      if (cg.info() != Eigen::Success)
        throw solver_failure("conjugate gradient did not converge: " +
                             std::to_string(cg.iterations()) + " iterations, error " +
                             std::to_string(cg.error()));
    }

    GnStep step;
    step.dz.assign(x.data(), x.data() + n_pix);
    if (opt_cam) {
      step.cam.rot = x.segment<3>(col_rot);
      step.cam.t_x = x[col_tx];
      step.cam.s = x[col_s];
    }
    return step;
  }

  struct Trial {
    std::vector<double> z;
    CameraPose cam;
  };

  Trial apply(const GnStep& d, double tau) const {
    Trial t;
    t.z.resize(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) t.z[i] = z_[i] + tau * d.dz[i];
    t.cam = cam_;
    t.cam.rotation = exp_map(tau * d.cam.rot) * cam_.rotation;
    t.cam.t_x = cam_.t_x + tau * d.cam.t_x;
    t.cam.s = cam_.s + tau * d.cam.s;
    return t;
  }

  /// Backtracking line search: halve until depths stay positive and neither
  /// the fixed-weight surrogate nor the robust objective increases.
  bool try_step(const GnStep& d, const Evaluation& eval_at, const Weights& w) {
    const double s0 = surrogate_of(eval_at, w);
    const double f0 = objective_of(eval_at).total;
    double tau = 1.0;
    for (int h = 0; h <= cfg_.line_search_max_halvings; ++h, tau *= 0.5) {
      Trial t = apply(d, tau);
      bool feasible = t.cam.s > 1e-9;
      for (double z : t.z)
        if (!(z > 0.0)) {
          feasible = false;
          break;
        }
      if (!feasible) continue;
      const Evaluation te = evaluate(t.z, t.cam);
      const double s1 = surrogate_of(te, w);
      const double f1 = objective_of(te).total;
      if (!std::isfinite(s1) || !std::isfinite(f1)) continue;
      const double slack_s = 1e-12 * std::max(1.0, s0);
      const double slack_f = 1e-12 * std::max(1.0, f0);
      if (s1 <= s0 + slack_s && f1 <= f0 + slack_f) {
        const bool moved = s1 < s0 - slack_s || f1 < f0 - slack_f || tau_moved(d, tau);
        z_ = std::move(t.z);
        cam_ = t.cam;
        return moved;
      }
    }
    return false;
  }

  bool tau_moved(const GnStep& d, double tau) const {
    double mx = 0.0;
    for (double v : d.dz) mx = std::max(mx, std::abs(v));
    mx = std::max({mx, d.cam.rot.cwiseAbs().maxCoeff(), std::abs(d.cam.t_x), std::abs(d.cam.s)});
    return tau * mx > 1e-15;
  }

  void finish(double f_final, bool converged, const std::string& reason) {
    converged_ = true;
    report_.converged = converged;
    report_.stop_reason = reason;
    report_.final_terms = objective();
    report_.sigma_final = last_weights_.sigma;
    const auto hist = [](const std::vector<double>& ws, std::array<int, 10>& h) {
      h.fill(0);
      for (double v : ws) ++h[std::min(9, static_cast<int>(std::floor(v * 10.0)))];
    };
    hist(last_weights_.pixel, report_.weight_hist_pixel);
    hist(last_weights_.edge, report_.weight_hist_edge);
    hist(last_weights_.pair, report_.weight_hist_pair);
    if (report_.objective_trace.empty()) report_.objective_trace.push_back(f_final);
  }

  SolverConfig cfg_;
  ImageFrame frame_;
  Mask mask_;
  Grid<int> index_;
  std::vector<int> cols_, rows_;
  std::vector<double> norm_x_, norm_y_;
  std::vector<double> d_bar_;
  std::vector<Eigen::Vector3d> normals_cam_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::pair<int, int>> pairs_;

  std::vector<double> z_;
  CameraPose cam_;
  bool converged_ = false;
  Weights last_weights_;
  SolverReport report_;
};

/// Convenience wrapper: snaps correspondences, builds the solver, runs it.
inline RefineResult refine(const DepthMap& predicted_depth, const NormalMap& normals_cam,
                           const Mask& mask, const CorrespondenceSet& pairs,
                           const CameraPose& camera, const ImageFrame& frame,
                           const SolverConfig& cfg) {
  SolverInputs in{frame, mask, predicted_depth, normals_cam, snap_pairs(pairs, mask), camera};
  RefineSolver solver(std::move(in), cfg);
  return solver.run();
}

}  // namespace symdepth
