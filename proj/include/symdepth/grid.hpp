#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

#include "symdepth/errors.hpp"
#include "symdepth/geometry.hpp"

namespace symdepth {

/// Dense row-major grid of per-pixel values.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        values_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw invalid_input("grid dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

  bool in_bounds(int col, int row) const {
    return col >= 0 && col < width_ && row >= 0 && row < height_;
  }

  T& operator()(int col, int row) { return values_[idx(col, row)]; }
  const T& operator()(int col, int row) const { return values_[idx(col, row)]; }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.values_ == b.values_;
  }

 private:
  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using Mask = Grid<std::uint8_t>;           // nonzero = object pixel
using DepthMap = Grid<double>;             // z per pixel; 0 marks invalid
using IntensityImage = Grid<double>;       // values in [0, 1]
using NormalMap = Grid<Eigen::Vector3d>;   // unit vectors on masked pixels

/// Per-pixel horizontal displacement on the rectified image. `score` carries
/// the matcher's peak correlation for downstream subsampling.
struct Flow1D {
  Grid<double> value;
  Grid<std::uint8_t> valid;
  Grid<double> score;

  Flow1D() = default;
  Flow1D(int w, int h) : value(w, h, 0.0), valid(w, h, 0), score(w, h, 0.0) {}
};

inline int count_mask(const Mask& m) {
  int n = 0;
  for (auto v : m.values()) n += v ? 1 : 0;
  return n;
}

/// Bilinear sample at fractional (col, row); requires the footprint in bounds.
inline bool sample_bilinear(const Grid<double>& g, double col, double row,
                            double* out) {
  const int c0 = static_cast<int>(std::floor(col));
  const int r0 = static_cast<int>(std::floor(row));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= g.width() || r0 + 1 >= g.height()) {
    // Allow exact border positions by clamping the interpolation cell.
    if (col < -0.5 || row < -0.5 || col > g.width() - 0.5 || row > g.height() - 0.5)
      return false;
    const int cc = std::min(std::max(c0, 0), g.width() - 2);
    const int rr = std::min(std::max(r0, 0), g.height() - 2);
    const double fc = std::min(std::max(col - cc, 0.0), 1.0);
    const double fr = std::min(std::max(row - rr, 0.0), 1.0);
    *out = (1 - fr) * ((1 - fc) * g(cc, rr) + fc * g(cc + 1, rr)) +
           fr * ((1 - fc) * g(cc, rr + 1) + fc * g(cc + 1, rr + 1));
    return true;
  }
  const double fc = col - c0;
  const double fr = row - r0;
  *out = (1 - fr) * ((1 - fc) * g(c0, r0) + fc * g(c0 + 1, r0)) +
         fr * ((1 - fc) * g(c0, r0 + 1) + fc * g(c0 + 1, r0 + 1));
  return true;
}

/// One symmetric pixel pair on the original image. `score` is the matcher
/// confidence when the pair came from the scanline matcher (0 otherwise).
struct Correspondence {
  PixelCoord p;
  PixelCoord q;
  double score = 0.0;
};

using CorrespondenceSet = std::vector<Correspondence>;

inline void validate_correspondences(const CorrespondenceSet& set,
                                     const ImageFrame& frame) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& c = set[i];
    if (!frame.contains(c.p) || !frame.contains(c.q))
      throw invalid_input("correspondence " + std::to_string(i) + " out of bounds");
    if (c.p.col == c.q.col && c.p.row == c.q.row)
      throw invalid_input("correspondence " + std::to_string(i) + " is degenerate (p == q)");
  }
}

/// Grid-bucketed nearest-source lookup over a correspondence set.
class PairLookup {
 public:
  PairLookup(const CorrespondenceSet& set, const ImageFrame& frame) : set_(set), frame_(frame) {
    cells_.assign(static_cast<std::size_t>(frame.width) * frame.height, {});
    for (std::size_t i = 0; i < set.size(); ++i) {
      const int c = static_cast<int>(std::lround(set[i].p.col));
      const int r = static_cast<int>(std::lround(set[i].p.row));
      if (c < 0 || c >= frame.width || r < 0 || r >= frame.height) continue;
      cells_[static_cast<std::size_t>(r) * frame.width + c].push_back(static_cast<int>(i));
    }
  }

  /// Index of the pair whose source is nearest to (col, row) within `radius`
  /// pixels, or -1. Ties break to the lowest index.
  int nearest_source(double col, double row, double radius) const {
    const int c0 = static_cast<int>(std::lround(col));
    const int r0 = static_cast<int>(std::lround(row));
    const int reach = static_cast<int>(std::ceil(radius)) + 1;
    int best = -1;
    double best_d2 = radius * radius;
    for (int dr = -reach; dr <= reach; ++dr)
      for (int dc = -reach; dc <= reach; ++dc) {
        const int c = c0 + dc, r = r0 + dr;
        if (c < 0 || c >= frame_.width || r < 0 || r >= frame_.height) continue;
        for (int i : cells_[static_cast<std::size_t>(r) * frame_.width + c]) {
          const double dx = set_[i].p.col - col, dy = set_[i].p.row - row;
          const double d2 = dx * dx + dy * dy;
          if (d2 <= best_d2 && (best == -1 || d2 < best_d2 || i < best)) {
            best_d2 = d2;
            best = i;
          }
        }
      }
    return best;
  }

  const CorrespondenceSet& set() const { return set_; }

 private:
  const CorrespondenceSet& set_;
  ImageFrame frame_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace symdepth
