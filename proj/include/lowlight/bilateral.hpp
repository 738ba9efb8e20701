#pragma once

#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/parallel.hpp"

namespace lowlight {

/// Brute-force bilateral filter with Gaussian spatial and range kernels over a
/// square window of radius ceil(3 sigma_s). Pixels outside the image are
/// dropped and the weights renormalized.
Image bilateral_brute(const Image& plane, double sigma_s, double sigma_r,
                      Exec exec = Exec::parallel);

struct GridDims {
  int depth = 8;  // guide-intensity bins
  int rows = 8;
  int cols = 8;

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Per-cell regression statistics splatted from the pixels.
struct GridMoments {
  double weight = 0;  // sum 1
  double g = 0;       // sum guide
  double gg = 0;      // sum guide^2
  double v = 0;       // sum value
  double gv = 0;      // sum guide * value
};

/// Bilateral grid of local affine models v ~ a * guide + b, one per
/// (depth, row, col) cell. Cells are stored depth-major: ((d * rows + r) * cols + c).
class BilateralGrid {
 public:
  static constexpr double kRidge = 1e-3;

  BilateralGrid(GridDims dims, int channel_id);

  const GridDims& dims() const noexcept { return dims_; }
  int channel_id() const noexcept { return channel_id_; }
  std::size_t cell_count() const noexcept { return a_.size(); }
  std::size_t cell(int d, int r, int c) const noexcept {
    return (static_cast<std::size_t>(d) * dims_.rows + r) * dims_.cols + c;
  }

  double a(std::size_t cell) const noexcept { return a_[cell]; }
  double b(std::size_t cell) const noexcept { return b_[cell]; }
  double weight(std::size_t cell) const noexcept { return weight_[cell]; }
  void set_cell(std::size_t cell, double a, double b, double weight);

  /// Splat totals before blurring; sum of weights equals the pixel count.
  const std::vector<GridMoments>& raw_moments() const noexcept { return raw_; }
  void set_raw_moments(std::vector<GridMoments> raw) { raw_ = std::move(raw); }

 private:
  GridDims dims_;
  int channel_id_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> weight_;
  std::vector<GridMoments> raw_;
};

/// Splats (1, g, g^2, v, g v) into cell (floor(g gd), floor(y/H gh), floor(x/W gw)),
/// blurs the moments with [1,2,1]/4 along each axis, and fits per cell
/// a = Cov(g, v) / (Var(g) + 1e-3), b = mean(v) - a mean(g). Empty cells keep (1, 0).
BilateralGrid grid_build(const Image& plane, const Image& guide, GridDims dims = {},
                         int channel_id = 0, Exec exec = Exec::parallel);

struct CoefficientMaps {
  Image a;
  Image b;
};

/// Trilinear interpolation of the cell coefficients at
/// (g gd - 0.5, y/H gh - 0.5, x/W gw - 0.5), clamped to the grid.
CoefficientMaps grid_slice(const BilateralGrid& grid, const Image& guide,
                           Exec exec = Exec::parallel);

/// Self-guided grid denoising applied to each RGB channel independently:
/// out_c = clamp(a_c * R_c + b_c, 0, 1).
Image cdm_denoise(const Image& rgb, GridDims dims = {}, Exec exec = Exec::parallel);

/// bilateral_brute applied to each channel independently.
Image bilateral_denoise(const Image& rgb, double sigma_s, double sigma_r,
                        Exec exec = Exec::parallel);

}  // namespace lowlight
