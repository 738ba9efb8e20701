#include "lowlight/bilateral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

void check_sigmas(double sigma_s, double sigma_r) {
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0) || !std::isfinite(sigma_s) ||
      !std::isfinite(sigma_r)) {
    throw Error(ErrorKind::parameter, "bilateral: sigma_s and sigma_r must be positive");
  }
}

Image bilateral_serial(const Image& plane, double sigma_s, double sigma_r) {
  const int w = plane.width();
  const int h = plane.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_s));
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = plane.at(x, y);
      double num = 0.0;
      double den = 0.0;
      for (int qy = std::max(0, y - radius); qy <= std::min(h - 1, y + radius); ++qy) {
        for (int qx = std::max(0, x - radius); qx <= std::min(w - 1, x + radius); ++qx) {
          const double dx = qx - x;
          const double dy = qy - y;
          const double v = plane.at(qx, qy);
          const double dr = center - v;
          const double weight = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s)) *
                                std::exp(-(dr * dr) / (2.0 * sigma_r * sigma_r));
          num += weight * v;
          den += weight;
        }
      }
      out.at(x, y) = static_cast<float>(num / den);
    }
  }
  return out;
}

// Spatial weights come from a precomputed (2r+1)^2 table.
Image bilateral_parallel(const Image& plane, double sigma_s, double sigma_r) {
  const int w = plane.width();
  const int h = plane.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_s));
  const int span = 2 * radius + 1;
  std::vector<double> spatial(static_cast<std::size_t>(span) * span);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      spatial[static_cast<std::size_t>(dy + radius) * span + (dx + radius)] =
          std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s));
    }
  }
  const double inv_2r2 = 1.0 / (2.0 * sigma_r * sigma_r);
  Image out(w, h, 1);
  auto src = plane.data();
  auto dst = out.data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      const double center = src[static_cast<std::size_t>(y) * w + x];
      double num = 0.0;
      double den = 0.0;
      for (int qy = y0; qy <= y1; ++qy) {
        const double* srow = &spatial[static_cast<std::size_t>(qy - y + radius) * span];
        const float* prow = &src[static_cast<std::size_t>(qy) * w];
        for (int qx = x0; qx <= x1; ++qx) {
          const double v = prow[qx];
          const double dr = center - v;
          const double weight = srow[qx - x + radius] * std::exp(-(dr * dr) * inv_2r2);
          num += weight * v;
          den += weight;
        }
      }
      dst[static_cast<std::size_t>(y) * w + x] = static_cast<float>(num / den);
    }
  }
  return out;
}

struct CellIndexer {
  GridDims dims;
  int width;
  int height;

  std::size_t operator()(float guide, int x, int y) const noexcept {
    const int d = std::min(static_cast<int>(guide * dims.depth), dims.depth - 1);
    const int r = std::min(static_cast<int>(static_cast<double>(y) / height * dims.rows),
                           dims.rows - 1);
    const int c = std::min(static_cast<int>(static_cast<double>(x) / width * dims.cols),
                           dims.cols - 1);
    return (static_cast<std::size_t>(d) * dims.rows + r) * dims.cols + c;
  }
};

void splat_row(const CellIndexer& index, std::span<const float> plane,
               std::span<const float> guide, int y, std::vector<GridMoments>& grid) {
  const std::size_t row = static_cast<std::size_t>(y) * index.width;
  for (int x = 0; x < index.width; ++x) {
    const double g = guide[row + x];
    const double v = plane[row + x];
    GridMoments& m = grid[index(guide[row + x], x, y)];
    m.weight += 1.0;
    m.g += g;
    m.gg += g * g;
    m.v += v;
    m.gv += g * v;
  }
}

std::vector<GridMoments> splat_serial(const CellIndexer& index, const Image& plane,
                                      const Image& guide, std::size_t cells) {
  std::vector<GridMoments> grid(cells);
  for (int y = 0; y < plane.height(); ++y) splat_row(index, plane.data(), guide.data(), y, grid);
  return grid;
}

// Rows are split into fixed-size chunks independent of the worker count; the
// per-chunk grids are summed in chunk order, so the result is reproducible.
std::vector<GridMoments> splat_parallel(const CellIndexer& index, const Image& plane,
                                        const Image& guide, std::size_t cells) {
  constexpr int kRowsPerChunk = 16;
  const int h = plane.height();
  const int chunks = (h + kRowsPerChunk - 1) / kRowsPerChunk;
  std::vector<std::vector<GridMoments>> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < chunks; ++k) {
    std::vector<GridMoments> local(cells);
    const int y1 = std::min(h, (k + 1) * kRowsPerChunk);
    for (int y = k * kRowsPerChunk; y < y1; ++y) {
      splat_row(index, plane.data(), guide.data(), y, local);
    }
    partial[k] = std::move(local);
  }
  std::vector<GridMoments> grid(cells);
  for (const auto& local : partial) {
    for (std::size_t i = 0; i < cells; ++i) {
      grid[i].weight += local[i].weight;
      grid[i].g += local[i].g;
      grid[i].gg += local[i].gg;
      grid[i].v += local[i].v;
      grid[i].gv += local[i].gv;
    }
  }
  return grid;
}

GridMoments scaled_sum(const GridMoments& a, double wa, const GridMoments& b, double wb) {
  return {a.weight * wa + b.weight * wb, a.g * wa + b.g * wb, a.gg * wa + b.gg * wb,
          a.v * wa + b.v * wb, a.gv * wa + b.gv * wb};
}

// [1, 2, 1] / 4 along one axis with zero padding.
void blur_axis(std::vector<GridMoments>& grid, const GridDims& dims, int axis) {
  const int extent = axis == 0 ? dims.depth : (axis == 1 ? dims.rows : dims.cols);
  const std::size_t stride = axis == 0 ? static_cast<std::size_t>(dims.rows) * dims.cols
                                       : (axis == 1 ? static_cast<std::size_t>(dims.cols) : 1);
  const std::vector<GridMoments> src = grid;
  for (int d = 0; d < dims.depth; ++d) {
    for (int r = 0; r < dims.rows; ++r) {
      for (int c = 0; c < dims.cols; ++c) {
        const int pos = axis == 0 ? d : (axis == 1 ? r : c);
        const std::size_t i = (static_cast<std::size_t>(d) * dims.rows + r) * dims.cols + c;
        GridMoments m = scaled_sum(src[i], 0.5, GridMoments{}, 0.0);
        if (pos > 0) m = scaled_sum(m, 1.0, src[i - stride], 0.25);
        if (pos + 1 < extent) m = scaled_sum(m, 1.0, src[i + stride], 0.25);
        grid[i] = m;
      }
    }
  }
}

void check_dims(const GridDims& dims) {
  if (dims.depth < 1 || dims.rows < 1 || dims.cols < 1 || dims.depth > 256 ||
      dims.rows > 256 || dims.cols > 256) {
    throw Error(ErrorKind::parameter, "grid dims must be in [1, 256], got " +
                                          std::to_string(dims.depth) + "," +
                                          std::to_string(dims.rows) + "," +
                                          std::to_string(dims.cols));
  }
}

void check_guide_range(const Image& guide, const char* what) {
  auto g = guide.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0.0f || g[i] > 1.0f) {
      throw Error(ErrorKind::range, std::string(what) + ": guide value " +
                                        std::to_string(g[i]) + " at index " +
                                        std::to_string(i) + " is outside [0, 1]");
    }
  }
}

struct SliceCoord {
  int lo;
  int hi;
  double frac;
};

SliceCoord slice_coord(double pos, int extent) {
  pos = std::clamp(pos, 0.0, static_cast<double>(extent - 1));
  const int lo = static_cast<int>(std::floor(pos));
  const int hi = std::min(lo + 1, extent - 1);
  return {lo, hi, pos - lo};
}

void slice_pixel(const BilateralGrid& grid, double guide, int x, int y, int width,
                 int height, double& a_out, double& b_out) {
  const GridDims& dims = grid.dims();
  const SliceCoord zd = slice_coord(guide * dims.depth - 0.5, dims.depth);
  const SliceCoord zr = slice_coord(static_cast<double>(y) / height * dims.rows - 0.5, dims.rows);
  const SliceCoord zc = slice_coord(static_cast<double>(x) / width * dims.cols - 0.5, dims.cols);
  double a = 0.0;
  double b = 0.0;
  for (int i = 0; i < 2; ++i) {
    const int d = i ? zd.hi : zd.lo;
    const double wd = i ? zd.frac : 1.0 - zd.frac;
    for (int j = 0; j < 2; ++j) {
      const int r = j ? zr.hi : zr.lo;
      const double wr = j ? zr.frac : 1.0 - zr.frac;
      for (int k = 0; k < 2; ++k) {
        const int c = k ? zc.hi : zc.lo;
        const double wc = k ? zc.frac : 1.0 - zc.frac;
        const double wt = wd * wr * wc;
        const std::size_t cell = grid.cell(d, r, c);
        a += wt * grid.a(cell);
        b += wt * grid.b(cell);
      }
    }
  }
  a_out = a;
  b_out = b;
}

}  // namespace

Image bilateral_brute(const Image& plane, double sigma_s, double sigma_r, Exec exec) {
  require_channels(plane, 1, "bilateral_brute");
  check_sigmas(sigma_s, sigma_r);
  return exec == Exec::serial ? bilateral_serial(plane, sigma_s, sigma_r)
                              : bilateral_parallel(plane, sigma_s, sigma_r);
}

BilateralGrid::BilateralGrid(GridDims dims, int channel_id)
    : dims_(dims), channel_id_(channel_id) {
  check_dims(dims);
  const std::size_t n = static_cast<std::size_t>(dims.depth) * dims.rows * dims.cols;
  a_.assign(n, 1.0);
  b_.assign(n, 0.0);
  weight_.assign(n, 0.0);
}

void BilateralGrid::set_cell(std::size_t cell, double a, double b, double weight) {
  a_[cell] = a;
  b_[cell] = b;
  weight_[cell] = weight;
}

BilateralGrid grid_build(const Image& plane, const Image& guide, GridDims dims,
                         int channel_id, Exec exec) {
  require_channels(plane, 1, "grid_build");
  require_same_shape(plane, guide, "grid_build");
  check_guide_range(guide, "grid_build");
  BilateralGrid grid(dims, channel_id);

  const CellIndexer index{dims, plane.width(), plane.height()};
  std::vector<GridMoments> moments =
      exec == Exec::serial ? splat_serial(index, plane, guide, grid.cell_count())
                           : splat_parallel(index, plane, guide, grid.cell_count());
  grid.set_raw_moments(moments);

  for (int axis = 0; axis < 3; ++axis) blur_axis(moments, dims, axis);

  for (std::size_t i = 0; i < moments.size(); ++i) {
    const GridMoments& m = moments[i];
    if (!(m.weight > 0.0)) continue;  // neutral (1, 0)
    const double mean_g = m.g / m.weight;
    const double mean_v = m.v / m.weight;
    const double var = std::max(0.0, m.gg / m.weight - mean_g * mean_g);
    const double cov = m.gv / m.weight - mean_g * mean_v;
    const double a = cov / (var + BilateralGrid::kRidge);
    grid.set_cell(i, a, mean_v - a * mean_g, m.weight);
  }
  return grid;
}

CoefficientMaps grid_slice(const BilateralGrid& grid, const Image& guide, Exec exec) {
  require_channels(guide, 1, "grid_slice");
  check_guide_range(guide, "grid_slice");
  const int w = guide.width();
  const int h = guide.height();
  CoefficientMaps maps{Image(w, h, 1), Image(w, h, 1)};
  auto g = guide.data();
  auto a = maps.a.data();
  auto b = maps.b.data();
  auto row = [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      double av = 0.0;
      double bv = 0.0;
      slice_pixel(grid, g[p], x, y, w, h, av, bv);
      a[p] = static_cast<float>(av);
      b[p] = static_cast<float>(bv);
    }
  };
  if (exec == Exec::serial) {
    for (int y = 0; y < h; ++y) row(y);
  } else {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) row(y);
  }
  return maps;
}

Image cdm_denoise(const Image& rgb, GridDims dims, Exec exec) {
  require_channels(rgb, 3, "cdm_denoise");
  std::vector<Image> planes = split_channels(rgb);
  for (int c = 0; c < 3; ++c) {
    const Image& plane = planes[c];
    const BilateralGrid grid = grid_build(plane, plane, dims, c, exec);
    const CoefficientMaps coeffs = grid_slice(grid, plane, exec);
    Image out(plane.width(), plane.height(), 1);
    auto src = plane.data();
    auto a = coeffs.a.data();
    auto b = coeffs.b.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < dst.size(); ++p) {
      const double v = static_cast<double>(a[p]) * src[p] + b[p];
      dst[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    planes[c] = std::move(out);
  }
  return merge_channels(planes);
}

Image bilateral_denoise(const Image& rgb, double sigma_s, double sigma_r, Exec exec) {
  require_channels(rgb, 3, "bilateral_denoise");
  std::vector<Image> planes = split_channels(rgb);
  for (auto& plane : planes) plane = bilateral_brute(plane, sigma_s, sigma_r, exec);
  return merge_channels(planes);
}

}  // namespace lowlight
