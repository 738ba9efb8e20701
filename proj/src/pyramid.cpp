#include "lowlight/pyramid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

int half_up(int n) { return (n + 1) / 2; }

Image pyr_down_serial(const Image& img) {
  const int ow = half_up(img.width());
  const int oh = half_up(img.height());
  const int ch = img.channels();
  Image out(ow, oh, ch);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int v = -2; v <= 2; ++v) {
          for (int u = -2; u <= 2; ++u) {
            acc += kBinomial[v + 2] * kBinomial[u + 2] * img.clamped(2 * x + u, 2 * y + v, c);
          }
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Image pyr_down_parallel(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  const int ow = half_up(w);
  const int oh = half_up(h);
  const int ch = img.channels();
  // Horizontal pass evaluated only at even columns.
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow * ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int u = -2; u <= 2; ++u) acc += kBinomial[u + 2] * img.clamped(2 * x + u, y, c);
        tmp[(static_cast<std::size_t>(y) * ow + x) * ch + c] = acc;
      }
    }
  }
  Image out(ow, oh, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int v = -2; v <= 2; ++v) {
          const int sy = std::clamp(2 * y + v, 0, h - 1);
          acc += kBinomial[v + 2] * tmp[(static_cast<std::size_t>(sy) * ow + x) * ch + c];
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

// Taps of the upsampling filter: output position t receives coarse sample i
// with weight 2 * binomial[t - 2i + 2] for |t - 2i| <= 2.
template <typename Fn>
void for_each_up_tap(int t, Fn&& fn) {
  for (int i = (t - 1) / 2 - 1; i <= t / 2 + 1; ++i) {
    const int d = t - 2 * i;
    if (d >= -2 && d <= 2) fn(i, 2.0 * kBinomial[d + 2]);
  }
}

Image pyr_up_serial(const Image& img, int width, int height) {
  const int ch = img.channels();
  Image out(width, height, ch);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for_each_up_tap(y, [&](int j, double wy) {
          for_each_up_tap(x, [&](int i, double wx) { acc += wy * wx * img.clamped(i, j, c); });
        });
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Image pyr_up_parallel(const Image& img, int width, int height) {
  const int cw = img.width();
  const int chh = img.height();
  const int ch = img.channels();
  std::vector<double> tmp(static_cast<std::size_t>(chh) * width * ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < chh; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for_each_up_tap(x, [&](int i, double wx) { acc += wx * img.clamped(i, y, c); });
        tmp[(static_cast<std::size_t>(y) * width + x) * ch + c] = acc;
      }
    }
  }
  Image out(width, height, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for_each_up_tap(y, [&](int j, double wy) {
          const int sy = std::clamp(j, 0, chh - 1);
          acc += wy * tmp[(static_cast<std::size_t>(sy) * width + x) * ch + c];
        });
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Image subtract(const Image& a, const Image& b) {
  Image out = a;
  auto d = out.data();
  auto s = b.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
  return out;
}

void add_inplace(Image& a, const Image& b) {
  auto d = a.data();
  auto s = b.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

float bilinear(const Image& plane, double fx, double fy) {
  const int w = plane.width();
  const int h = plane.height();
  fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const double v00 = plane.at(x0, y0);
  const double v10 = plane.at(x1, y0);
  const double v01 = plane.at(x0, y1);
  const double v11 = plane.at(x1, y1);
  const double top = v00 + tx * (v10 - v00);
  const double bottom = v01 + tx * (v11 - v01);
  return static_cast<float>(top + ty * (bottom - top));
}

}  // namespace

Image pyr_down(const Image& img, Exec exec) {
  return exec == Exec::serial ? pyr_down_serial(img) : pyr_down_parallel(img);
}

Image pyr_up(const Image& img, int width, int height, Exec exec) {
  if (width < 1 || height < 1 || half_up(width) != img.width() ||
      half_up(height) != img.height()) {
    throw Error(ErrorKind::structure,
                "pyr_up: " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is not the half-size level of " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  return exec == Exec::serial ? pyr_up_serial(img, width, height)
                              : pyr_up_parallel(img, width, height);
}

LaplacianPyramid build_laplacian(const Image& img, int levels, Exec exec) {
  if (img.empty()) throw Error(ErrorKind::size, "build_laplacian: empty image");
  if (levels < 1 || levels > 16) {
    throw Error(ErrorKind::parameter, "build_laplacian: levels must be in [1, 16]");
  }
  const int need = 1 << (levels - 1);
  if (std::min(img.width(), img.height()) < need) {
    throw Error(ErrorKind::size, "build_laplacian: " + std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()) + " is too small for " +
                                     std::to_string(levels) + " levels (need >= " +
                                     std::to_string(need) + ")");
  }
  LaplacianPyramid pyr;
  Image current = img;
  for (int k = 0; k + 1 < levels; ++k) {
    Image coarser = pyr_down(current, exec);
    pyr.bands.push_back(subtract(current, pyr_up(coarser, current.width(), current.height(), exec)));
    current = std::move(coarser);
  }
  pyr.base = std::move(current);
  return pyr;
}

Image reconstruct_unclamped(const LaplacianPyramid& pyr, Exec exec) {
  if (pyr.base.empty()) throw Error(ErrorKind::structure, "reconstruct: empty base");
  Image current = pyr.base;
  for (auto it = pyr.bands.rbegin(); it != pyr.bands.rend(); ++it) {
    if (it->channels() != current.channels()) {
      throw Error(ErrorKind::structure, "reconstruct: band channel count differs from base");
    }
    Image up = pyr_up(current, it->width(), it->height(), exec);
    add_inplace(up, *it);
    current = std::move(up);
  }
  return current;
}

Image reconstruct(const LaplacianPyramid& pyr, Exec exec) {
  return clamp01(reconstruct_unclamped(pyr, exec));
}

Image max_pool2(const Image& img) {
  const int ow = half_up(img.width());
  const int oh = half_up(img.height());
  const int ch = img.channels();
  Image out(ow, oh, ch);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        float m = img.at(2 * x, 2 * y, c);
        if (2 * x + 1 < img.width()) m = std::max(m, img.at(2 * x + 1, 2 * y, c));
        if (2 * y + 1 < img.height()) {
          m = std::max(m, img.at(2 * x, 2 * y + 1, c));
          if (2 * x + 1 < img.width()) m = std::max(m, img.at(2 * x + 1, 2 * y + 1, c));
        }
        out.at(x, y, c) = m;
      }
    }
  }
  return out;
}

IllumPyramid build_illum_pyramid(const Image& illumination, int levels) {
  require_channels(illumination, 1, "build_illum_pyramid");
  if (levels < 1) throw Error(ErrorKind::parameter, "build_illum_pyramid: levels must be >= 1");
  IllumPyramid pyr;
  pyr.levels.push_back(illumination);
  for (int k = 1; k < levels; ++k) pyr.levels.push_back(max_pool2(pyr.levels.back()));
  return pyr;
}

Image invert_illum(const Image& illumination) {
  Image out = illumination;
  for (float& v : out.data()) v = 1.0f - v;
  return out;
}

OffsetField offsets_from_illum(const Image& inverted, double rho) {
  require_channels(inverted, 1, "offsets_from_illum");
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorKind::parameter, "offsets_from_illum: rho must be >= 0");
  }
  const int w = inverted.width();
  const int h = inverted.height();
  OffsetField field{Image(w, h, 1), Image(w, h, 1)};
  if (rho == 0.0) return field;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx =
          0.5 * (static_cast<double>(inverted.clamped(x + 1, y)) - inverted.clamped(x - 1, y));
      const double gy =
          0.5 * (static_cast<double>(inverted.clamped(x, y + 1)) - inverted.clamped(x, y - 1));
      field.dx.at(x, y) = static_cast<float>(std::clamp(rho * gx, -rho, rho));
      field.dy.at(x, y) = static_cast<float>(std::clamp(rho * gy, -rho, rho));
    }
  }
  return field;
}

Image nonrigid_sample(const Image& plane, const OffsetField& field, Exec exec) {
  require_channels(plane, 1, "nonrigid_sample");
  if (!field.dx.same_shape(plane) || !field.dy.same_shape(plane)) {
    throw Error(ErrorKind::shape, "nonrigid_sample: offset field size differs from plane");
  }
  const int w = plane.width();
  const int h = plane.height();
  Image out(w, h, 1);
  auto row = [&](int y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = bilinear(plane, x + static_cast<double>(field.dx.at(x, y)),
                              y + static_cast<double>(field.dy.at(x, y)));
    }
  };
  if (exec == Exec::serial) {
    for (int y = 0; y < h; ++y) row(y);
  } else {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) row(y);
  }
  return out;
}

Image rpm_restore(const Image& rgb, const Image& illumination, const RestoreParams& params,
                  Exec exec) {
  require_channels(rgb, 3, "rpm_restore");
  require_channels(illumination, 1, "rpm_restore");
  if (!rgb.same_size(illumination)) {
    throw Error(ErrorKind::shape, "rpm_restore: illumination size differs from image");
  }
  if (!(params.alpha >= 0.0) || !(params.rho >= 0.0) || !std::isfinite(params.alpha)) {
    throw Error(ErrorKind::parameter, "rpm_restore: alpha and rho must be >= 0");
  }
  const IllumPyramid lit = build_illum_pyramid(illumination, params.levels);

  // Inverted maps and offsets depend only on the illumination, shared by channels.
  std::vector<Image> dark;
  std::vector<OffsetField> fields;
  for (int k = 0; k + 1 < params.levels; ++k) {
    dark.push_back(invert_illum(lit.levels[k]));
    fields.push_back(offsets_from_illum(dark.back(), params.rho));
  }

  std::vector<Image> planes = split_channels(rgb);
  for (Image& plane : planes) {
    LaplacianPyramid pyr = build_laplacian(plane, params.levels, exec);
    for (std::size_t k = 0; k < pyr.bands.size(); ++k) {
      Image band = nonrigid_sample(pyr.bands[k], fields[k], exec);
      auto b = band.data();
      auto d = dark[k].data();
      for (std::size_t p = 0; p < b.size(); ++p) {
        b[p] = static_cast<float>(b[p] * (1.0 + params.alpha * d[p]));
      }
      pyr.bands[k] = std::move(band);
    }
    plane = reconstruct(pyr, exec);
  }
  return merge_channels(planes);
}

}  // namespace lowlight
