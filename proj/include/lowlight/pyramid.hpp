#pragma once

#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/parallel.hpp"

namespace lowlight {

/// Band-pass levels L_0..L_{K-2} (full resolution first) plus the coarsest
/// Gaussian level. Level k has size ceil(H / 2^k) x ceil(W / 2^k).
struct LaplacianPyramid {
  std::vector<Image> bands;
  Image base;

  int levels() const noexcept { return static_cast<int>(bands.size()) + 1; }
};

/// Sequential 2x2 max pooling; levels[0] is the input map.
struct IllumPyramid {
  std::vector<Image> levels;
};

/// Per-pixel displacement (dx, dy) in pixels.
struct OffsetField {
  Image dx;
  Image dy;
};

inline constexpr int kDefaultPyramidLevels = 3;

/// Separable [1 4 6 4 1] / 16 blur with edge replication followed by keeping
/// every other row and column. Output is ceil(H/2) x ceil(W/2).
Image pyr_down(const Image& img, Exec exec = Exec::parallel);

/// Polyphase form of zero insertion + [1 4 6 4 1] / 16 blur scaled by 4,
/// reading the coarse level with edge replication, cropped to width x height.
Image pyr_up(const Image& img, int width, int height, Exec exec = Exec::parallel);

/// Needs min(H, W) >= 2^(levels - 1).
LaplacianPyramid build_laplacian(const Image& img, int levels = kDefaultPyramidLevels,
                                 Exec exec = Exec::parallel);

/// Upsample-and-add from the base; clamps to [0, 1] only at the end.
Image reconstruct(const LaplacianPyramid& pyr, Exec exec = Exec::parallel);

/// Upsample-and-add without the final clamp.
Image reconstruct_unclamped(const LaplacianPyramid& pyr, Exec exec = Exec::parallel);

/// 2x2 max pool; odd edges use the partial window.
Image max_pool2(const Image& img);

IllumPyramid build_illum_pyramid(const Image& illumination, int levels = kDefaultPyramidLevels);

/// 1 - I.
Image invert_illum(const Image& illumination);

/// (dx, dy) = rho * grad(D), central differences with edge replication, each
/// component clamped to [-rho, rho].
OffsetField offsets_from_illum(const Image& inverted, double rho);

/// out(p) = bilinear(plane, p + field(p)) with coordinates clamped to the image.
Image nonrigid_sample(const Image& plane, const OffsetField& field,
                      Exec exec = Exec::parallel);

struct RestoreParams {
  double alpha = 0.8;  // dark-region band gain
  double rho = 2.0;    // max sampling offset in pixels
  int levels = kDefaultPyramidLevels;
};

/// Per channel: bands L_k are resampled along the inverted-illumination
/// gradient and scaled by 1 + alpha (1 - I_k), then the pyramid is rebuilt.
Image rpm_restore(const Image& rgb, const Image& illumination, const RestoreParams& params = {},
                  Exec exec = Exec::parallel);

}  // namespace lowlight
