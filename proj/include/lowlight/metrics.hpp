#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/parallel.hpp"

namespace lowlight {

/// Windowed SSIM constants. The defaults are the reference-standard values:
/// 11x11 Gaussian window with sigma 1.5, k1 = 0.01, k2 = 0.03, L = 1.
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

/// Mean over every sample of (a - b)^2.
double mse(const Image& a, const Image& b);
/// Mean over every sample of |a - b|.
double mae(const Image& a, const Image& b);

/// 10 log10(1 / MSE). Identical images give +infinity.
double psnr(const Image& a, const Image& b);

/// "inf" for the infinite sentinel, otherwise fixed-point with `digits`
/// decimals.
std::string format_db(double db, int digits = 4);

/// Mean SSIM over all valid window positions and channels. Images must share
/// a shape and have min(width, height) >= window.
double ssim(const Image& a, const Image& b, const SsimParams& p = {},
            Exec exec = Exec::parallel);

struct Gradient {
  Image gx;
  Image gy;
};

/// Forward differences; the last column of gx and last row of gy are zero.
Gradient gradient(const Image& img);

/// Mean squared difference between two gradients, summed over the two
/// directions: MSE(gx_a, gx_b) + MSE(gy_a, gy_b).
double gradient_mse(const Image& a, const Image& b);

/// Decomposition objective: |R_low - R_high| + sum_i |R_i * I_i - S_i|, each
/// term a mean absolute error. I_i is single-channel and broadcast over R_i.
double loss_decom(const Image& r_low, const Image& r_high, const Image& i_low,
                  const Image& i_high, const Image& s_low, const Image& s_high);

/// Restoration objective: MSE - SSIM + gradient MSE. Minimum -1 at R_hat == R_high.
double loss_restore(const Image& r_hat, const Image& r_high);

/// Illumination objective: MSE + gradient MSE on single-channel maps.
double loss_illum(const Image& i_hat, const Image& i_high);

}  // namespace lowlight
