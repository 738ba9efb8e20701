#include "lowlight/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

void check_ssim_params(const SsimParams& p) {
  if (p.window < 1 || p.window % 2 == 0 || !(p.sigma > 0.0) || !(p.k1 > 0.0) ||
      !(p.k2 > 0.0) || !(p.dynamic_range > 0.0)) {
    throw Error(ErrorKind::parameter, "ssim: window must be odd and positive; sigma, k1, "
                                      "k2 and dynamic range must be positive");
  }
}

struct SsimConstants {
  double c1;
  double c2;
};

double ssim_at(double mu_a, double mu_b, double saa, double sbb, double sab,
               SsimConstants k) {
  const double var_a = saa - mu_a * mu_a;
  const double var_b = sbb - mu_b * mu_b;
  const double cov = sab - mu_a * mu_b;
  return ((2.0 * mu_a * mu_b + k.c1) * (2.0 * cov + k.c2)) /
         ((mu_a * mu_a + mu_b * mu_b + k.c1) * (var_a + var_b + k.c2));
}

// Reference: direct 2-D window sums at every valid position.
double ssim_serial(const Image& a, const Image& b, const std::vector<double>& taps,
                   SsimConstants k) {
  const int win = static_cast<int>(taps.size());
  const int out_w = a.width() - win + 1;
  const int out_h = a.height() - win + 1;
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y0 = 0; y0 < out_h; ++y0) {
      for (int x0 = 0; x0 < out_w; ++x0) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int j = 0; j < win; ++j) {
          for (int i = 0; i < win; ++i) {
            const double w = taps[j] * taps[i];
            const double va = a.at(x0 + i, y0 + j, c);
            const double vb = b.at(x0 + i, y0 + j, c);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        }
        total += ssim_at(ma, mb, saa, sbb, sab, k);
      }
    }
  }
  return total / (static_cast<double>(out_w) * out_h * a.channels());
}

// Separable filtering of the five moment maps; per-row partial sums are
// reduced in row order so the result does not depend on the worker count.
double ssim_parallel(const Image& a, const Image& b, const std::vector<double>& taps,
                     SsimConstants k) {
  const int win = static_cast<int>(taps.size());
  const int w = a.width();
  const int h = a.height();
  const int out_w = w - win + 1;
  const int out_h = h - win + 1;
  const int ch = a.channels();

  // Horizontal pass: moments[m][(y * out_w + x) * ch + c]
  const std::size_t hsize = static_cast<std::size_t>(h) * out_w * ch;
  std::vector<double> hma(hsize), hmb(hsize), hsaa(hsize), hsbb(hsize), hsab(hsize);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < win; ++i) {
          const double va = a.at(x + i, y, c);
          const double vb = b.at(x + i, y, c);
          const double t = taps[i];
          ma += t * va;
          mb += t * vb;
          saa += t * va * va;
          sbb += t * vb * vb;
          sab += t * va * vb;
        }
        const std::size_t o = (static_cast<std::size_t>(y) * out_w + x) * ch + c;
        hma[o] = ma;
        hmb[o] = mb;
        hsaa[o] = saa;
        hsbb[o] = sbb;
        hsab[o] = sab;
      }
    }
  }

  std::vector<double> row_sums(static_cast<std::size_t>(out_h), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    double acc = 0.0;
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int j = 0; j < win; ++j) {
          const std::size_t o = (static_cast<std::size_t>(y + j) * out_w + x) * ch + c;
          const double t = taps[j];
          ma += t * hma[o];
          mb += t * hmb[o];
          saa += t * hsaa[o];
          sbb += t * hsbb[o];
          sab += t * hsab[o];
        }
        acc += ssim_at(ma, mb, saa, sbb, sab, k);
      }
    }
    row_sums[y] = acc;
  }
  const double total = std::accumulate(row_sums.begin(), row_sums.end(), 0.0);
  return total / (static_cast<double>(out_w) * out_h * ch);
}

}  // namespace

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  auto da = a.data();
  auto db = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    acc += d * d;
  }
  return acc / static_cast<double>(da.size());
}

double mae(const Image& a, const Image& b) {
  require_same_shape(a, b, "mae");
  auto da = a.data();
  auto db = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    acc += std::abs(static_cast<double>(da[i]) - db[i]);
  }
  return acc / static_cast<double>(da.size());
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

std::string format_db(double db, int digits) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  if (std::isnan(db)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, db);
  return buf;
}

double ssim(const Image& a, const Image& b, const SsimParams& p, Exec exec) {
  require_same_shape(a, b, "ssim");
  check_ssim_params(p);
  if (a.width() < p.window || a.height() < p.window) {
    throw Error(ErrorKind::size, "ssim: image " + std::to_string(a.width()) + "x" +
                                     std::to_string(a.height()) +
                                     " is smaller than the " + std::to_string(p.window) +
                                     "x" + std::to_string(p.window) + " window");
  }
  const auto taps = gaussian_taps(p.window, p.sigma);
  const SsimConstants k{(p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range),
                        (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range)};
  return exec == Exec::serial ? ssim_serial(a, b, taps, k) : ssim_parallel(a, b, taps, k);
}

Gradient gradient(const Image& img) {
  Image gx(img.width(), img.height(), img.channels());
  Image gy(img.width(), img.height(), img.channels());
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const float v = img.at(x, y, c);
        gx.at(x, y, c) = x + 1 < w ? img.at(x + 1, y, c) - v : 0.0f;
        gy.at(x, y, c) = y + 1 < h ? img.at(x, y + 1, c) - v : 0.0f;
      }
    }
  }
  return {std::move(gx), std::move(gy)};
}

double gradient_mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "gradient_mse");
  const Gradient ga = gradient(a);
  const Gradient gb = gradient(b);
  return mse(ga.gx, gb.gx) + mse(ga.gy, gb.gy);
}

double loss_decom(const Image& r_low, const Image& r_high, const Image& i_low,
                  const Image& i_high, const Image& s_low, const Image& s_high) {
  require_same_shape(r_low, r_high, "loss_decom");
  require_same_shape(r_low, s_low, "loss_decom");
  require_same_shape(r_high, s_high, "loss_decom");
  require_channels(i_low, 1, "loss_decom");
  require_channels(i_high, 1, "loss_decom");
  if (!i_low.same_size(r_low) || !i_high.same_size(r_high)) {
    throw Error(ErrorKind::shape, "loss_decom: illumination size differs from reflectance");
  }

  // R * I is formed in float, like every stored image, so S = recompose(R, I)
  // scores exactly zero.
  auto reconstruction = [](const Image& r, const Image& i, const Image& s) {
    const int ch = r.channels();
    auto dr = r.data();
    auto di = i.data();
    auto ds = s.data();
    double acc = 0.0;
    for (std::size_t p = 0; p < di.size(); ++p) {
      for (int c = 0; c < ch; ++c) {
        const std::size_t k = p * ch + c;
        acc += std::abs(static_cast<double>(dr[k] * di[p]) - ds[k]);
      }
    }
    return acc / static_cast<double>(dr.size());
  };

  return mae(r_low, r_high) + reconstruction(r_low, i_low, s_low) +
         reconstruction(r_high, i_high, s_high);
}

double loss_restore(const Image& r_hat, const Image& r_high) {
  require_same_shape(r_hat, r_high, "loss_restore");
  require_channels(r_hat, 3, "loss_restore");
  return mse(r_hat, r_high) - ssim(r_hat, r_high) + gradient_mse(r_hat, r_high);
}

double loss_illum(const Image& i_hat, const Image& i_high) {
  require_same_shape(i_hat, i_high, "loss_illum");
  require_channels(i_hat, 1, "loss_illum");
  return mse(i_hat, i_high) + gradient_mse(i_hat, i_high);
}

}  // namespace lowlight
