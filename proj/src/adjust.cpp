#include "lowlight/adjust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

double mean_of(const Image& img) {
  auto d = img.data();
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

}  // namespace

Image adjust_illumination(const Image& illumination, const AdjustParams& params) {
  require_channels(illumination, 1, "adjust_illumination");
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw Error(ErrorKind::parameter,
                "adjust_illumination: gamma must be positive and finite, got " +
                    std::to_string(params.gamma));
  }
  if (params.gamma == 1.0) return illumination;
  Image out = illumination;
  for (float& v : out.data()) {
    const double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
    v = static_cast<float>(std::pow(x, params.gamma));
  }
  return out;
}

double auto_gamma(const Image& i_low, const Image& i_ref) {
  require_channels(i_low, 1, "auto_gamma");
  require_channels(i_ref, 1, "auto_gamma");
  const double low = mean_of(i_low);
  const double ref = mean_of(i_ref);
  if (!(low > 0.0 && low < 1.0) || !(ref > 0.0 && ref < 1.0)) {
    throw Error(ErrorKind::calibration,
                "auto_gamma: illumination means must lie strictly inside (0, 1), got " +
                    std::to_string(low) + " and " + std::to_string(ref));
  }
  return std::log(ref) / std::log(low);
}

}  // namespace lowlight
