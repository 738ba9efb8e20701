#pragma once

#include "lowlight/image.hpp"

namespace lowlight {

/// Illumination curve I -> I^gamma. gamma < 1 brightens, gamma == 1 is the
/// identity.
struct AdjustParams {
  double gamma = 1.0;
};

Image adjust_illumination(const Image& illumination, const AdjustParams& params);

/// gamma = ln(mean(I_ref)) / ln(mean(I_low)), so that a constant I_low is
/// mapped exactly onto the mean of I_ref. Both means must lie in (0, 1).
double auto_gamma(const Image& i_low, const Image& i_ref);

}  // namespace lowlight
