#pragma once

#include <functional>
#include <span>

#include "lowlight/image.hpp"
#include "lowlight/parallel.hpp"

namespace lowlight {

/// S = R * I + N with a single-channel illumination shared by the three color
/// channels.
struct RetinexDecomposition {
  Image reflectance;   // 3 channels
  Image illumination;  // 1 channel, in [0, 1]
  Image residual;      // 3 channels, S - R * I
};

struct SmoothingParams {
  double lambda = 0.15;
  int iterations = 30;
  double edge_sigma = 0.1;  // w_pq = exp(-|I0_p - I0_q| / edge_sigma)
  double damping = 0.8;
};

inline constexpr float kDefaultEpsilon = 1e-4f;

/// Max-RGB prior: per-pixel maximum over the three channels.
Image init_illumination(const Image& s);

/// Called after every iteration with the 1-based iteration number and the
/// current iterate (double precision, row-major).
using IterateObserver = std::function<void(int, std::span<const double>)>;

/// Edge-aware smoothing of the initial illumination by damped Jacobi on
///   E(I) = sum_p (I_p - I0_p)^2 + lambda * sum_{p~q} w_pq (I_p - I_q)^2
/// over 4-connected edges, each iterate projected onto [I0, 1]. The step is a
/// diagonally scaled projected gradient step, so E never increases.
Image refine_illumination(const Image& i0, const SmoothingParams& params = {},
                          Exec exec = Exec::parallel,
                          const IterateObserver& observer = {});

/// R_c = clamp(S_c / max(I, epsilon), 0, 1).
Image compute_reflectance(const Image& s, const Image& illumination,
                          float epsilon = kDefaultEpsilon);

/// out_c = clamp(R_c * I, 0, 1).
Image recompose(const Image& reflectance, const Image& illumination);

/// init -> refine -> reflectance; residual = S - R * I.
RetinexDecomposition decompose(const Image& s, const SmoothingParams& params = {},
                               float epsilon = kDefaultEpsilon,
                               Exec exec = Exec::parallel);

/// Per-sample S - recompose(R, I).
Image residual(const Image& s, const Image& reflectance, const Image& illumination);

}  // namespace lowlight
