#include "lowlight/retinex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

// Edge weights on the 4-connected grid: right[p] couples p and p+1, down[p]
// couples p and p+width. Missing edges carry weight 0.
struct EdgeWeights {
  std::vector<double> right;
  std::vector<double> down;
  std::vector<double> degree;
};

EdgeWeights edge_weights(const Image& i0, double edge_sigma) {
  const int w = i0.width();
  const int h = i0.height();
  const std::size_t n = i0.pixel_count();
  EdgeWeights e{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0)};
  auto v = i0.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w) {
        e.right[p] = std::exp(-std::abs(static_cast<double>(v[p]) - v[p + 1]) / edge_sigma);
      }
      if (y + 1 < h) {
        e.down[p] = std::exp(-std::abs(static_cast<double>(v[p]) - v[p + w]) / edge_sigma);
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      double d = e.right[p] + e.down[p];
      if (x > 0) d += e.right[p - 1];
      if (y > 0) d += e.down[p - w];
      e.degree[p] = d;
    }
  }
  return e;
}

struct JacobiContext {
  int width;
  int height;
  double lambda;
  double damping;
  std::span<const float> i0;
  const EdgeWeights* edges;
};

double jacobi_update(const JacobiContext& ctx, std::span<const double> cur, int x, int y) {
  const int w = ctx.width;
  const std::size_t p = static_cast<std::size_t>(y) * w + x;
  const EdgeWeights& e = *ctx.edges;
  double pull = 0.0;
  if (x + 1 < w) pull += e.right[p] * cur[p + 1];
  if (x > 0) pull += e.right[p - 1] * cur[p - 1];
  if (y + 1 < ctx.height) pull += e.down[p] * cur[p + w];
  if (y > 0) pull += e.down[p - w] * cur[p - w];
  const double lower = ctx.i0[p];
  const double jacobi = (lower + ctx.lambda * pull) / (1.0 + ctx.lambda * e.degree[p]);
  const double damped = (1.0 - ctx.damping) * cur[p] + ctx.damping * jacobi;
  return std::clamp(damped, lower, 1.0);
}

void jacobi_sweep_serial(const JacobiContext& ctx, std::span<const double> cur,
                         std::span<double> next) {
  for (int y = 0; y < ctx.height; ++y) {
    for (int x = 0; x < ctx.width; ++x) {
      next[static_cast<std::size_t>(y) * ctx.width + x] = jacobi_update(ctx, cur, x, y);
    }
  }
}

// Each update reads only the previous iterate, so rows are independent.
void jacobi_sweep_parallel(const JacobiContext& ctx, std::span<const double> cur,
                           std::span<double> next) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ctx.height; ++y) {
    for (int x = 0; x < ctx.width; ++x) {
      next[static_cast<std::size_t>(y) * ctx.width + x] = jacobi_update(ctx, cur, x, y);
    }
  }
}

}  // namespace

Image init_illumination(const Image& s) {
  require_channels(s, 3, "init_illumination");
  Image out(s.width(), s.height(), 1);
  auto src = s.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    dst[p] = std::max({src[3 * p], src[3 * p + 1], src[3 * p + 2]});
  }
  return out;
}

Image refine_illumination(const Image& i0, const SmoothingParams& params, Exec exec,
                          const IterateObserver& observer) {
  require_channels(i0, 1, "refine_illumination");
  if (!(params.lambda >= 0.0) || params.iterations < 0 || !(params.edge_sigma > 0.0) ||
      !(params.damping > 0.0) || params.damping > 1.0) {
    throw Error(ErrorKind::parameter,
                "refine_illumination: need lambda >= 0, iterations >= 0, edge_sigma > 0 "
                "and damping in (0, 1]");
  }
  if (params.lambda == 0.0 || params.iterations == 0) return i0;

  const EdgeWeights edges = edge_weights(i0, params.edge_sigma);
  const JacobiContext ctx{i0.width(), i0.height(), params.lambda, params.damping,
                          i0.data(), &edges};

  std::vector<double> cur(i0.data().begin(), i0.data().end());
  std::vector<double> next(cur.size());
  for (int it = 1; it <= params.iterations; ++it) {
    if (exec == Exec::serial) {
      jacobi_sweep_serial(ctx, cur, next);
    } else {
      jacobi_sweep_parallel(ctx, cur, next);
    }
    cur.swap(next);
    if (observer) observer(it, cur);
  }

  Image out(i0.width(), i0.height(), 1);
  auto dst = out.data();
  auto lower = i0.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    dst[p] = std::clamp(static_cast<float>(cur[p]), lower[p], 1.0f);
  }
  return out;
}

Image compute_reflectance(const Image& s, const Image& illumination, float epsilon) {
  require_channels(s, 3, "compute_reflectance");
  require_channels(illumination, 1, "compute_reflectance");
  if (!s.same_size(illumination)) {
    throw Error(ErrorKind::shape, "compute_reflectance: illumination size differs from image");
  }
  if (!(epsilon > 0.0f)) {
    throw Error(ErrorKind::parameter, "compute_reflectance: epsilon must be positive");
  }
  Image out(s.width(), s.height(), 3);
  auto src = s.data();
  auto il = illumination.data();
  auto dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < il.size(); ++p) {
    const float denom = std::max(il[p], epsilon);
    for (int c = 0; c < 3; ++c) {
      dst[3 * p + c] = std::clamp(src[3 * p + c] / denom, 0.0f, 1.0f);
    }
  }
  return out;
}

Image recompose(const Image& reflectance, const Image& illumination) {
  require_channels(reflectance, 3, "recompose");
  require_channels(illumination, 1, "recompose");
  if (!reflectance.same_size(illumination)) {
    throw Error(ErrorKind::shape, "recompose: illumination size differs from reflectance");
  }
  Image out(reflectance.width(), reflectance.height(), 3);
  auto r = reflectance.data();
  auto il = illumination.data();
  auto dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < il.size(); ++p) {
    for (int c = 0; c < 3; ++c) {
      dst[3 * p + c] = std::clamp(r[3 * p + c] * il[p], 0.0f, 1.0f);
    }
  }
  return out;
}

Image residual(const Image& s, const Image& reflectance, const Image& illumination) {
  require_same_shape(s, reflectance, "residual");
  Image out = recompose(reflectance, illumination);
  auto src = s.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k] - dst[k];
  return out;
}

RetinexDecomposition decompose(const Image& s, const SmoothingParams& params,
                               float epsilon, Exec exec) {
  Image illumination = refine_illumination(init_illumination(s), params, exec);
  Image reflectance = compute_reflectance(s, illumination, epsilon);
  Image res = residual(s, reflectance, illumination);
  return {std::move(reflectance), std::move(illumination), std::move(res)};
}

}  // namespace lowlight
