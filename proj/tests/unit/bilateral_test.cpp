#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lowlight/bilateral.hpp"
#include "lowlight/error.hpp"
#include "support/oracles.hpp"

namespace lowlight {
namespace {

TEST(BilateralBrute, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(oracle::kSeed);
  for (int i = 0; i < 4; ++i) {
    const Image plane = oracle::random_image(rng, 16, 16, 1);
    for (double ss : {0.5, 1.0, 2.0}) {
      for (double sr : {0.05, 0.1, 0.3}) {
        const Image want = oracle::bilateral(plane, ss, sr);
        EXPECT_LE(oracle::max_abs_diff(bilateral_brute(plane, ss, sr, Exec::serial), want), 1e-6);
        EXPECT_LE(oracle::max_abs_diff(bilateral_brute(plane, ss, sr, Exec::parallel), want), 1e-6);
      }
    }
  }
}

TEST(BilateralBrute, CenterImpulse) {
  Image plane(5, 5, 1, 0.0f);
  plane.at(2, 2) = 1.0f;
  EXPECT_LE(oracle::max_abs_diff(bilateral_brute(plane, 1.0, 0.1), oracle::bilateral(plane, 1.0, 0.1)),
            1e-6);
}

TEST(BilateralBrute, ConstantsAreExactFixedPoints) {
  const Image flat(13, 9, 1, 0.61f);
  EXPECT_EQ(bilateral_brute(flat, 2.0, 0.1, Exec::serial), flat);
  EXPECT_EQ(bilateral_brute(flat, 2.0, 0.1, Exec::parallel), flat);
}

TEST(BilateralBrute, OutputWithinInputRange) {
  std::mt19937_64 rng(oracle::kSeed + 1);
  const Image plane = oracle::random_image(rng, 20, 20, 1, 0.2f, 0.7f);
  const Image out = bilateral_brute(plane, 1.5, 0.2);
  for (float v : out.data()) {
    EXPECT_GE(v, 0.2f - 1e-6f);
    EXPECT_LE(v, 0.7f + 1e-6f);
  }
}

TEST(BilateralBrute, RejectsNonPositiveSigmas) {
  const Image p(4, 4, 1);
  try {
    bilateral_brute(p, 0.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
  }
  EXPECT_THROW(bilateral_brute(p, 1.0, -0.1), Error);
}

// Grid oracle: splat, blur with zero padding, then fit, written directly from
// the definition.
struct CellFit {
  double a, b, w;
};

std::vector<CellFit> grid_oracle(const Image& v, const Image& g, GridDims dims) {
  const int gd = dims.depth, gh = dims.rows, gw = dims.cols;
  const int w = v.width(), h = v.height();
  std::vector<std::array<double, 5>> m(static_cast<std::size_t>(gd) * gh * gw, {0, 0, 0, 0, 0});
  auto id = [&](int d, int r, int c) { return (static_cast<std::size_t>(d) * gh + r) * gw + c; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gv = g.at(x, y), vv = v.at(x, y);
      const int d = std::min(gd - 1, static_cast<int>(gv * gd));
      const int r = std::min(gh - 1, y * gh / h);
      const int c = std::min(gw - 1, x * gw / w);
      auto& cell = m[id(d, r, c)];
      cell[0] += 1;
      cell[1] += gv;
      cell[2] += gv * gv;
      cell[3] += vv;
      cell[4] += gv * vv;
    }
  for (int axis = 0; axis < 3; ++axis) {
    auto out = m;
    for (int d = 0; d < gd; ++d)
      for (int r = 0; r < gh; ++r)
        for (int c = 0; c < gw; ++c) {
          for (int k = 0; k < 5; ++k) {
            double s = 2 * m[id(d, r, c)][k];
            for (int off : {-1, 1}) {
              int dd = d, rr = r, cc = c;
              (axis == 0 ? dd : axis == 1 ? rr : cc) += off;
              if (dd < 0 || rr < 0 || cc < 0 || dd >= gd || rr >= gh || cc >= gw) continue;
              s += m[id(dd, rr, cc)][k];
            }
            out[id(d, r, c)][k] = s / 4;
          }
        }
    m = out;
  }
  std::vector<CellFit> fits;
  for (const auto& cell : m) {
    if (cell[0] <= 0) {
      fits.push_back({1, 0, 0});
      continue;
    }
    const double mg = cell[1] / cell[0], mv = cell[3] / cell[0];
    const double var = cell[2] / cell[0] - mg * mg;
    const double cov = cell[4] / cell[0] - mg * mv;
    const double a = cov / (var + 1e-3);
    fits.push_back({a, mv - a * mg, cell[0]});
  }
  return fits;
}

TEST(GridBuild, MatchesDirectFitOracle) {
  std::mt19937_64 rng(oracle::kSeed + 2);
  for (GridDims dims : {GridDims{}, GridDims{4, 6, 5}}) {
    const Image g = oracle::random_image(rng, 37, 29, 1);
    const Image v = oracle::add_uniform_noise(g, rng, 0.05);
    const BilateralGrid grid = grid_build(v, g, dims);
    const auto want = grid_oracle(v, g, dims);
    ASSERT_EQ(grid.cell_count(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      EXPECT_NEAR(grid.a(k), want[k].a, 1e-9);
      EXPECT_NEAR(grid.b(k), want[k].b, 1e-9);
      EXPECT_NEAR(grid.weight(k), want[k].w, 1e-9);
    }
  }
}

TEST(GridBuild, SplatWeightEqualsPixelCount) {
  std::mt19937_64 rng(oracle::kSeed + 3);
  const Image g = oracle::random_image(rng, 50, 31, 1);
  const BilateralGrid grid = grid_build(g, g);
  double total = 0.0;
  for (const GridMoments& m : grid.raw_moments()) total += m.weight;
  EXPECT_EQ(total, 50.0 * 31.0);
}

TEST(GridBuild, ConstantSelfGuidedFitsTheConstant) {
  const Image c(24, 24, 1, 0.35f);
  const BilateralGrid grid = grid_build(c, c);
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    if (grid.weight(k) == 0.0) {
      EXPECT_EQ(grid.a(k), 1.0);
      EXPECT_EQ(grid.b(k), 0.0);
    } else {
      EXPECT_NEAR(grid.a(k) * 0.35 + grid.b(k), 0.35, 1e-6);
    }
  }
}

TEST(GridBuild, RampFitIsTheRidgeShrinkOfTheCellVariance) {
  const Image ramp = channel(oracle::ramp_rgb(64, 64), 0);
  const BilateralGrid grid = grid_build(ramp, ramp);
  const auto want = grid_oracle(ramp, ramp, {});
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    if (grid.weight(k) == 0.0) continue;
    EXPECT_GT(grid.a(k), 0.0);
    EXPECT_LT(grid.a(k), 1.0);
    EXPECT_NEAR(grid.a(k), want[k].a, 1e-9);
  }
}

TEST(GridBuild, GuideOutsideUnitRangeIsRangeError) {
  Image g(4, 4, 1, 0.5f);
  g.at(1, 1) = 1.5f;
  try {
    grid_build(g, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
  }
  EXPECT_THROW(grid_build(Image(4, 4, 1), Image(4, 5, 1)), Error);
}

TEST(GridSlice, NeutralGridGivesNeutralMaps) {
  BilateralGrid grid({}, 0);
  for (std::size_t k = 0; k < grid.cell_count(); ++k) grid.set_cell(k, 1.0, 0.0, 0.0);
  std::mt19937_64 rng(oracle::kSeed + 4);
  const Image guide = oracle::random_image(rng, 19, 23, 1);
  const CoefficientMaps m = grid_slice(grid, guide);
  for (float v : m.a.data()) EXPECT_EQ(v, 1.0f);
  for (float v : m.b.data()) EXPECT_EQ(v, 0.0f);
}

TEST(GridSlice, CellCentreReturnsThatCell) {
  BilateralGrid grid({}, 0);
  std::mt19937_64 rng(oracle::kSeed + 5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t k = 0; k < grid.cell_count(); ++k) grid.set_cell(k, u(rng), u(rng), 1.0);
  // 16 x 16 image: cell centre (r, c) sits on pixel (2c + 1, 2r + 1).
  for (int d = 0; d < 8; ++d) {
    Image guide(16, 16, 1, static_cast<float>((d + 0.5) / 8.0));
    const CoefficientMaps m = grid_slice(grid, guide);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const std::size_t k = grid.cell(d, r, c);
        EXPECT_NEAR(m.a.at(2 * c + 1, 2 * r + 1), grid.a(k), 1e-6);
        EXPECT_NEAR(m.b.at(2 * c + 1, 2 * r + 1), grid.b(k), 1e-6);
      }
  }
}

TEST(GridSlice, ValuesStayInsideEnclosingCells) {
  BilateralGrid grid({4, 4, 4}, 0);
  std::mt19937_64 rng(oracle::kSeed + 6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t k = 0; k < grid.cell_count(); ++k) grid.set_cell(k, u(rng), u(rng), 1.0);
  const Image guide = oracle::random_image(rng, 21, 17, 1);
  const CoefficientMaps m = grid_slice(grid, guide);
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 21; ++x) {
      auto lohi = [](double v) { return std::pair{static_cast<int>(std::floor(v)), static_cast<int>(std::floor(v)) + 1}; };
      const auto [d0, d1] = lohi(guide.at(x, y) * 4 - 0.5);
      const auto [r0, r1] = lohi(y * 4.0 / 17 - 0.5);
      const auto [c0, c1] = lohi(x * 4.0 / 21 - 0.5);
      double lo = 1e9, hi = -1e9;
      for (int d : {d0, d1})
        for (int r : {r0, r1})
          for (int c : {c0, c1}) {
            const double a = grid.a(grid.cell(std::clamp(d, 0, 3), std::clamp(r, 0, 3),
                                              std::clamp(c, 0, 3)));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
          }
      EXPECT_GE(m.a.at(x, y), lo - 1e-6);
      EXPECT_LE(m.a.at(x, y), hi + 1e-6);
    }
}

TEST(CdmDenoise, ConstantColourUnchanged) {
  const Image c(32, 24, 3, 0.45f);
  EXPECT_LE(oracle::max_abs_diff(cdm_denoise(c), c), 1e-6);
}

TEST(CdmDenoise, ChannelsAreIndependent) {
  std::mt19937_64 rng(oracle::kSeed + 7);
  const Image base = oracle::random_image(rng, 40, 30, 3);
  Image red = base;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) red.at(x, y, 0) = 1.0f - red.at(x, y, 0);
  const Image a = cdm_denoise(base), b = cdm_denoise(red);
  EXPECT_EQ(channel(a, 1), channel(b, 1));
  EXPECT_EQ(channel(a, 2), channel(b, 2));
  EXPECT_NE(channel(a, 0), channel(b, 0));
}

TEST(CdmDenoise, ReducesNoiseOnRamp) {
  std::mt19937_64 rng(oracle::kSeed + 8);
  const Image clean = oracle::ramp_rgb(96, 96);
  for (int t = 0; t < 3; ++t) {
    const Image noisy = clamp01(oracle::add_gaussian_noise(clean, rng, 0.05));
    EXPECT_LT(oracle::mean_sq_diff(cdm_denoise(noisy), clean), oracle::mean_sq_diff(noisy, clean));
  }
}

TEST(CdmDenoise, RampInteriorWithinTolerance) {
  const Image ramp = oracle::ramp_rgb(128, 128);
  const Image out = cdm_denoise(ramp);
  for (int y = 16; y < 112; ++y)
    for (int x = 16; x < 112; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.at(x, y, c), ramp.at(x, y, c), 1e-2);
}

TEST(CdmDenoise, SerialAndParallelAgree) {
  std::mt19937_64 rng(oracle::kSeed + 9);
  const Image img = oracle::random_image(rng, 83, 61, 3);
  EXPECT_LE(oracle::max_abs_diff(cdm_denoise(img, {}, Exec::serial),
                                 cdm_denoise(img, {}, Exec::parallel)),
            1e-6);
}

TEST(CdmDenoise, RequiresThreeChannels) {
  try {
    cdm_denoise(Image(8, 8, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(BilateralDenoise, FiltersEachChannel) {
  std::mt19937_64 rng(oracle::kSeed + 10);
  const Image img = oracle::random_image(rng, 12, 10, 3);
  const Image out = bilateral_denoise(img, 1.0, 0.2);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LE(oracle::max_abs_diff(channel(out, c), oracle::bilateral(channel(img, c), 1.0, 0.2)),
              1e-6);
  }
}

}  // namespace
}  // namespace lowlight
