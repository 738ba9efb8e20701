#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lowlight/color.hpp"
#include "lowlight/error.hpp"
#include "support/oracles.hpp"

namespace lowlight {
namespace {

double residual(const Image& src, const Image& ref, const ColorMatrix& m) {
  return oracle::mean_sq_diff(oracle::apply_matrix(src, m), ref);
}

ColorMatrix random_matrix(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  ColorMatrix m = ColorMatrix::identity();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kBinomialTerms; ++k) m(r, k) += u(rng);
  return m;
}

TEST(Binomial, Examples) {
  const auto zero = binomial_expand(0, 0, 0);
  EXPECT_EQ(zero[0], 1.0);
  for (int k = 1; k < 10; ++k) EXPECT_EQ(zero[k], 0.0);
  for (double v : binomial_expand(1, 1, 1)) EXPECT_EQ(v, 1.0);
  const auto f = binomial_expand(0.5, 0.2, 0.1);
  const double want[] = {1, .5, .2, .1, .25, .10, .05, .04, .02, .01};
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(f[k], want[k], 1e-15);
}

TEST(Binomial, MatchesMonomialOracle) {
  std::mt19937_64 rng(oracle::kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double r = u(rng), g = u(rng), b = u(rng);
    const auto got = binomial_expand(r, g, b);
    const auto want = oracle::features(r, g, b);
    for (int k = 0; k < 10; ++k) EXPECT_EQ(got[k], want[k]);
  }
  EXPECT_STREQ(binomial_feature_name(0), "1");
  EXPECT_STREQ(binomial_feature_name(5), "rg");
}

TEST(ApplyColorMatrix, IdentityAndZero) {
  std::mt19937_64 rng(oracle::kSeed + 1);
  const Image img = oracle::random_image(rng, 9, 7, 3);
  EXPECT_EQ(apply_color_matrix(img, ColorMatrix::identity()), img);
  const Image zero = apply_color_matrix(img, ColorMatrix{});
  for (float v : zero.data()) EXPECT_EQ(v, 0.0f);
}

TEST(FitColorMatrix, SelfFitRecoversIdentity) {
  std::mt19937_64 rng(oracle::kSeed + 2);
  const Image src = oracle::random_image(rng, 32, 32, 3);
  const ColorMatrix m = fit_color_matrix(src, src, 1e-6);
  const ColorMatrix id = ColorMatrix::identity();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kBinomialTerms; ++k) EXPECT_NEAR(m(r, k), id(r, k), 1e-6);
}

TEST(FitColorMatrix, RecoversSyntheticMatrix) {
  std::mt19937_64 rng(oracle::kSeed + 3);
  const Image src = oracle::random_image(rng, 40, 30, 3);
  const ColorMatrix m0 = random_matrix(rng, 0.3);
  const Image ref = oracle::apply_matrix(src, m0);
  const ColorMatrix m = fit_color_matrix(src, ref);
  double scale = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kBinomialTerms; ++k) scale = std::max(scale, std::abs(m0(r, k)));
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kBinomialTerms; ++k) EXPECT_NEAR(m(r, k), m0(r, k), 1e-4 * scale);
}

TEST(FitColorMatrix, NoPerturbationImprovesTheFit) {
  std::mt19937_64 rng(oracle::kSeed + 4);
  const Image src = oracle::random_image(rng, 6, 6, 3);
  const Image ref = oracle::random_image(rng, 6, 6, 3);
  const ColorMatrix m = fit_color_matrix(src, ref, 0.0);
  const double best = residual(src, ref, m);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kBinomialTerms; ++k)
      for (double step : {-1e-3, 1e-3}) {
        ColorMatrix p = m;
        p(r, k) += step;
        EXPECT_GE(residual(src, ref, p), best);
      }
}

TEST(FitColorMatrix, BeatsAffineOnQuadraticLaw) {
  std::mt19937_64 rng(oracle::kSeed + 5);
  const Image src = oracle::random_image(rng, 48, 48, 3);
  Image ref = src;
  for (std::size_t p = 0; p < ref.pixel_count(); ++p) ref.data()[3 * p] *= ref.data()[3 * p];
  const double binomial = oracle::psnr_db(apply_color_matrix(src, fit_color_matrix(src, ref)), ref);
  const double affine = oracle::psnr_db(oracle::affine_fit_apply(src, ref), ref);
  EXPECT_GE(binomial - affine, 20.0);
}

TEST(FitColorMatrix, ConstantSourceIsRankDeficientWithoutRidge) {
  const Image src(8, 8, 3, 0.5f);
  try {
    fit_color_matrix(src, src, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rank_deficient);
    EXPECT_NE(std::string(e.what()).find("feature"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(fit_color_matrix(src, src, 1e-6));
}

TEST(FitColorMatrix, ShapeAndRidgeChecks) {
  EXPECT_THROW(fit_color_matrix(Image(4, 4, 3), Image(4, 5, 3)), Error);
  EXPECT_THROW(fit_color_matrix(Image(4, 4, 3), Image(4, 4, 3), -1.0), Error);
}

TEST(BlockMaxPool, BroadcastsBlockMaxima) {
  Image img(3, 2, 1, std::vector<float>{0.1f, 0.5f, 0.2f, 0.4f, 0.3f, 0.9f});
  const Image p = block_max_pool(img, 2);
  EXPECT_EQ(p.at(0, 0), 0.5f);
  EXPECT_EQ(p.at(1, 1), 0.5f);
  EXPECT_EQ(p.at(2, 0), 0.9f);
  EXPECT_EQ(p.at(2, 1), 0.9f);
  try {
    block_max_pool(img, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size);
  }
}

TEST(PcmCorrect, PoolOneCollapsesToApply) {
  std::mt19937_64 rng(oracle::kSeed + 6);
  const Image img = oracle::random_image(rng, 20, 16, 3);
  const ColorMatrix m = random_matrix(rng, 0.1);
  EXPECT_EQ(pcm_correct(img, m, m, 1), apply_color_matrix(img, m));
}

TEST(PcmCorrect, ConstantImageUsesCoarseMatrix) {
  std::mt19937_64 rng(oracle::kSeed + 7);
  const Image img(12, 12, 3, 0.4f);
  const ColorMatrix coarse = random_matrix(rng, 0.1), fine = random_matrix(rng, 0.1);
  EXPECT_LE(oracle::max_abs_diff(pcm_correct(img, coarse, fine, 4), apply_color_matrix(img, coarse)),
            1e-6);
}

TEST(PcmCorrect, IdentityMatricesAreIdentityForAnyPool) {
  std::mt19937_64 rng(oracle::kSeed + 8);
  const Image img = oracle::random_image(rng, 23, 17, 3);
  for (int pool : {1, 2, 3, 4, 8}) {
    EXPECT_LE(oracle::max_abs_diff(
                  pcm_correct(img, ColorMatrix::identity(), ColorMatrix::identity(), pool), img),
              1e-6);
  }
}

TEST(PcmCorrect, PoolLargerThanImage) {
  EXPECT_THROW(pcm_correct(Image(3, 3, 3), ColorMatrix::identity(), ColorMatrix::identity(), 4),
               Error);
}

TEST(ColorMatrixText, RoundTripsExactly) {
  std::mt19937_64 rng(oracle::kSeed + 9);
  const ColorMatrix m = random_matrix(rng, 1.0);
  std::istringstream in(format_color_matrix(m));
  EXPECT_EQ(parse_color_matrix(in), m);
}

TEST(ColorMatrixText, RejectsMalformedInput) {
  std::istringstream short_row("1 0 0 0 0 0 0 0 0\n0 0 1 0 0 0 0 0 0 0\n0 0 0 1 0 0 0 0 0 0\n");
  try {
    parse_color_matrix(short_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::decode);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
  std::istringstream junk("0 1 0 0 0 0 0 0 0 x\n");
  EXPECT_THROW(parse_color_matrix(junk), Error);
  std::istringstream two_rows("0 1 0 0 0 0 0 0 0 0\n0 0 1 0 0 0 0 0 0 0\n");
  EXPECT_THROW(parse_color_matrix(two_rows), Error);
}

}  // namespace
}  // namespace lowlight
