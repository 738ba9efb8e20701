#include <gtest/gtest.h>

#include <omp.h>

#include <cstdlib>
#include <random>

#include "lowlight/bilateral.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/parallel.hpp"
#include "lowlight/pyramid.hpp"
#include "lowlight/retinex.hpp"
#include "support/oracles.hpp"

namespace lowlight {
namespace {

class EnvGuard {
 public:
  explicit EnvGuard(const char* value) {
    if (const char* old = std::getenv("THREADS")) saved_ = old;
    if (value) {
      setenv("THREADS", value, 1);
    } else {
      unsetenv("THREADS");
    }
  }
  ~EnvGuard() {
    if (saved_) {
      setenv("THREADS", saved_->c_str(), 1);
    } else {
      unsetenv("THREADS");
    }
  }

 private:
  std::optional<std::string> saved_;
};

TEST(Threads, ParsesPositiveIntegersOnly) {
  {
    EnvGuard g("3");
    EXPECT_EQ(threads_from_env(), 3);
  }
  for (const char* bad : {"", "0", "-2", "4x", "abc"}) {
    EnvGuard g(bad);
    EXPECT_FALSE(threads_from_env().has_value()) << bad;
  }
  EnvGuard g(nullptr);
  EXPECT_FALSE(threads_from_env().has_value());
}

TEST(Threads, ConfigureAppliesCap) {
  const int saved = omp_get_max_threads();
  {
    EnvGuard g("2");
    EXPECT_EQ(configure_threads_from_env(), 2);
    EXPECT_EQ(max_threads(), 2);
  }
  omp_set_num_threads(saved);
}

// Each kernel must give the same bytes whatever the worker count.
class WorkerCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { saved_ = omp_get_max_threads(); }
  void TearDown() override { omp_set_num_threads(saved_); }
  int saved_ = 1;
};

TEST_P(WorkerCount, KernelsIndependentOfWorkers) {
  std::mt19937_64 rng(oracle::kSeed);
  const Image rgb = oracle::random_image(rng, 97, 73, 3);
  const Image plane = channel(rgb, 1);
  const Image other = oracle::random_image(rng, 97, 73, 3);

  omp_set_num_threads(1);
  const Image bil1 = bilateral_brute(plane, 1.5, 0.1);
  const double ssim1 = ssim(rgb, other);
  const Image refine1 = refine_illumination(plane);
  const Image grid1 = cdm_denoise(rgb);
  const Image pyr1 = reconstruct(build_laplacian(rgb));
  const Image rpm1 = rpm_restore(rgb, plane);

  omp_set_num_threads(GetParam());
  EXPECT_EQ(bilateral_brute(plane, 1.5, 0.1), bil1);
  EXPECT_EQ(ssim(rgb, other), ssim1);
  EXPECT_EQ(refine_illumination(plane), refine1);
  EXPECT_EQ(cdm_denoise(rgb), grid1);
  EXPECT_EQ(reconstruct(build_laplacian(rgb)), pyr1);
  EXPECT_EQ(rpm_restore(rgb, plane), rpm1);
}

INSTANTIATE_TEST_SUITE_P(Threads, WorkerCount, ::testing::Values(2, 3, 8));

TEST(SerialReference, AgreesWithParallelKernels) {
  std::mt19937_64 rng(oracle::kSeed + 1);
  const Image rgb = oracle::random_image(rng, 64, 48, 3);
  const Image other = oracle::random_image(rng, 64, 48, 3);
  const Image plane = channel(rgb, 0);
  EXPECT_NEAR(ssim(rgb, other, {}, Exec::serial), ssim(rgb, other, {}, Exec::parallel), 1e-12);
  EXPECT_LE(oracle::max_abs_diff(bilateral_brute(plane, 2.0, 0.2, Exec::serial),
                                 bilateral_brute(plane, 2.0, 0.2, Exec::parallel)),
            1e-6);
  EXPECT_LE(oracle::max_abs_diff(pyr_down(rgb, Exec::serial), pyr_down(rgb, Exec::parallel)), 1e-7);
  EXPECT_LE(oracle::max_abs_diff(pyr_up(plane, 127, 95, Exec::serial),
                                 pyr_up(plane, 127, 95, Exec::parallel)),
            1e-7);
  const BilateralGrid gs = grid_build(plane, plane, {}, 0, Exec::serial);
  const BilateralGrid gp = grid_build(plane, plane, {}, 0, Exec::parallel);
  for (std::size_t k = 0; k < gs.cell_count(); ++k) {
    EXPECT_NEAR(gs.a(k), gp.a(k), 1e-9);
    EXPECT_NEAR(gs.b(k), gp.b(k), 1e-9);
  }
  const CoefficientMaps ms = grid_slice(gs, plane, Exec::serial);
  const CoefficientMaps mp = grid_slice(gs, plane, Exec::parallel);
  EXPECT_EQ(ms.a, mp.a);
  EXPECT_EQ(ms.b, mp.b);
}

}  // namespace
}  // namespace lowlight
