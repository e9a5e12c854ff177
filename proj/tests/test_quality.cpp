#include <gtest/gtest.h>

#include <cmath>

#include "mfsr/quality.hpp"
#include "support.hpp"

using namespace mfsr;

namespace {

// Straight-line SSIM: every window handled from scratch with its own
// Gaussian weights.
double reference_ssim(const Image& a, const Image& b) {
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double w[11][11], wsum = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) wsum += w[y][x] = std::exp(-((x - 5) * (x - 5) + (y - 5) * (y - 5)) / 4.5);
  double total = 0;
  int count = 0;
  for (int y0 = 0; y0 + 11 <= a.height(); ++y0)
    for (int x0 = 0; x0 + 11 <= a.width(); ++x0) {
      double ma = 0, mb = 0;
      for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
          ma += w[y][x] / wsum * a.at(x0 + x, y0 + y);
          mb += w[y][x] / wsum * b.at(x0 + x, y0 + y);
        }
      double va = 0, vb = 0, cov = 0;
      for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
          const double da = a.at(x0 + x, y0 + y) - ma, db = b.at(x0 + x, y0 + y) - mb;
          va += w[y][x] / wsum * da * da;
          vb += w[y][x] / wsum * db * db;
          cov += w[y][x] / wsum * da * db;
        }
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

}  // namespace

TEST(Psnr, IdenticalIsInfinity) {
  Image a(4, 4, 10.0);
  EXPECT_EQ(psnr(a, a), kPsnrIdentical);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, ClosedForms) {
  EXPECT_DOUBLE_EQ(psnr(Image(8, 8, 0.0), Image(8, 8, 255.0)), 0.0);
  EXPECT_NEAR(psnr(Image(8, 8, 0.0), Image(8, 8, 16.0)), 10.0 * std::log10(255.0 * 255.0 / 256.0), 1e-12);
  EXPECT_NEAR(psnr(Image(8, 8, 0.0), Image(8, 8, 16.0)), 24.048, 5e-4);
}

TEST(Psnr, SymmetricAndShiftInvariant) {
  Rng rng(3);
  const Image a = mfsr::testing::random_image(12, 9, rng);
  const Image b = mfsr::testing::random_image(12, 9, rng);
  EXPECT_DOUBLE_EQ(psnr(a, b), psnr(b, a));
  const Image c(12, 9, 37.0);
  EXPECT_NEAR(psnr(a + c, b + c), psnr(a, b), 1e-9);
}

TEST(Psnr, DimensionMismatchThrows) {
  EXPECT_THROW(psnr(Image(2, 2), Image(2, 3)), std::invalid_argument);
}

TEST(Ssim, IdentityAndSymmetry) {
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const Image a = mfsr::testing::random_image(16, 14, rng);
    const Image b = mfsr::testing::random_image(16, 14, rng);
    EXPECT_EQ(ssim(a, a), 1.0);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
    EXPECT_GE(ssim(a, b), -1.0);
    EXPECT_LE(ssim(a, b), 1.0);
  }
}

TEST(Ssim, ConstantsAgainstReference) {
  const Image a(32, 32, 64.0), b(32, 32, 65.0);
  EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-12);
  const double c1 = std::pow(0.01 * 255, 2);
  EXPECT_NEAR(ssim(a, b), (2 * 64.0 * 65.0 + c1) / (64.0 * 64 + 65.0 * 65 + c1), 1e-12);
}

TEST(Ssim, RandomAgainstReference) {
  Rng rng(8);
  const Image a = mfsr::testing::random_image(20, 13, rng);
  const Image b = axpy(a, 0.3, mfsr::testing::random_image(20, 13, rng));
  EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-10);
}

TEST(Ssim, TooSmallThrows) {
  EXPECT_THROW(ssim(Image(10, 20), Image(10, 20)), std::invalid_argument);
}
