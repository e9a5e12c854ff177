#include <gtest/gtest.h>

#include "mfsr/gradient.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mfsr;
using Eigen::MatrixXd;
using namespace mfsr::oracle;

TEST(DiscreteGradient, ConstantIsZero) {
  const GradientField g = discrete_gradient(Image(6, 5, 42.0));
  for (double v : g.horiz) EXPECT_EQ(v, 0.0);
  for (double v : g.vert) EXPECT_EQ(v, 0.0);
}

TEST(DiscreteGradient, HorizontalRamp) {
  Image img(8, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y) = x;
  const GradientField g = discrete_gradient(img);
  for (int y = 0; y < 6; ++y)
    for (int x = 1; x < 7; ++x) {
      EXPECT_EQ(g.horiz[img.index(x, y)], 1.0);
      EXPECT_EQ(g.vert[img.index(x, y)], 0.0);
    }
  EXPECT_EQ(g.horiz[img.index(0, 0)], 0.5);
}

TEST(DiscreteGradient, DenseStencilOracle) {
  Rng rng(21);
  const Image z = mfsr::testing::random_image(8, 8, rng);
  const Eigen::VectorXd ref = gradient_matrix(8, 8) * mfsr::testing::to_vector(z);
  const Eigen::VectorXd got = stack_field(discrete_gradient(z));
  EXPECT_EQ((ref - got).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GradientAdjoint, TransposedStencilOracle) {
  Rng rng(22);
  const GradientField g = mfsr::testing::random_field(6, 6, rng);
  const Eigen::VectorXd ref = gradient_matrix(6, 6).transpose() * stack_field(g);
  const Image got = gradient_adjoint(g);
  for (std::size_t i = 0; i < got.size(); ++i)
    EXPECT_NEAR(got[i], ref(static_cast<Eigen::Index>(i)), 1e-12);
}

TEST(GradientAdjoint, ZeroFieldGivesZero) {
  const Image z = gradient_adjoint(GradientField(5, 4));
  for (double v : z.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(GradientAdjoint, DotProductIdentity) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const int w = 1 + static_cast<int>(rng.uniform() * 20), h = 1 + static_cast<int>(rng.uniform() * 20);
    const Image z = mfsr::testing::random_image(w, h, rng, -1, 1);
    const GradientField g = mfsr::testing::random_field(w, h, rng, 1.0);
    const double lhs = dot(discrete_gradient(z), g), rhs = dot(z, gradient_adjoint(g));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs))) << w << "x" << h;
  }
}

TEST(Magnitude, Hypot) {
  GradientField g(2, 1);
  g.horiz = {3, 0};
  g.vert = {4, -2};
  EXPECT_EQ(magnitude(g), (std::vector<double>{5, 2}));
}
