#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mfsr/nltv.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mfsr;
using Eigen::MatrixXd;
using namespace mfsr::oracle;

namespace {

NonLocalField random_nl_field(const NonLocalGraph& g, Rng& rng) {
  NonLocalField f{std::vector<double>(g.edge_count())};
  for (double& v : f.values) v = rng.uniform(-1, 1);
  return f;
}

}  // namespace

TEST(BuildGraph, ConstantImageHasUnitWeights) {
  const NonLocalGraph g = build_graph(Image(12, 12, 50.0), 2, 3, 6, 1.0);
  EXPECT_EQ(g.edge_count(), 144u * 6u);
  for (const auto& e : g.edges()) EXPECT_EQ(e.weight, 1.0);
}

TEST(BuildGraph, IdenticalPatchGetsUnitWeight) {
  // Period-4 texture: pixels four apart have identical patches away from the border.
  Image img(16, 16);
  Rng rng(41);
  const Image tile = mfsr::testing::random_image(4, 4, rng);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = tile.at(x % 4, y % 4);
  // Eight exact copies of the (7,7) patch lie inside a radius-4 window.
  const NonLocalGraph g = build_graph(img, 1, 4, 8, 0.01);
  std::set<std::uint32_t> got;
  for (const auto& nb : g.neighbors(img.index(7, 7))) {
    EXPECT_EQ(nb.weight, 1.0);
    got.insert(nb.index);
  }
  std::set<std::uint32_t> want;
  for (int y : {3, 7, 11})
    for (int x : {3, 7, 11})
      if (x != 7 || y != 7) want.insert(static_cast<std::uint32_t>(img.index(x, y)));
  EXPECT_EQ(got, want);
}

TEST(BuildGraph, BruteForceNeighbourSets) {
  Rng rng(42);
  const Image img = mfsr::testing::random_image(10, 10, rng);
  const double eta = 30.0;
  const NonLocalGraph g = build_graph(img, 1, 3, 5, eta);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const auto cand = ranked_candidates(img, x, y, 1, 3);
      const auto nbs = g.neighbors(img.index(x, y));
      ASSERT_EQ(nbs.size(), 5u);
      for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(nbs[k].index, cand[k].second) << x << "," << y << " #" << k;
        EXPECT_NEAR(nbs[k].weight, std::exp(-cand[k].first / (2 * eta * eta)), 1e-12);
      }
    }
}

TEST(BuildGraph, InvariantsAndDeterminism) {
  Rng rng(43);
  const Image img = mfsr::testing::random_image(14, 11, rng);
  const NonLocalGraph g = build_graph(img, 2, 4, 8, 20.0);
  EXPECT_EQ(g, build_graph(img, 2, 4, 8, 20.0));
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    EXPECT_LE(g.neighbors(i).size(), 8u);
    std::set<std::uint32_t> seen;
    for (const auto& nb : g.neighbors(i)) {
      EXPECT_NE(nb.index, i);
      EXPECT_GT(nb.weight, 0.0);
      EXPECT_LE(nb.weight, 1.0);
      EXPECT_LE(std::abs(int(nb.index % 14) - int(i % 14)), 4);
      EXPECT_LE(std::abs(int(nb.index / 14) - int(i / 14)), 4);
      EXPECT_TRUE(seen.insert(nb.index).second);
    }
  }
}

TEST(BuildGraph, Validation) {
  EXPECT_THROW(build_graph(Image(4, 4), 1, 2, 3, 0.0), std::invalid_argument);
  EXPECT_THROW(build_graph(Image(4, 4), 0, 2, 3, 1.0), std::invalid_argument);
  EXPECT_THROW(build_graph(Image(4, 4), 1, 0, 3, 1.0), std::invalid_argument);
}

TEST(PatchWeights, NormalizedGaussian) {
  const auto w = patch_weights(3);
  ASSERT_EQ(w.size(), 49u);
  double sum = 0;
  for (double v : w) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  EXPECT_NEAR(w[24] / w[25], std::exp(1.0 / (2 * 1.5 * 1.5)), 1e-12);
}

TEST(NlGradient, ConstantSpikeAndLinearity) {
  const NonLocalGraph g = build_graph(Image(6, 6, 1.0), 1, 2, 4, 1.0);
  for (double v : nl_gradient(g, Image(6, 6, 9.0)).values) EXPECT_EQ(v, 0.0);

  Image spike(6, 6, 3.0);
  const std::size_t p = spike.index(2, 3);
  spike[p] += 1.0;
  const NonLocalField f = nl_gradient(g, spike);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    std::size_t e = g.offset(i);
    for (const auto& nb : g.neighbors(i)) {
      const double expect = (nb.index == p ? 1.0 : 0.0) - (i == p ? 1.0 : 0.0);
      EXPECT_EQ(f.values[e++], expect);
    }
  }

  Rng rng(44);
  const Image z = mfsr::testing::random_image(6, 6, rng);
  const NonLocalGraph gr = build_graph(z, 1, 2, 4, 40.0);
  const auto f1 = nl_gradient(gr, z).values, f2 = nl_gradient(gr, 2.0 * z).values;
  for (std::size_t k = 0; k < f1.size(); ++k) EXPECT_EQ(f2[k], 2.0 * f1[k]);
  EXPECT_THROW(nl_gradient(gr, Image(5, 6)), std::invalid_argument);
}

TEST(NlDivergence, DenseTransposeOracle) {
  Rng rng(45);
  const Image z = mfsr::testing::random_image(6, 6, rng);
  const NonLocalGraph g = build_graph(z, 1, 2, 5, 50.0);
  const MatrixXd k = nl_gradient_matrix(g);
  const NonLocalField f = random_nl_field(g, rng);
  const Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
  const Eigen::VectorXd ref = -(k.transpose() * fv);
  const Image div = nl_divergence(g, f);
  for (std::size_t i = 0; i < div.size(); ++i) EXPECT_NEAR(div[i], ref(static_cast<Eigen::Index>(i)), 1e-12);

  const Eigen::VectorXd grad = k * mfsr::testing::to_vector(z);
  const auto ng = nl_gradient(g, z).values;
  for (std::size_t e = 0; e < ng.size(); ++e) EXPECT_NEAR(ng[e], grad(static_cast<Eigen::Index>(e)), 1e-12);
}

TEST(NlDivergence, ZeroFieldAndMisalignment) {
  const NonLocalGraph g = build_graph(Image(5, 5, 1.0), 1, 1, 3, 1.0);
  const Image div = nl_divergence(g, NonLocalField{std::vector<double>(g.edge_count())});
  for (double v : div.pixels()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(nl_divergence(g, NonLocalField{std::vector<double>(3)}), std::invalid_argument);
}

TEST(NlDivergence, AdjointIdentityRandom) {
  Rng rng(46);
  for (int t = 0; t < 100; ++t) {
    const int w = 2 + static_cast<int>(rng.uniform() * 15), h = 2 + static_cast<int>(rng.uniform() * 15);
    const int m = 1 + static_cast<int>(rng.uniform() * 8);
    const Image img = mfsr::testing::random_image(w, h, rng);
    const NonLocalGraph g = build_graph(img, 1 + t % 2, 2 + t % 3, m, 10.0 + rng.uniform() * 40);
    const Image z = mfsr::testing::random_image(w, h, rng, -1, 1);
    const NonLocalField f = random_nl_field(g, rng);
    const double lhs = dot(nl_gradient(g, z).values, f.values);
    const double rhs = -dot(z, nl_divergence(g, f));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs))) << "case " << t;
  }
}

TEST(NltvValue, ConstantsShiftAndDirectSum) {
  Rng rng(47);
  const Image z = mfsr::testing::random_image(10, 10, rng);
  const NonLocalGraph g = build_graph(z, 1, 3, 6, 25.0);
  EXPECT_EQ(nltv_value(g, Image(10, 10, 4.0)), 0.0);
  EXPECT_NEAR(nltv_value(g, z + Image(10, 10, 17.0)), nltv_value(g, z), 1e-9);

  double direct = 0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i)
    for (const auto& nb : g.neighbors(i)) direct += std::sqrt(nb.weight) * std::abs(z[nb.index] - z[i]);
  EXPECT_NEAR(nltv_value(g, z), direct, 1e-9);
  double from_field = 0;
  for (double v : nl_gradient(g, z).values) from_field += std::abs(v);
  EXPECT_NEAR(nltv_value(g, z), from_field, 1e-9);
}

TEST(NltvValue, MidpointConvexity) {
  Rng rng(48);
  const NonLocalGraph g = build_graph(mfsr::testing::random_image(12, 12, rng), 1, 3, 6, 25.0);
  for (int t = 0; t < 50; ++t) {
    const Image a = mfsr::testing::random_image(12, 12, rng), b = mfsr::testing::random_image(12, 12, rng);
    EXPECT_LE(nltv_value(g, 0.5 * (a + b)), 0.5 * (nltv_value(g, a) + nltv_value(g, b)) + 1e-9);
  }
}
