#include <gtest/gtest.h>

#include <cmath>

#include "mfsr/gradient.hpp"
#include "mfsr/quality.hpp"
#include "mfsr/resample.hpp"
#include "mfsr/solver.hpp"
#include "mfsr/testcards.hpp"
#include "support.hpp"

using namespace mfsr;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using mfsr::testing::dense_matrix;
using mfsr::testing::random_image;
using mfsr::testing::to_vector;

namespace {

// Gradient stacked as a w x 2h image: horizontal rows first, then vertical.
Image stacked_gradient(const Image& z) {
  const GradientField g = discrete_gradient(z);
  Image out(z.width(), 2 * z.height());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = g.horiz[i];
    out[g.size() + i] = g.vert[i];
  }
  return out;
}

VectorXd stacked_field(const GradientField& g) {
  VectorXd v(static_cast<Eigen::Index>(2 * g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = g.horiz[i];
    v(static_cast<Eigen::Index>(g.size() + i)) = g.vert[i];
  }
  return v;
}

struct Problem {
  int w = 8, h = 8;
  std::vector<DegradationOperator> ops;
  std::vector<Image> stack;
  std::vector<double> weights;
};

Problem small_problem(Rng& rng, int frames = 3) {
  Problem pr;
  const BlurKernel blur = BlurKernel::gaussian(3, 1.0);
  for (int k = 0; k < frames; ++k) {
    const FrameMotion m{k == 0 ? 0.0 : rng.uniform(0, 2), k == 0 ? 0.0 : rng.uniform(0, 2)};
    pr.ops.push_back({m, blur, 2, 0});
    pr.stack.push_back(random_image(4, 4, rng));
  }
  pr.weights.resize(static_cast<std::size_t>(frames) * 16);
  for (double& v : pr.weights) v = rng.uniform(0.2, 3.0);
  return pr;
}

double solve_b_energy(const Image& b, const Image& v, const NonLocalGraph& g, double beta, double tau) {
  double fit = 0;
  for (std::size_t i = 0; i < b.size(); ++i) fit += (v[i] - b[i]) * (v[i] - b[i]);
  return beta * nltv_value(g, b) + 0.5 * tau * fit;
}

struct Scene {
  Image truth;
  std::vector<Image> stack;
  std::vector<FrameMotion> motions;
  BlurKernel blur = BlurKernel::gaussian(3, 1.0);
};

Scene small_scene(int size, int scale, int frames, std::uint64_t seed, double noise = 0.0) {
  Scene s;
  s.truth = make_test_card(TestCard::disks, size, size);
  for (auto& f : simulate_stack(s.truth, frames, scale, s.blur, noise, seed)) {
    s.stack.push_back(f.image);
    s.motions.push_back(f.motion);
  }
  return s;
}

ReconstructionConfig fast_config(Ablation a) {
  ReconstructionConfig cfg;
  cfg.solver.ablation = a;
  cfg.solver.max_outer = 4;
  cfg.solver.pcg_max_iters = 40;
  cfg.nltv.patch_radius = 1;
  cfg.nltv.window_radius = 3;
  cfg.nltv.num_neighbors = 4;
  return cfg;
}

}  // namespace

TEST(Ablation, NamesAndGuidance) {
  for (Ablation a : {Ablation::nltv, Ablation::nltv_lg, Ablation::nltv_gpt, Ablation::nltv_lgr})
    EXPECT_EQ(parse_ablation(to_string(a)), a);
  EXPECT_FALSE(parse_ablation("lgr").has_value());
  EXPECT_FALSE(guidance_kind(Ablation::nltv).has_value());
  EXPECT_EQ(guidance_kind(Ablation::nltv_lg), GradientSourceKind::external_file);
  EXPECT_EQ(guidance_kind(Ablation::nltv_gpt), GradientSourceKind::internal_gpt);
  EXPECT_EQ(guidance_kind(Ablation::nltv_lgr), GradientSourceKind::external_file_plus_gpt);
  EXPECT_TRUE(needs_external_gradient(Ablation::nltv_lgr));
  EXPECT_FALSE(needs_external_gradient(Ablation::nltv_gpt));
}

TEST(SolverConfig, DefaultTau) {
  SolverConfig c;
  EXPECT_DOUBLE_EQ(c.effective_tau(), 0.005);
  c.tau = 0.7;
  EXPECT_EQ(c.effective_tau(), 0.7);
}

TEST(NuiInitialize, SingleFrameIdentity) {
  Rng rng(71);
  const Image y = random_image(7, 5, rng);
  EXPECT_EQ(nui_initialize({y}, {FrameMotion{}}, 1), y);
}

TEST(NuiInitialize, IntegerShiftsReassembleGrid) {
  Rng rng(72);
  const Image z = random_image(8, 6, rng);
  std::vector<Image> stack;
  std::vector<FrameMotion> motions;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      motions.push_back({double(dx), double(dy)});
      stack.push_back(apply(DegradationOperator{motions.back(), BlurKernel::delta(), 2, 0}, z));
    }
  EXPECT_LE(mfsr::testing::max_abs_diff(nui_initialize(stack, motions, 2), z), 1e-12);
}

TEST(NuiInitialize, ConstantStackFillsHoles) {
  const std::vector<Image> stack(3, Image(5, 5, 42.0));
  const Image z = nui_initialize(stack, {{0, 0}, {0.3, 0.1}, {1.7, 2.2}}, 4);
  ASSERT_EQ(z.width(), 20);
  for (double v : z.pixels()) EXPECT_NEAR(v, 42.0, 1e-9);
}

TEST(NuiInitialize, BeatsBicubicOnSimulatedStack) {
  const Scene s = small_scene(64, 4, 16, 5);
  const double nui = psnr(nui_initialize(s.stack, s.motions, 4), s.truth);
  const double bic = psnr(bicubic_upsample(s.stack.front(), 4), s.truth);
  EXPECT_GE(nui, bic);
}

TEST(NuiInitialize, Validation) {
  EXPECT_THROW(nui_initialize({}, {}, 2), std::invalid_argument);
  EXPECT_THROW(nui_initialize({Image(2, 2)}, {}, 2), std::invalid_argument);
  EXPECT_THROW(nui_initialize({Image(2, 2), Image(3, 2)}, {{}, {}}, 2), std::invalid_argument);
}

TEST(NormalOperator, SymmetricPositiveDefinite) {
  Rng rng(73);
  const Problem pr = small_problem(rng);
  const NormalOperator normal(pr.ops, pr.weights, 8, 8, 0.4, 0.01);
  const MatrixXd m = dense_matrix([&](const Image& z) { return normal.apply(z); }, 8, 8);
  EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10 * m.cwiseAbs().maxCoeff());
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (m + m.transpose()));
  EXPECT_GE(eig.eigenvalues().minCoeff(), 0.005 - 1e-10);
}

TEST(NormalOperator, MatchesDenseAssembly) {
  Rng rng(74);
  const Problem pr = small_problem(rng);
  const double alpha = 0.3, tau = 0.2;
  MatrixXd ref = 0.5 * tau * MatrixXd::Identity(64, 64);
  for (std::size_t k = 0; k < pr.ops.size(); ++k) {
    const MatrixXd a = dense_matrix([&](const Image& z) { return apply(pr.ops[k], z); }, 8, 8);
    const VectorXd w = Eigen::Map<const VectorXd>(pr.weights.data() + 16 * k, 16);
    ref += a.transpose() * w.asDiagonal() * a;
  }
  const MatrixXd s = dense_matrix(stacked_gradient, 8, 8);
  ref += alpha * s.transpose() * s;
  const NormalOperator normal(pr.ops, pr.weights, 8, 8, alpha, tau);
  const MatrixXd m = dense_matrix([&](const Image& z) { return normal.apply(z); }, 8, 8);
  EXPECT_LE((m - ref).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(NormalOperator(pr.ops, std::vector<double>(5), 8, 8, alpha, tau), std::invalid_argument);
}

TEST(SolveZ, MatchesDenseDirectSolve) {
  Rng rng(75);
  const Problem pr = small_problem(rng);
  SolverConfig cfg;
  cfg.alpha = 0.3;
  cfg.tau = 0.2;
  cfg.pcg_max_iters = 1000;
  cfg.pcg_tol = 1e-12;
  const GradientField g = mfsr::testing::random_field(8, 8, rng, 20.0);
  SolverState st;
  st.z = Image(8, 8);
  st.b = random_image(8, 8, rng);
  st.u = random_image(8, 8, rng, -5, 5);
  st.weights = pr.weights;

  MatrixXd m = 0.5 * cfg.tau * MatrixXd::Identity(64, 64);
  VectorXd rhs = 0.5 * cfg.tau * (to_vector(st.b) - to_vector(st.u));
  for (std::size_t k = 0; k < pr.ops.size(); ++k) {
    const MatrixXd a = dense_matrix([&](const Image& z) { return apply(pr.ops[k], z); }, 8, 8);
    const VectorXd w = Eigen::Map<const VectorXd>(pr.weights.data() + 16 * k, 16);
    m += a.transpose() * w.asDiagonal() * a;
    rhs += a.transpose() * w.asDiagonal() * to_vector(pr.stack[k]);
  }
  const MatrixXd s = dense_matrix(stacked_gradient, 8, 8);
  m += cfg.alpha * s.transpose() * s;
  rhs += cfg.alpha * s.transpose() * stacked_field(g);
  const VectorXd ref = m.ldlt().solve(rhs);

  const ZSolveResult res = solve_z(st, pr.stack, pr.ops, &g, cfg);
  EXPECT_TRUE(res.pcg.converged);
  EXPECT_LE((to_vector(res.z) - ref).cwiseAbs().maxCoeff(), 1e-6 * ref.cwiseAbs().maxCoeff());
}

TEST(SolveZ, IdentityOperatorIsClosedForm) {
  Rng rng(76);
  const Image y = random_image(6, 6, rng);
  const std::vector<DegradationOperator> ops{{FrameMotion{}, BlurKernel::delta(), 1, 0}};
  SolverConfig cfg;
  cfg.tau = 0.5;
  cfg.pcg_tol = 1e-14;
  SolverState st;
  st.z = Image(6, 6);
  st.b = random_image(6, 6, rng);
  st.u = random_image(6, 6, rng, -1, 1);
  st.weights.assign(36, 1.0);
  const ZSolveResult res = solve_z(st, {y}, ops, nullptr, cfg);
  for (std::size_t i = 0; i < y.size(); ++i)
    EXPECT_NEAR(res.z[i], (y[i] + 0.25 * (st.b[i] - st.u[i])) / 1.25, 1e-9);
}

TEST(SolveZ, LargeTauPinsToBMinusU) {
  Rng rng(77);
  const Problem pr = small_problem(rng);
  SolverConfig cfg;
  cfg.alpha = 0.0;
  cfg.tau = 1e8;
  cfg.pcg_tol = 1e-14;
  SolverState st;
  st.z = Image(8, 8);
  st.b = random_image(8, 8, rng);
  st.u = random_image(8, 8, rng, -3, 3);
  st.weights = pr.weights;
  const Image target = st.b - st.u;
  const ZSolveResult res = solve_z(st, pr.stack, pr.ops, nullptr, cfg);
  EXPECT_LE(mfsr::testing::max_abs_diff(res.z, target), 1e-4);
}

TEST(SolveZ, GuidanceShapeMismatchThrows) {
  Rng rng(78);
  const Problem pr = small_problem(rng);
  SolverState st{Image(8, 8), Image(8, 8), Image(8, 8), pr.weights};
  const GradientField g(7, 8);
  EXPECT_THROW(solve_z(st, pr.stack, pr.ops, &g, SolverConfig{}), std::invalid_argument);
}

TEST(SoftThreshold, Cases) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(-1.0, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(2.5, 0.0), 2.5);
  EXPECT_THROW(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST(SoftThreshold, IsTheProxOfAbs) {
  Rng rng(79);
  for (int t = 0; t < 50; ++t) {
    const double x = rng.uniform(-5, 5), k = rng.uniform(0, 3);
    double best = 0, best_e = INFINITY;
    for (int i = -100000; i <= 100000; ++i) {
      const double y = i * 1e-4;
      const double e = k * std::abs(y) + 0.5 * (y - x) * (y - x);
      if (e < best_e) best_e = e, best = y;
    }
    EXPECT_NEAR(soft_threshold(x, k), best, 1e-3) << x << " " << k;
  }
}

TEST(SolveB, BetaZeroReturnsZPlusU) {
  Rng rng(80);
  SolverState st;
  st.z = random_image(6, 6, rng);
  st.u = random_image(6, 6, rng, -1, 1);
  st.b = Image(6, 6);
  SolverConfig cfg;
  cfg.beta = 0.0;
  const NonLocalGraph g = build_graph(st.z, 1, 2, 3, 10.0);
  EXPECT_EQ(solve_b(st, g, cfg), st.z + st.u);
}

TEST(SolveB, ConstantInputIsFixed) {
  SolverState st{Image(6, 6, 30.0), Image(6, 6), Image(6, 6, 2.0), {}};
  const NonLocalGraph g = build_graph(st.z, 1, 2, 3, 10.0);
  SolverConfig cfg;
  cfg.beta = 5.0;
  cfg.tau = 0.5;
  const Image b = solve_b(st, g, cfg);
  for (double v : b.pixels()) EXPECT_NEAR(v, 32.0, 1e-9);
}

TEST(SolveB, TwoPixelClosedForm) {
  SolverState st{Image(2, 1, std::vector<double>{10.0, 14.0}), Image(2, 1), Image(2, 1), {}};
  const NonLocalGraph g = build_graph(st.z, 1, 1, 1, 3.0);
  ASSERT_EQ(g.edge_count(), 2u);
  SolverConfig cfg;
  cfg.beta = 0.3;
  cfg.tau = 0.4;
  cfg.bregman_iters = 400;
  const double c = cfg.beta * (std::sqrt(g.edges()[0].weight) + std::sqrt(g.edges()[1].weight));
  const double delta = soft_threshold(4.0, 2 * c / cfg.tau);
  const Image b = solve_b(st, g, cfg);
  EXPECT_NEAR(b[0], 12.0 - 0.5 * delta, 1e-6);
  EXPECT_NEAR(b[1], 12.0 + 0.5 * delta, 1e-6);
}

TEST(SolveB, SixteenPixelLineIsLocallyOptimal) {
  Rng rng(81);
  SolverState st{random_image(16, 1, rng), Image(16, 1), random_image(16, 1, rng, -2, 2), {}};
  const NonLocalGraph g = build_graph(st.z, 1, 4, 3, 40.0);
  SolverConfig cfg;
  cfg.beta = 0.5;
  cfg.tau = 0.05;
  cfg.bregman_iters = 500;
  const Image v = st.z + st.u;
  const Image b = solve_b(st, g, cfg);
  const double e0 = solve_b_energy(b, v, g, cfg.beta, cfg.tau);
  EXPECT_LT(e0, solve_b_energy(v, v, g, cfg.beta, cfg.tau));
  // Grid over pairs of pixels around the returned point.
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = i + 1; j < 16; j += 3)
      for (int s = -3; s <= 3; ++s)
        for (int t = -3; t <= 3; ++t) {
          Image c = b;
          c[i] += 0.05 * s;
          c[j] += 0.05 * t;
          EXPECT_GE(solve_b_energy(c, v, g, cfg.beta, cfg.tau), e0 - 1e-3);
        }
}

TEST(UpdateU, CasesAndTelescoping) {
  SolverState st{Image(2, 1, std::vector<double>{5, 1}), Image(2, 1, std::vector<double>{3, 4}),
                 Image(2, 1, std::vector<double>{1, 1}), {}};
  EXPECT_EQ(update_u(st), Image(2, 1, std::vector<double>{3, -2}));

  Rng rng(82);
  st.u = Image(4, 4);
  Image sum(4, 4);
  for (int k = 0; k < 10; ++k) {
    st.z = random_image(4, 4, rng);
    st.b = random_image(4, 4, rng);
    sum = sum + (st.z - st.b);
    st.u = update_u(st);
  }
  EXPECT_LE(mfsr::testing::max_abs_diff(st.u, sum), 1e-9);
}

TEST(Objective, SimpleCases) {
  const Image y(4, 4, 10.0);
  const std::vector<DegradationOperator> ops{{FrameMotion{}, BlurKernel::delta(), 1, 0}};
  const NonLocalGraph g = build_graph(y, 1, 1, 2, 5.0);
  EXPECT_EQ(objective(y, {y}, ops, 1.3, nullptr, g, 1.0, 1.0), 0.0);
  EXPECT_NEAR(objective(Image(4, 4, 12.0), {y}, ops, 2.0, nullptr, g, 1.0, 1.0), 64.0, 1e-12);
  EXPECT_NEAR(objective(Image(4, 4, 12.0), {y}, ops, 1.0, nullptr, g, 1.0, 1.0), 32.0, 1e-12);
  GradientField G(4, 4);
  G.horiz.assign(16, 1.0);
  EXPECT_NEAR(objective(y, {y}, ops, 2.0, &G, g, 0.5, 0.0), 8.0, 1e-12);
  EXPECT_THROW(lgr_value(y, GradientField(3, 4)), std::invalid_argument);
}

TEST(Objective, StraightLineOracle) {
  Rng rng(83);
  const Problem pr = small_problem(rng);
  const Image z = random_image(8, 8, rng);
  const GradientField G = mfsr::testing::random_field(8, 8, rng, 30.0);
  const NonLocalGraph g = build_graph(z, 1, 2, 4, 30.0);
  const double p = 1.4, alpha = 0.07, beta = 0.3;

  double fid = 0;
  for (std::size_t k = 0; k < pr.ops.size(); ++k) {
    const MatrixXd a = dense_matrix([&](const Image& x) { return apply(pr.ops[k], x); }, 8, 8);
    const VectorXd r = to_vector(pr.stack[k]) - a * to_vector(z);
    for (Eigen::Index i = 0; i < r.size(); ++i) fid += std::pow(std::abs(r(i)), p);
  }
  const MatrixXd s = dense_matrix(stacked_gradient, 8, 8);
  const double lgr = (s * to_vector(z) - stacked_field(G)).squaredNorm();
  double tv = 0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i)
    for (const auto& nb : g.neighbors(i)) tv += std::sqrt(nb.weight) * std::abs(z[nb.index] - z[i]);
  const double ref = fid + alpha * lgr + beta * tv;
  EXPECT_NEAR(objective(z, pr.stack, pr.ops, p, &G, g, alpha, beta), ref, 1e-10 * ref);
}

TEST(Reconstruct, IdentityProblemReturnsInput) {
  Rng rng(84);
  const Image y = random_image(16, 16, rng);
  ReconstructionConfig cfg = fast_config(Ablation::nltv);
  cfg.solver.beta = 0.0;
  cfg.solver.pcg_tol = 1e-12;
  const ReconstructionReport rep = reconstruct({y}, {FrameMotion{}}, BlurKernel::delta(), 1, cfg);
  EXPECT_EQ(rep.p, 2.0);
  EXPECT_LE(mfsr::testing::max_abs_diff(rep.z, y), 1e-6);
}

TEST(Reconstruct, ZeroAlphaMakesGuidanceIrrelevant) {
  const Scene s = small_scene(32, 2, 4, 9);
  ReconstructionConfig cfg = fast_config(Ablation::nltv_lg);
  cfg.solver.alpha = 0.0;
  Rng rng(85);
  const auto a = reconstruct(s.stack, s.motions, s.blur, 2, cfg, mfsr::testing::random_field(32, 32, rng));
  const auto b = reconstruct(s.stack, s.motions, s.blur, 2, cfg, mfsr::testing::random_field(32, 32, rng));
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Reconstruct, DeterministicWithConsistentTraces) {
  const Scene s = small_scene(32, 2, 4, 10, 0.001);
  const ReconstructionConfig cfg = fast_config(Ablation::nltv_gpt);
  const auto a = reconstruct(s.stack, s.motions, s.blur, 2, cfg);
  const auto b = reconstruct(s.stack, s.motions, s.blur, 2, cfg);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.objective_trace.size(), static_cast<std::size_t>(a.iterations) + 1);
  EXPECT_EQ(a.surrogate_trace.size(), a.objective_trace.size());
  EXPECT_EQ(a.log.size(), static_cast<std::size_t>(a.iterations));
  EXPECT_LE(a.iterations, cfg.solver.max_outer);
  for (std::size_t n = 1; n < a.surrogate_trace.size(); ++n)
    EXPECT_LE(a.surrogate_trace[n], a.surrogate_trace[n - 1] * (1 + 1e-6));
  EXPECT_TRUE(a.z.all_finite());
}

TEST(Reconstruct, Validation) {
  const Scene s = small_scene(16, 2, 2, 11);
  ReconstructionConfig cfg = fast_config(Ablation::nltv_lgr);
  EXPECT_THROW(reconstruct(s.stack, s.motions, s.blur, 2, cfg), std::invalid_argument);
  cfg.solver.ablation = Ablation::nltv;
  cfg.solver.max_outer = 0;
  EXPECT_THROW(reconstruct(s.stack, s.motions, s.blur, 2, cfg), std::invalid_argument);
  cfg.solver.max_outer = 2;
  cfg.solver.beta = -1;
  EXPECT_THROW(reconstruct(s.stack, s.motions, s.blur, 2, cfg), std::invalid_argument);
  EXPECT_THROW(reconstruct({}, {}, s.blur, 2, fast_config(Ablation::nltv)), std::invalid_argument);
}
