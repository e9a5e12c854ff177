#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfsr/degrade.hpp"
#include "mfsr/fidelity.hpp"
#include "mfsr/gradprior.hpp"
#include "mfsr/image.hpp"
#include "mfsr/nltv.hpp"
#include "mfsr/pcg.hpp"

namespace mfsr {

/// Which priors are active:
///   nltv      NLTV only, no gradient guidance
///   nltv-lg   NLTV + guidance taken verbatim from an external gradient field
///   nltv-gpt  NLTV + guidance from the internal gradient profile transform
///   nltv-lgr  NLTV + external gradient field passed through the transform
enum class Ablation { nltv, nltv_lg, nltv_gpt, nltv_lgr };

const char* to_string(Ablation a) noexcept;
std::optional<Ablation> parse_ablation(std::string_view name);
bool needs_external_gradient(Ablation a) noexcept;
std::optional<GradientSourceKind> guidance_kind(Ablation a) noexcept;

struct SolverConfig {
  double alpha = 0.05;  // LGR weight
  double beta = 0.02;   // NLTV weight
  double tau = -1.0;    // ADMM penalty; negative selects max(alpha, beta) * 0.1
  int max_outer = 30;
  int pcg_max_iters = 200;
  double pcg_tol = 1e-6;
  double early_stop_tol = 1e-4;
  int probe_count = 8;          // Rademacher probes for the Jacobi diagonal
  int bregman_iters = 10;       // split-Bregman rounds in the b sub-problem
  int bregman_cg_iters = 10;    // CG steps per round
  int admm_max_steps = 5;       // ADMM steps tried per outer iteration before rejecting
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::nltv_lgr;

  double effective_tau() const noexcept;
};

struct FidelityConfig {
  std::optional<double> p;  // nullopt selects p from the initial residuals
  double epsilon = 1e-5;
  NormCurve curve = NormCurve::default_curve();
  bool reselect = false;  // re-select p every outer iteration
};

struct ReconstructionConfig {
  SolverConfig solver;
  FidelityConfig fidelity;
  NltvConfig nltv;
  GptConfig gpt;
};

/// ADMM iterate with scaled multiplier u (u absorbs 1/tau), so that
/// u <- u + z - b is exactly the multiplier step.
struct SolverState {
  Image z;
  Image b;
  Image u;
  std::vector<double> weights;  // fidelity weights, frame-major like residuals()
  double p = 2.0;
  int iter = 0;
  std::vector<double> objective_trace;
};

struct IterationLog {
  int iter = 0;
  double objective = 0.0;
  double surrogate = 0.0;
  double z_change = 0.0;
  int pcg_iters = 0;
  double pcg_residual = 0.0;
  int admm_steps = 0;
  bool accepted = true;
  bool graph_rebuilt = false;
};

struct StageTimings {
  double init_s = 0.0;
  double guidance_s = 0.0;
  double graph_s = 0.0;
  double z_solve_s = 0.0;
  double b_solve_s = 0.0;
  double total_s = 0.0;
};

struct ReconstructionReport {
  Image z;
  int iterations = 0;
  std::vector<double> objective_trace;  // exact objective, [0] = initialization
  std::vector<double> surrogate_trace;  // IRN majorizer value, [0] = initialization
  std::vector<IterationLog> log;
  double p = 2.0;
  NoiseStats initial_noise;
  double eta = 0.0;
  double tau = 0.0;
  bool early_stopped = false;
  int pcg_warnings = 0;
  StageTimings timings;
};

/// Non-uniform interpolation: every LR sample is splatted bilinearly onto the
/// HR grid at its sub-pixel position, accumulations are normalized, and holes
/// are filled by normalized Gaussian averaging of filled 3x3 neighbours,
/// repeated until none remain.
Image nui_initialize(const std::vector<Image>& stack, const std::vector<FrameMotion>& motions,
                     int scale);

/// The z sub-problem operator
///   M = sum_k A_k^T W_k A_k + alpha grad^T grad + (tau/2) I.
class NormalOperator {
public:
  NormalOperator(const std::vector<DegradationOperator>& ops, std::span<const double> weights,
                 int hr_width, int hr_height, double alpha, double tau);

  Image apply(const Image& z) const;
  /// sum_k A_k^T W_k y_k + alpha grad^T G + (tau/2)(b - u).
  Image rhs(const std::vector<Image>& stack, const GradientField* guidance, const Image& b,
            const Image& u) const;
  /// Diagonal estimate from `probes` Rademacher vectors: mean of v .* Mv.
  std::vector<double> probe_diagonal(int probes, std::uint64_t seed) const;

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

private:
  std::span<const double> frame_weights(std::size_t frame) const;

  std::vector<SparseOperator> ops_;
  std::span<const double> weights_;
  std::vector<std::size_t> frame_offsets_;
  int width_;
  int height_;
  double alpha_;
  double tau_;
};

struct ZSolveResult {
  Image z;
  PcgResult pcg;
};

/// Minimizes sum ||W^1/2 (y - A z)||^2 + alpha ||grad z - G||^2 + (tau/2)||z - b + u||^2
/// with Jacobi-preconditioned CG warm-started at state.z. guidance may be null
/// (no LGR term). Non-convergence is reported in the result, not thrown.
ZSolveResult solve_z(const SolverState& state, const std::vector<Image>& stack,
                     const std::vector<DegradationOperator>& ops, const GradientField* guidance,
                     const SolverConfig& cfg);

/// Approximately minimizes beta ||grad_NL b||_1 + (tau/2)||z + u - b||^2 by
/// split Bregman: d = shrink(grad_NL b + e, beta/tau), a CG solve of
/// (I + K^T K) b = v + K^T (d - e), and e += grad_NL b - d. beta == 0 returns
/// z + u exactly.
Image solve_b(const SolverState& state, const NonLocalGraph& graph, const SolverConfig& cfg);

/// sign(x) max(|x| - kappa, 0); throws for kappa < 0.
double soft_threshold(double x, double kappa);

/// u + z - b.
Image update_u(const SolverState& state);

/// sum_k ||y_k - A_k z||_p^p + alpha ||grad z - G||^2 + beta ||grad_NL z||_1.
/// A null guidance drops the alpha term.
double objective(const Image& z, const std::vector<Image>& stack,
                 const std::vector<DegradationOperator>& ops, double p,
                 const GradientField* guidance, const NonLocalGraph& graph, double alpha,
                 double beta);

/// ||grad z - G||^2.
double lgr_value(const Image& z, const GradientField& guidance);

/// Full pipeline: NUI start, p selection, guidance per ablation, then up to
/// max_outer rounds of {IRN weights, scheduled graph rebuild, z, b, u}.
/// Each round must not increase the IRN majorizer of the objective; a round
/// whose ADMM steps all fail to do so is rejected and ends the run.
ReconstructionReport reconstruct(const std::vector<Image>& stack,
                                 const std::vector<FrameMotion>& motions, const BlurKernel& blur,
                                 int scale, const ReconstructionConfig& cfg,
                                 const std::optional<GradientField>& external_gradient = std::nullopt);

}  // namespace mfsr
