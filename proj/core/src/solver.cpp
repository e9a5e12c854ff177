#include "mfsr/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfsr/gradient.hpp"
#include "mfsr/random.hpp"

namespace mfsr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// (I + K^T K) for the split-Bregman b-step; K^T = -nl_divergence.
void bregman_operator(const NonLocalGraph& graph, std::span<const double> x, std::span<double> y) {
  const Image xi(graph.width(), graph.height(), std::vector<double>(x.begin(), x.end()));
  const Image div = nl_divergence(graph, nl_gradient(graph, xi));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - div[i];
}

// IRN majorizer of the fidelity term at the previous residual r0:
// sum_i w_i r_i^2 + offset, touching sum smoothed_lp(r0) at r = r0.
struct Majorizer {
  std::vector<double> weights;
  double offset = 0.0;
};

Majorizer fidelity_majorizer(std::span<const double> r0, double p, double eps) {
  Majorizer m;
  m.weights = irn_weights(r0, p, eps);
  for (std::size_t i = 0; i < r0.size(); ++i) {
    m.weights[i] *= 0.5 * p;
    m.offset += smoothed_lp(r0[i], p, eps) - m.weights[i] * r0[i] * r0[i];
  }
  return m;
}

double weighted_sq(std::span<const double> r, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += w[i] * r[i] * r[i];
  return s;
}

double smoothed_sum(std::span<const double> r, double p, double eps) {
  double s = 0.0;
  for (double x : r) s += smoothed_lp(x, p, eps);
  return s;
}

double relative_change(const Image& next, const Image& prev) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    num += (next[i] - prev[i]) * (next[i] - prev[i]);
    den += prev[i] * prev[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

const char* to_string(Ablation a) noexcept {
  switch (a) {
    case Ablation::nltv: return "nltv";
    case Ablation::nltv_lg: return "nltv-lg";
    case Ablation::nltv_gpt: return "nltv-gpt";
    case Ablation::nltv_lgr: return "nltv-lgr";
  }
  return "unknown";
}

std::optional<Ablation> parse_ablation(std::string_view name) {
  for (auto a : {Ablation::nltv, Ablation::nltv_lg, Ablation::nltv_gpt, Ablation::nltv_lgr})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

bool needs_external_gradient(Ablation a) noexcept {
  return a == Ablation::nltv_lg || a == Ablation::nltv_lgr;
}

std::optional<GradientSourceKind> guidance_kind(Ablation a) noexcept {
  switch (a) {
    case Ablation::nltv: return std::nullopt;
    case Ablation::nltv_lg: return GradientSourceKind::external_file;
    case Ablation::nltv_gpt: return GradientSourceKind::internal_gpt;
    case Ablation::nltv_lgr: return GradientSourceKind::external_file_plus_gpt;
  }
  return std::nullopt;
}

double SolverConfig::effective_tau() const noexcept {
  return tau >= 0.0 ? tau : 0.1 * std::max(alpha, beta);
}

// ---------------------------------------------------------------------------
// NUI initialization

Image nui_initialize(const std::vector<Image>& stack, const std::vector<FrameMotion>& motions,
                     int scale) {
  if (stack.empty()) throw std::invalid_argument("nui_initialize: empty stack");
  if (stack.size() != motions.size())
    throw std::invalid_argument("nui_initialize: frame count and motion count differ");
  if (scale < 1) throw std::invalid_argument("nui_initialize: scale must be >= 1");
  const int lw = stack.front().width(), lh = stack.front().height();
  const int w = lw * scale, h = lh * scale;

  std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0), wsum(acc.size(), 0.0);
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const Image& y = stack[k];
    if (y.width() != lw || y.height() != lh)
      throw std::invalid_argument("nui_initialize: frames differ in size");
    for (int i = 0; i < lh; ++i)
      for (int j = 0; j < lw; ++j) {
        const double X = j * scale + motions[k].dx, Y = i * scale + motions[k].dy;
        const double fx = std::floor(X), fy = std::floor(Y);
        const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
        const double ax = X - fx, ay = Y - fy;
        const double v = y.at(j, i);
        const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
        const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
        const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
        for (int c = 0; c < 4; ++c) {
          if (wts[c] <= 0.0 || xs[c] < 0 || ys[c] < 0 || xs[c] >= w || ys[c] >= h) continue;
          const std::size_t idx = static_cast<std::size_t>(ys[c]) * w + xs[c];
          acc[idx] += wts[c] * v;
          wsum[idx] += wts[c];
        }
      }
  }

  constexpr double kMinWeight = 1e-6;
  Image z(w, h);
  std::vector<char> filled(z.size(), 0);
  std::size_t holes = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (wsum[i] > kMinWeight) {
      z[i] = acc[i] / wsum[i];
      filled[i] = 1;
    } else {
      ++holes;
    }
  }
  if (holes == z.size()) throw std::invalid_argument("nui_initialize: no sample lands on the HR grid");

  // exp(-r^2 / 2) over the 3x3 neighbourhood.
  const double g1 = std::exp(-0.5), g2 = std::exp(-1.0);
  while (holes > 0) {
    std::vector<std::pair<std::size_t, double>> updates;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = z.index(x, y);
        if (filled[i]) continue;
        double num = 0.0, den = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if ((dx == 0 && dy == 0) || xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
            const std::size_t j = z.index(xx, yy);
            if (!filled[j]) continue;
            const double g = (dx == 0 || dy == 0) ? g1 : g2;
            num += g * z[j];
            den += g;
          }
        if (den > 0.0) updates.emplace_back(i, num / den);
      }
    for (const auto& [i, v] : updates) {
      z[i] = v;
      filled[i] = 1;
    }
    holes -= updates.size();
  }
  return z;
}

// ---------------------------------------------------------------------------
// Normal operator of the z sub-problem

NormalOperator::NormalOperator(const std::vector<DegradationOperator>& ops,
                               std::span<const double> weights, int hr_width, int hr_height,
                               double alpha, double tau)
    : weights_(weights), width_(hr_width), height_(hr_height), alpha_(alpha), tau_(tau) {
  std::size_t off = 0;
  ops_.reserve(ops.size());
  for (const auto& op : ops) {
    ops_.emplace_back(op, hr_width, hr_height);
    frame_offsets_.push_back(off);
    off += ops_.back().rows();
  }
  frame_offsets_.push_back(off);
  if (weights_.size() != off)
    throw std::invalid_argument("NormalOperator: weight vector has " +
                                std::to_string(weights_.size()) + " entries, expected " +
                                std::to_string(off));
}

std::span<const double> NormalOperator::frame_weights(std::size_t frame) const {
  return weights_.subspan(frame_offsets_[frame], frame_offsets_[frame + 1] - frame_offsets_[frame]);
}

Image NormalOperator::apply(const Image& z) const {
  Image out = (0.5 * tau_) * z;
  std::vector<double> lr;
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    lr.resize(ops_[k].rows());
    ops_[k].apply(z.pixels(), lr);
    ops_[k].accumulate_adjoint(lr, frame_weights(k), out.pixels());
  }
  if (alpha_ != 0.0) {
    const Image lap = gradient_adjoint(discrete_gradient(z));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha_ * lap[i];
  }
  return out;
}

Image NormalOperator::rhs(const std::vector<Image>& stack, const GradientField* guidance,
                          const Image& b, const Image& u) const {
  if (stack.size() != ops_.size()) throw std::invalid_argument("rhs: frame/operator count mismatch");
  Image out(width_, height_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * tau_ * (b[i] - u[i]);
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    if (stack[k].size() != ops_[k].rows())
      throw std::invalid_argument("rhs: frame " + std::to_string(k) + " has the wrong size");
    ops_[k].accumulate_adjoint(stack[k].pixels(), frame_weights(k), out.pixels());
  }
  if (guidance && alpha_ != 0.0) {
    const Image gt = gradient_adjoint(*guidance);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha_ * gt[i];
  }
  return out;
}

std::vector<double> NormalOperator::probe_diagonal(int probes, std::uint64_t seed) const {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  std::vector<double> diag(n, 0.0);
  Image v(width_, height_);
  for (int p = 0; p < probes; ++p) {
    for (double& x : v.pixels()) x = rng.sign();
    const Image mv = apply(v);
    for (std::size_t i = 0; i < n; ++i) diag[i] += v[i] * mv[i];
  }
  double mean_pos = 0.0;
  std::size_t npos = 0;
  for (double& d : diag) {
    d /= std::max(probes, 1);
    if (d > 0.0) {
      mean_pos += d;
      ++npos;
    }
  }
  // Probing noise can push small entries to zero or below.
  const double floor_d = npos ? 1e-3 * mean_pos / static_cast<double>(npos) : 1.0;
  for (double& d : diag) d = std::max(d, floor_d);
  return diag;
}

// ---------------------------------------------------------------------------
// Sub-problems

ZSolveResult solve_z(const SolverState& state, const std::vector<Image>& stack,
                     const std::vector<DegradationOperator>& ops, const GradientField* guidance,
                     const SolverConfig& cfg) {
  const int w = state.z.width(), h = state.z.height();
  if (guidance && !guidance->same_shape(state.z))
    throw std::invalid_argument("solve_z: guidance field does not match the HR grid");
  const double alpha = guidance ? cfg.alpha : 0.0;
  const NormalOperator normal(ops, state.weights, w, h, alpha, cfg.effective_tau());
  const Image rhs = normal.rhs(stack, guidance, state.b, state.u);

  std::vector<double> inv_diag = normal.probe_diagonal(cfg.probe_count, cfg.seed ^ 0x9e3779b97f4a7c15ull);
  for (double& d : inv_diag) d = 1.0 / d;

  ZSolveResult out{state.z, {}};
  const LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    const Image xi(w, h, std::vector<double>(x.begin(), x.end()));
    const Image yi = normal.apply(xi);
    std::copy(yi.vec().begin(), yi.vec().end(), y.begin());
  };
  out.pcg = pcg(op, rhs.pixels(), inv_diag, out.z.pixels(), cfg.pcg_max_iters, cfg.pcg_tol);
  return out;
}

double soft_threshold(double x, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  const double a = std::abs(x) - kappa;
  return a > 0.0 ? std::copysign(a, x) : 0.0;
}

Image solve_b(const SolverState& state, const NonLocalGraph& graph, const SolverConfig& cfg) {
  const Image v = state.z + state.u;
  if (cfg.beta == 0.0) return v;
  const double tau = cfg.effective_tau();
  if (!(tau > 0.0)) throw std::invalid_argument("solve_b: tau must be positive when beta > 0");
  const double kappa = cfg.beta / tau;

  Image b = v;
  NonLocalField d{std::vector<double>(graph.edge_count(), 0.0)};
  NonLocalField e = d;
  NonLocalField diff = d;
  const LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    bregman_operator(graph, x, y);
  };
  for (int it = 0; it < cfg.bregman_iters; ++it) {
    for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] = d.values[k] - e.values[k];
    const Image rhs = v - nl_divergence(graph, diff);
    pcg(op, rhs.pixels(), {}, b.pixels(), cfg.bregman_cg_iters, 1e-12);
    const NonLocalField kb = nl_gradient(graph, b);
    for (std::size_t k = 0; k < kb.values.size(); ++k) {
      d.values[k] = soft_threshold(kb.values[k] + e.values[k], kappa);
      e.values[k] += kb.values[k] - d.values[k];
    }
  }
  return b;
}

Image update_u(const SolverState& state) {
  Image u = state.u;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += state.z[i] - state.b[i];
  return u;
}

double lgr_value(const Image& z, const GradientField& guidance) {
  if (!guidance.same_shape(z)) throw std::invalid_argument("lgr_value: guidance shape mismatch");
  const GradientField g = discrete_gradient(z);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double dh = g.horiz[i] - guidance.horiz[i], dv = g.vert[i] - guidance.vert[i];
    s += dh * dh + dv * dv;
  }
  return s;
}

double objective(const Image& z, const std::vector<Image>& stack,
                 const std::vector<DegradationOperator>& ops, double p,
                 const GradientField* guidance, const NonLocalGraph& graph, double alpha,
                 double beta) {
  const auto r = residuals(stack, ops, z);
  double f = lp_sum(r, p);
  if (guidance) f += alpha * lgr_value(z, *guidance);
  return f + beta * nltv_value(graph, z);
}

// ---------------------------------------------------------------------------
// Outer loop

ReconstructionReport reconstruct(const std::vector<Image>& stack,
                                 const std::vector<FrameMotion>& motions, const BlurKernel& blur,
                                 int scale, const ReconstructionConfig& cfg,
                                 const std::optional<GradientField>& external_gradient) {
  const auto t_start = Clock::now();
  const SolverConfig& sc = cfg.solver;
  if (stack.empty()) throw std::invalid_argument("reconstruct: empty stack");
  if (sc.max_outer < 1) throw std::invalid_argument("reconstruct: max_outer must be >= 1");
  if (!(sc.alpha >= 0.0) || !(sc.beta >= 0.0))
    throw std::invalid_argument("reconstruct: alpha and beta must be non-negative");
  if (needs_external_gradient(sc.ablation) && !external_gradient)
    throw std::invalid_argument(std::string("reconstruct: method ") + to_string(sc.ablation) +
                                " needs an external gradient field");

  ReconstructionReport rep;
  rep.tau = sc.effective_tau();
  const double eps = cfg.fidelity.epsilon;
  const auto ops = make_operators(motions, blur, scale);

  auto t0 = Clock::now();
  SolverState st;
  try {
    st.z = nui_initialize(stack, motions, scale);
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("initialization: ") + ex.what());
  }
  rep.timings.init_s = seconds_since(t0);

  auto r = residuals(stack, ops, st.z);
  rep.initial_noise = estimate_noise(r);
  st.p = cfg.fidelity.p ? *cfg.fidelity.p : select_p(rep.initial_noise, cfg.fidelity.curve);
  if (!(st.p >= 1.0 && st.p <= 2.0)) throw std::invalid_argument("reconstruct: p outside [1, 2]");
  rep.p = st.p;

  t0 = Clock::now();
  std::optional<GradientField> guidance;
  if (const auto kind = guidance_kind(sc.ablation)) {
    try {
      guidance = build_guidance(*kind, external_gradient, stack.front(), scale, cfg.gpt);
    } catch (const std::exception& ex) {
      throw std::runtime_error(std::string("guidance: ") + ex.what());
    }
  }
  const GradientField* G = guidance ? &*guidance : nullptr;
  const double alpha = G ? sc.alpha : 0.0;
  rep.timings.guidance_s = seconds_since(t0);

  rep.eta = cfg.nltv.eta > 0.0 ? cfg.nltv.eta
                               : std::max(rep.initial_noise.sigma_g, cfg.nltv.eta_floor);
  auto make_graph = [&](const Image& img) {
    const auto tg = Clock::now();
    auto g = build_graph(img, cfg.nltv.patch_radius, cfg.nltv.window_radius,
                         cfg.nltv.num_neighbors, rep.eta);
    rep.timings.graph_s += seconds_since(tg);
    return g;
  };
  NonLocalGraph graph = make_graph(st.z);

  auto regularizers = [&](const Image& z, const NonLocalGraph& g) {
    return (G ? alpha * lgr_value(z, *G) : 0.0) + sc.beta * nltv_value(g, z);
  };

  st.b = st.z;
  st.u = Image(st.z.width(), st.z.height());
  rep.objective_trace.push_back(lp_sum(r, st.p) + regularizers(st.z, graph));
  rep.surrogate_trace.push_back(smoothed_sum(r, st.p, eps) + regularizers(st.z, graph));

  for (int n = 1; n <= sc.max_outer; ++n) {
    IterationLog entry;
    entry.iter = n;

    if (cfg.fidelity.reselect && !cfg.fidelity.p) st.p = select_p(estimate_noise(r), cfg.fidelity.curve);

    const double reg_prev = regularizers(st.z, graph);
    if (n > 1 && cfg.nltv.rebuild_every > 0 && (n - 1) % cfg.nltv.rebuild_every == 0) {
      NonLocalGraph candidate = make_graph(st.z);
      // The rebuilt graph is adopted only if it does not raise the objective at z.
      if (regularizers(st.z, candidate) <= reg_prev) {
        graph = std::move(candidate);
        entry.graph_rebuilt = true;
      }
    }

    const Majorizer maj = fidelity_majorizer(r, st.p, eps);
    st.weights = maj.weights;
    const double q_prev = smoothed_sum(r, st.p, eps) + regularizers(st.z, graph);

    const Image z_prev = st.z;
    std::vector<double> r_next;
    double q_next = q_prev;
    Image z_accepted = z_prev;
    entry.accepted = false;
    SolverState trial = st;
    for (int step = 0; step < std::max(1, sc.admm_max_steps); ++step) {
      ++entry.admm_steps;
      auto tz = Clock::now();
      ZSolveResult zs = solve_z(trial, stack, ops, G, sc);
      rep.timings.z_solve_s += seconds_since(tz);
      entry.pcg_iters += zs.pcg.iterations;
      entry.pcg_residual = zs.pcg.relative_residual;
      if (!zs.pcg.converged) ++rep.pcg_warnings;
      trial.z = std::move(zs.z);

      auto tb = Clock::now();
      trial.b = solve_b(trial, graph, sc);
      rep.timings.b_solve_s += seconds_since(tb);
      trial.u = update_u(trial);

      auto rc = residuals(stack, ops, trial.z);
      const double qc = weighted_sq(rc, maj.weights) + maj.offset + regularizers(trial.z, graph);
      if (qc <= q_prev) {
        entry.accepted = true;
        z_accepted = trial.z;
        q_next = qc;
        r_next = std::move(rc);
        break;
      }
    }

    st.b = trial.b;
    st.u = trial.u;
    st.iter = n;
    if (entry.accepted) {
      st.z = std::move(z_accepted);
      r = std::move(r_next);
    } else {
      st.z = z_prev;
    }
    entry.z_change = relative_change(st.z, z_prev);
    entry.surrogate = entry.accepted ? q_next : q_prev;
    entry.objective = lp_sum(r, st.p) + regularizers(st.z, graph);
    rep.objective_trace.push_back(entry.objective);
    rep.surrogate_trace.push_back(entry.surrogate);
    rep.log.push_back(entry);
    rep.iterations = n;

    if (!entry.accepted || entry.z_change < sc.early_stop_tol) {
      rep.early_stopped = n < sc.max_outer || !entry.accepted;
      break;
    }
  }

  st.objective_trace = rep.objective_trace;
  rep.z = std::move(st.z);
  rep.timings.total_s = seconds_since(t_start);
  return rep;
}

}  // namespace mfsr
