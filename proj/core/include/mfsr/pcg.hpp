#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mfsr {

/// y = M x for a symmetric positive (semi-)definite M.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;  // ||rhs - M x|| / ||rhs - M x0||, recomputed on exit
  bool converged = false;
};

/// Preconditioned conjugate gradients with a diagonal (Jacobi) preconditioner,
/// warm-started from x. Stops once the residual drops below tol times the
/// initial residual. An empty inv_diag means no preconditioning.
PcgResult pcg(const LinearOperator& op, std::span<const double> rhs,
              std::span<const double> inv_diag, std::span<double> x, int max_iters, double tol);

}  // namespace mfsr
