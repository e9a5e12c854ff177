#include "mfsr/pcg.hpp"

#include <cmath>
#include <stdexcept>

namespace mfsr {

namespace {

double dotp(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PcgResult pcg(const LinearOperator& op, std::span<const double> rhs,
              std::span<const double> inv_diag, std::span<double> x, int max_iters, double tol) {
  const std::size_t n = rhs.size();
  if (x.size() != n || (!inv_diag.empty() && inv_diag.size() != n))
    throw std::invalid_argument("pcg: vector length mismatch");

  PcgResult res;
  const double rhs_norm = std::sqrt(dotp(rhs, rhs));
  if (rhs_norm == 0.0) {
    for (double& v : x) v = 0.0;
    res.converged = true;
    return res;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  op(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];

  auto precondition = [&] {
    if (inv_diag.empty()) {
      z = r;
    } else {
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    }
  };

  double rnorm = std::sqrt(dotp(r, r));
  const double r0_norm = rnorm;
  if (r0_norm == 0.0) {
    res.converged = true;
    return res;
  }
  precondition();
  p = z;
  double rz = dotp(r, z);
  int it = 0;
  while (rnorm / r0_norm > tol && it < max_iters) {
    op(p, q);
    const double pq = dotp(p, q);
    if (!(pq > 0.0)) break;
    const double step = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    ++it;
    rnorm = std::sqrt(dotp(r, r));
    precondition();
    const double rz_next = dotp(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  op(x, q);
  double true_r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) true_r2 += (rhs[i] - q[i]) * (rhs[i] - q[i]);
  res.iterations = it;
  res.relative_residual = std::sqrt(true_r2) / r0_norm;
  res.converged = res.relative_residual <= tol;
  return res;
}

}  // namespace mfsr
