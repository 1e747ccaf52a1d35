#pragma once

#include <functional>
#include <span>
#include <vector>

namespace decm {

/// y = A x on real vectors of a fixed length.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresOptions {
  double abs_tol = 1e-12;  // stop when ‖b − A x‖₂ ≤ abs_tol
  int restart = 30;
  int max_iter = 500;      // total inner iterations across restarts
};

struct GmresResult {
  std::vector<double> x;
  double residual = 0.0;   // true residual ‖b − A x‖₂, recomputed at exit
  int iterations = 0;
  bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations. No preconditioner.
/// x0 may be empty (zero initial guess).
GmresResult gmres(const LinearMap& a, std::span<const double> b, std::span<const double> x0,
                  const GmresOptions& opt);

}  // namespace decm
