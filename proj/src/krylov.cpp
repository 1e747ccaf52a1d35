#include "decm/krylov.hpp"

#include <algorithm>
#include <cmath>

#include "decm/error.hpp"
#include "decm/kernels.hpp"

namespace decm {

namespace {

double norm2(const std::vector<double>& v) { return std::sqrt(kernels::sum_sq(v.data(), v.size())); }

// r = b - A x
double residual_into(const LinearMap& a, std::span<const double> b, const std::vector<double>& x,
                     std::vector<double>& r) {
  a(x, r);
  kernels::axpby(1.0, b.data(), -1.0, r.data(), r.data(), r.size());
  return norm2(r);
}

}  // namespace

GmresResult gmres(const LinearMap& a, std::span<const double> b, std::span<const double> x0,
                  const GmresOptions& opt) {
  const std::size_t n = b.size();
  if (opt.restart < 1 || opt.max_iter < 1 || !(opt.abs_tol > 0.0))
    throw DomainError("gmres: restart, max_iter and abs_tol must be positive");
  if (!x0.empty() && x0.size() != n) throw DomainError("gmres: initial guess has wrong length");

  GmresResult res;
  res.x.assign(n, 0.0);
  if (!x0.empty()) res.x.assign(x0.begin(), x0.end());

  const int m = opt.restart;
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), y(m);
  std::vector<double> r(n), w(n);
  auto H = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i) * m + j]; };

  double beta = residual_into(a, b, res.x, r);
  while (true) {
    res.residual = beta;
    if (!std::isfinite(beta)) break;
    if (beta <= opt.abs_tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opt.max_iter) break;

    kernels::axpby(1.0 / beta, r.data(), 0.0, r.data(), v[0].data(), n);
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && res.iterations < opt.max_iter; ++k) {
      ++res.iterations;
      a(v[k], w);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = kernels::dot(w.data(), v[i].data(), n);
        kernels::axpby(1.0, w.data(), -H(i, k), v[i].data(), w.data(), n);
      }
      H(k + 1, k) = norm2(w);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double den = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = den == 0.0 ? 1.0 : H(k, k) / den;
      sn[k] = den == 0.0 ? 0.0 : H(k + 1, k) / den;
      const double hk1 = H(k + 1, k);
      H(k, k) = den;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      const bool breakdown = hk1 <= 1e-300;
      if (!breakdown) kernels::axpby(1.0 / hk1, w.data(), 0.0, w.data(), v[k + 1].data(), n);
      if (std::abs(g[k + 1]) <= opt.abs_tol || breakdown) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k triangle.
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = H(i, i) == 0.0 ? 0.0 : s / H(i, i);
    }
    for (int j = 0; j < k; ++j)
      kernels::axpby(1.0, res.x.data(), y[j], v[j].data(), res.x.data(), n);

    const double prev = beta;
    beta = residual_into(a, b, res.x, r);
    // Stagnation: a full cycle that gains nothing will not gain anything on restart either.
    if (k > 0 && beta >= prev && beta > opt.abs_tol) {
      res.residual = beta;
      break;
    }
  }
  return res;
}

}  // namespace decm
