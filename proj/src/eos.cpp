#include "decm/eos.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "decm/krylov.hpp"

namespace decm {

std::string_view to_string(EosMethod m) noexcept {
  switch (m) {
    case EosMethod::fixed_point: return "fixed_point";
    case EosMethod::krylov: return "krylov";
    case EosMethod::dense_oracle: return "dense_oracle";
  }
  return "fixed_point";
}

EosMethod parse_eos_method(std::string_view name) {
  if (name == "fixed_point") return EosMethod::fixed_point;
  if (name == "krylov") return EosMethod::krylov;
  if (name == "dense_oracle") return EosMethod::dense_oracle;
  throw DomainError("unknown eos method '" + std::string(name) +
                    "' (expected fixed_point, krylov or dense_oracle)");
}

void EosParams::validate() const {
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("eos: b must be finite and >= 0");
  if (!(tol > 0.0)) throw DomainError("eos: tol must be > 0");
  if (max_iter < 1) throw DomainError("eos: max_iter must be >= 1");
}

// ----- L_q ---------------------------------------------------------------------------------

LqOperator::LqOperator(const SpectralField& q) : q_grid_(inverse(dealias(q))) {}

namespace {

SpectralField times(const ScalarField& q_grid, const SpectralField& g) {
  return dealias(forward(multiply(q_grid, inverse(dealias(g)))));
}

SpectralVector times(const ScalarField& q_grid, const SpectralVector& g) {
  return {times(q_grid, g.x), times(q_grid, g.y)};
}

}  // namespace

SpectralField LqOperator::apply(const SpectralField& f) const {
  require_same_grid(grid(), f.grid(), "apply_Lq");
  return riesz_dot(times(q_grid_, riesz_perp(f)));
}

SpectralField LqOperator::apply_switched(const SpectralField& f) const {
  require_same_grid(grid(), f.grid(), "apply_Lq_switched");
  const SpectralVector rf{riesz(f, 1), riesz(f, 2)};
  return -1.0 * riesz_perp_dot(times(q_grid_, rf));
}

SpectralVector leray_project_mean_free(const SpectralVector& g) {
  SpectralVector p = leray_project(g);
  p.x.at(0, 0) = 0.0;
  p.y.at(0, 0) = 0.0;
  return p;
}

SpectralVector apply_Tq_spectral(const LqOperator& Lq, const SpectralVector& u, double b) {
  require_same_grid(Lq.grid(), u.grid(), "apply_Tq");
  const double s = 1.0 + b * b;
  if (b == 0.0) return s * u;
  const SpectralVector uperp{-1.0 * u.y, u.x};
  return s * u + b * leray_project_mean_free(times(Lq.q_grid(), uperp));
}

SpectralVector eos_forcing(const LqOperator& Lq, const SpectralField& q, double b) {
  const SpectralVector rq{riesz(q, 1), riesz(q, 2)};
  return b * riesz_perp(q) - leray_project_mean_free(times(Lq.q_grid(), rq));
}

// ----- linear solvers for (I - a L) w = rhs ---------------------------------------------------

namespace {

struct Packing {
  std::shared_ptr<const WaveTable> w;
  std::vector<double> scale;

  explicit Packing(const Grid& g) : w(waves(g)), scale(g.spectral_size()) {
    for (std::size_t i = 0; i < scale.size(); ++i) scale[i] = kTwoPi * std::sqrt(w->weight[i]);
  }
  void pack(const SpectralField& f, std::span<double> out) const {
    const auto c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
      out[2 * i] = scale[i] * c[i].real();
      out[2 * i + 1] = scale[i] * c[i].imag();
    }
  }
  void unpack(std::span<const double> in, SpectralField& f) const {
    auto c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = cplx(in[2 * i] / scale[i], in[2 * i + 1] / scale[i]);
  }
};

SpectralW solve_fixed_point(const LqOperator& L, double a, const SpectralField& rhs,
                            double abs_tol, int max_iter, const SpectralField* guess) {
  SpectralField w = guess ? *guess : SpectralField(rhs.grid());
  double best = std::numeric_limits<double>::infinity();
  double res = best;
  for (int it = 0; it < max_iter; ++it) {
    // next = rhs + a L w; ‖next − w‖ is the exact residual of w.
    SpectralField next = combine(1.0, rhs, a, L.apply(w));
    res = l2_norm(next - w);
    if (!std::isfinite(res))
      throw ConvergenceError("fixed-point iteration produced non-finite values", res, it);
    if (res <= abs_tol) return {std::move(w), res, it};
    best = std::min(best, res);
    if (res > 1e6 * best && it > 5)
      throw ConvergenceError("fixed-point iteration diverged (residual " + std::to_string(res) +
                                 ")",
                             res, it);
    w = std::move(next);
  }
  throw ConvergenceError("fixed-point iteration did not converge in " + std::to_string(max_iter) +
                             " iterations (residual " + std::to_string(res) + ")",
                         res, max_iter);
}

SpectralW solve_krylov(const LqOperator& L, double a, const SpectralField& rhs, double abs_tol,
                       int max_iter, const SpectralField* guess) {
  const Grid& g = rhs.grid();
  const Packing pk(g);
  const std::size_t len = 2 * g.spectral_size();
  auto op = [&](std::span<const double> x, std::span<double> y) {
    SpectralField f(g);
    pk.unpack(x, f);
    pk.pack(combine(1.0, f, -a, L.apply(f)), y);
  };
  std::vector<double> b(len), x0;
  pk.pack(rhs, b);
  if (guess) {
    x0.resize(len);
    pk.pack(*guess, x0);
  }
  GmresOptions opt;
  opt.abs_tol = abs_tol;
  opt.max_iter = max_iter;
  opt.restart = 30;
  GmresResult r = gmres(op, b, x0, opt);
  if (!r.converged)
    throw ConvergenceError("krylov solve did not converge (residual " +
                               std::to_string(r.residual) + ")",
                           r.residual, r.iterations);
  SpectralField w(g);
  pk.unpack(r.x, w);
  return {std::move(w), r.residual, r.iterations};
}

SpectralW solve_dense(const LqOperator& L, double a, const SpectralField& rhs) {
  const Grid& g = rhs.grid();
  if (g.n() > kDenseOracleMaxN)
    throw DomainError("dense_oracle is limited to n <= " + std::to_string(kDenseOracleMaxN) +
                      ", got n = " + std::to_string(g.n()));
  const int m = static_cast<int>(g.size());
  Eigen::MatrixXd mat(m, m);
  ScalarField e(g);
  for (int j = 0; j < m; ++j) {
    e.values()[j] = 1.0;
    const ScalarField col = e - a * inverse(L.apply(forward(e)));
    for (int i = 0; i < m; ++i) mat(i, j) = col.values()[i];
    e.values()[j] = 0.0;
  }
  const ScalarField r = inverse(rhs);
  Eigen::VectorXd bv(m);
  for (int i = 0; i < m; ++i) bv[i] = r.values()[i];
  const Eigen::VectorXd x = mat.partialPivLu().solve(bv);
  ScalarField xs(g);
  for (int i = 0; i < m; ++i) xs.values()[i] = x[i];
  SpectralField w = forward(xs);
  const double res = l2_norm(combine(1.0, w, -a, L.apply(w)) - rhs);
  return {std::move(w), res, 1};
}

}  // namespace

SpectralW solve_shifted(const LqOperator& L, double a, const SpectralField& rhs, EosMethod method,
                        double abs_tol, int max_iter, const SpectralField* guess) {
  require_same_grid(L.grid(), rhs.grid(), "solve_shifted");
  if (max_abs(rhs) == 0.0 && !guess) return {SpectralField(rhs.grid()), 0.0, 0};
  switch (method) {
    case EosMethod::fixed_point: return solve_fixed_point(L, a, rhs, abs_tol, max_iter, guess);
    case EosMethod::krylov: return solve_krylov(L, a, rhs, abs_tol, max_iter, guess);
    case EosMethod::dense_oracle: return solve_dense(L, a, rhs);
  }
  throw DomainError("solve_shifted: unknown method");
}

namespace {

void require_mean_zero(const SpectralField& q, const char* where) {
  const double scale = std::max(1.0, max_abs(q));
  if (std::abs(q.mean()) > 1e-12 * scale)
    throw DomainError(std::string(where) + ": input must have zero mean (mean = " +
                      std::to_string(q.mean()) + ")");
}

// Absolute tolerance for the w solve: the stated normalizations, tightened to the size of the
// right side so that tiny solutions (large B) are still resolved to relative accuracy.
double w_tolerance(double tol, double norm_sq_bound, double rhs_norm) {
  return tol * std::min(std::max(1.0, norm_sq_bound), std::max(rhs_norm, 1e-300));
}

}  // namespace

SpectralEos solve_eos_spectral(const SpectralField& q_in, const EosParams& params,
                               const SpectralField* guess, bool compute_residual,
                               double tol_scale) {
  params.validate();
  require_mean_zero(q_in, "solve_eos");
  const SpectralField q = remove_mean(q_in);
  const Grid& g = q.grid();
  const double b = params.b;
  const double s = 1.0 + b * b;
  const double alpha = b / s;
  const LqOperator L(q);

  const SpectralField rhs = (-1.0 / (s * s)) * L.apply(q);
  const double qn = l2_norm(q);
  const double qinf = max_abs(L.q_grid());
  const double tol = params.tol * tol_scale;
  const double abs_tol =
      tol * std::min({std::max(1.0, qn * qn), std::max(1.0, qn * (b + qinf)) / s,
                      std::max(l2_norm(rhs), 1e-300)});

  SpectralEos out{SpectralField(g), SpectralField(g), {SpectralField(g), SpectralField(g)}, -1.0, 0};
  if (b == 0.0) {
    out.w = rhs;
  } else {
    SpectralW ws = solve_shifted(L, alpha, rhs, params.method, abs_tol, params.max_iter, guess);
    out.w = std::move(ws.w);
    out.iterations = ws.iterations;
  }
  out.v = combine(1.0, out.w, alpha, q);
  out.u = riesz_perp(out.v);
  if (compute_residual) {
    const SpectralVector r = apply_Tq_spectral(L, out.u, b) - eos_forcing(L, q, b);
    out.residual = l2_norm(r);
  }
  return out;
}

SpectralW solve_w_boosted_spectral(const SpectralField& Q_in, const EosParams& params,
                                   const SpectralField* guess, double tol_scale) {
  params.validate();
  if (!(params.b > 0.0)) throw DomainError("solve_w_boosted: b must be > 0");
  require_mean_zero(Q_in, "solve_w_boosted");
  const SpectralField Q = remove_mean(Q_in);
  const double b = params.b;
  const double s = 1.0 + b * b;
  const LqOperator L(Q);
  const SpectralField rhs = (-1.0 / (b * b * s * s)) * L.apply(Q);
  const double qn = l2_norm(Q) / b;
  const double abs_tol = w_tolerance(params.tol * tol_scale, qn * qn, l2_norm(rhs));
  return solve_shifted(L, 1.0 / s, rhs, params.method, abs_tol, params.max_iter, guess);
}

// ----- physical-field API -------------------------------------------------------------------

ScalarField apply_Lq(const ScalarField& q, const ScalarField& f) {
  require_same_grid(q.grid(), f.grid(), "apply_Lq");
  return inverse(LqOperator(forward(q)).apply(forward(f)));
}

ScalarField apply_Lq_switched(const ScalarField& q, const ScalarField& f) {
  require_same_grid(q.grid(), f.grid(), "apply_Lq_switched");
  return inverse(LqOperator(forward(q)).apply_switched(forward(f)));
}

VectorField apply_Tq(const ScalarField& q, const VectorField& u, double b) {
  require_same_grid(q.grid(), u.grid(), "apply_Tq");
  return inverse(apply_Tq_spectral(LqOperator(forward(q)), forward(u), b));
}

WSolve solve_w(const ScalarField& q, const EosParams& params) {
  params.validate();
  const SpectralField qh = forward(q);
  require_mean_zero(qh, "solve_w");
  const double b = params.b;
  const double s = 1.0 + b * b;
  const LqOperator L(qh);
  const SpectralField rhs = (-1.0 / (s * s)) * L.apply(qh);
  const double qn = l2_norm(qh);
  SpectralW ws = solve_shifted(L, b / s, rhs, params.method,
                               w_tolerance(params.tol, qn * qn, l2_norm(rhs)), params.max_iter);
  return {inverse(ws.w), ws.residual, ws.iterations};
}

WSolve solve_w_boosted(const ScalarField& Q, const EosParams& params) {
  SpectralW ws = solve_w_boosted_spectral(forward(Q), params);
  return {inverse(ws.w), ws.residual, ws.iterations};
}

EosSolution solve_eos(const ScalarField& q, const EosParams& params) {
  SpectralEos e = solve_eos_spectral(forward(q), params, nullptr, true);
  return {inverse(e.w), inverse(e.v), inverse(e.u), inverse(-1.0 * lambda_pow(e.v, 1.0)),
          e.residual, e.iterations};
}

VectorField apply_Tq_inverse(const ScalarField& q, const VectorField& f, const EosParams& params) {
  params.validate();
  require_same_grid(q.grid(), f.grid(), "apply_Tq_inverse");
  const SpectralField qh = forward(q);
  require_mean_zero(qh, "apply_Tq_inverse");
  const SpectralVector fh = leray_project_mean_free(forward(f));
  const double b = params.b;
  const double s = 1.0 + b * b;
  // R^⊥·T_q(R^⊥v) = −(1+B²)(I − (B/(1+B²)) L_q) v
  const SpectralField g = (-1.0 / s) * riesz_perp_dot(fh);
  const LqOperator L(qh);
  SpectralField v(q.grid());
  if (b == 0.0) {
    v = g;
  } else {
    v = solve_shifted(L, b / s, g, params.method, params.tol * std::max(l2_norm(g), 1e-300),
                      params.max_iter)
            .w;
  }
  const SpectralVector u = riesz_perp(v);
  const double fn = l2_norm(fh);
  const double un = l2_norm(u);
  if (un > fn / s * (1.0 + 1e-8) + params.tol)
    throw Error("apply_Tq_inverse: contraction bound violated (" + std::to_string(un) + " > " +
                std::to_string(fn / s) + ")");
  return inverse(u);
}

}  // namespace decm
