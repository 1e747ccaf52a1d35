#include "decm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "decm/kernels.hpp"

namespace decm {

double lp_norm(const ScalarField& f, double p) {
  const auto& k = kernels::active();
  const std::size_t m = f.values().size();
  const double area = f.grid().dx() * f.grid().dx();
  if (std::isinf(p) && p > 0) return k.max_abs(f.data(), m);
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  if (p == 2.0) return std::sqrt(k.sum_sq(f.data(), m) * area);
  if (p == 4.0) return std::pow(k.sum_pow4(f.data(), m) * area, 0.25);
  if (p == 8.0) return std::pow(k.sum_pow8(f.data(), m) * area, 0.125);
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * area, 1.0 / p);
}

namespace {

template <class F>
double weighted_sum(const SpectralField& f, F&& mult) {
  const auto w = waves(f.grid());
  const auto c = f.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    s += w->weight[i] * mult(w->k1[i], w->k2[i], w->kmag2[i]) * std::norm(c[i]);
  return kTwoPi * kTwoPi * s;
}

double third_order_symbol(double a, double b) {
  const double a2 = a * a, b2 = b * b;
  return a2 * a2 * a2 + a2 * a2 * b2 + a2 * b2 * b2 + b2 * b2 * b2;
}

}  // namespace

double sobolev_norm(const SpectralField& f, double s) {
  return std::sqrt(weighted_sum(f, [s](double, double, double k2) { return std::pow(1.0 + k2, s); }));
}
double sobolev_norm(const ScalarField& f, double s) { return sobolev_norm(forward(f), s); }

double sobolev_seminorm(const SpectralField& f, double s) {
  return std::sqrt(weighted_sum(
      f, [s](double, double, double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, s); }));
}
double sobolev_seminorm(const ScalarField& f, double s) { return sobolev_seminorm(forward(f), s); }

double h3_energy(const SpectralField& f) {
  return weighted_sum(f, [](double a, double b, double) { return third_order_symbol(a, b); });
}

double h3_dissipation(const SpectralField& f) {
  return weighted_sum(
      f, [](double a, double b, double k2) { return std::sqrt(k2) * third_order_symbol(a, b); });
}

NormRecord norm_record(double t, const ScalarField& f) {
  const SpectralField fh = forward(f);
  NormRecord r;
  r.t = t;
  r.l2 = l2_norm(fh);
  r.l4 = lp_norm(f, 4.0);
  r.linf = lp_norm(f, std::numeric_limits<double>::infinity());
  r.h_half = sobolev_seminorm(fh, 0.5);
  r.h1 = sobolev_seminorm(fh, 1.0);
  r.h3 = sobolev_norm(fh, 3.0);
  r.mean = fh.mean();
  return r;
}

NormRecord norm_record(const State& s) {
  NormRecord r = norm_record(s.t, s.field);
  r.mean = s.spectral.mean();
  return r;
}

std::vector<NormRecord> norm_series(const Trajectory& traj) {
  std::vector<NormRecord> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) out.push_back(norm_record(traj.time(i), traj.field(i)));
  return out;
}

double dissipation_coefficient(const SimConfig& c) {
  switch (c.model) {
    case Model::inviscid_sqg: return 0.0;
    case Model::critical_sqg: return 1.0;
    case Model::decm: break;
  }
  switch (c.time_scale) {
    case TimeScale::laboratory: return 1.0 / (1.0 + c.b * c.b);
    case TimeScale::gyration: return 1.0 / c.b;
    case TimeScale::friction: return 1.0;
  }
  return 1.0;
}

std::vector<double> energy_balance_residual(std::span<const NormRecord> r, const SimConfig& config,
                                            bool include_eps_sink) {
  std::vector<double> out(r.size(), 0.0);
  if (r.empty()) return out;
  const double c = dissipation_coefficient(config);
  const double eps = include_eps_sink ? config.eps : 0.0;
  const double norm0 = std::max(r[0].l2 * r[0].l2, std::numeric_limits<double>::min());
  auto sink = [&](const NormRecord& x) { return c * x.h_half * x.h_half + eps * x.h1 * x.h1; };
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double dt = r[i].t - r[i - 1].t;
    const double de = 0.5 * (r[i].l2 * r[i].l2 - r[i - 1].l2 * r[i - 1].l2);
    out[i] = (de + 0.5 * dt * (sink(r[i - 1]) + sink(r[i]))) / norm0;
  }
  return out;
}

std::vector<double> energy_balance_residual(const Trajectory& traj, const SimConfig& config) {
  const auto recs = norm_series(traj);
  return energy_balance_residual(recs, config);
}

double balance_rate(std::span<const NormRecord> r, std::span<const double> residual) {
  if (r.size() != residual.size()) throw DomainError("balance_rate: length mismatch");
  double m = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double dt = r[i].t - r[i - 1].t;
    if (dt > 0.0) m = std::max(m, std::abs(residual[i]) / dt);
  }
  return m;
}

VectorField electric_field(const ScalarField& q) {
  const SpectralField qh = forward(q);
  return inverse(SpectralVector{-1.0 * riesz(qh, 1), -1.0 * riesz(qh, 2)});
}

VectorField current_density(const ScalarField& q, const VectorField& u, double b) {
  require_same_grid(q.grid(), u.grid(), "current_density");
  const SpectralField qh = forward(q);
  const SpectralVector uh = forward(u);
  const SpectralVector e{-1.0 * riesz(qh, 1), -1.0 * riesz(qh, 2)};
  const SpectralVector uperp{-1.0 * uh.y, uh.x};
  const SpectralVector uq{dealiased_product(uh.x, qh), dealiased_product(uh.y, qh)};
  return inverse(uq + e - b * uperp);
}

double charge_conservation_residual(const ScalarField& q, const SimConfig& config) {
  SimConfig lab = config;
  lab.time_scale = TimeScale::laboratory;
  lab.boosted = false;
  lab.eps = 0.0;
  lab.model = Model::decm;
  const EosSolution e = solve_eos(q, lab.eos_params());
  const SpectralField dq = forward(rhs_lab(q, lab));
  const SpectralField divj = divergence(forward(current_density(q, e.u, config.b)));
  return l2_norm(divj + dq) / std::max(l2_norm(dq), 1e-300);
}

DecayFit decay_fit(std::span<const double> t, std::span<const double> value, double t_min,
                   double t_max) {
  if (t.size() != value.size()) throw DomainError("decay_fit: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(value[i] > 0.0)) throw DomainError("decay_fit: values must be positive");
    x.push_back(t[i]);
    y.push_back(std::log(value[i]));
  }
  if (x.size() < 2) throw DomainError("decay_fit: need at least two samples in the window");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("decay_fit: all samples at one time");
  DecayFit f;
  f.rate = sxy / sxx;
  f.intercept = my - f.rate * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.rate * x[i]);
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.points = static_cast<int>(x.size());
  return f;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need >= 2 pairs");
  std::vector<double> lx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw DomainError("loglog_slope: x must be positive");
    lx[i] = std::log(x[i]);
  }
  return decay_fit(lx, y).rate;
}

namespace {

LimitError compare_matched(const Trajectory& a, const Trajectory& ref, double b) {
  LimitError out;
  out.b = b;
  std::size_t j = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = ref.time(i);
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    while (j < a.size() && a.time(j) < t - tol) ++j;
    if (j == a.size()) break;
    if (std::abs(a.time(j) - t) > tol) continue;
    const double d = l2_norm(a.field(j) - ref.field(i));
    out.per_time.emplace_back(t, d);
    out.sup_l2 = std::max(out.sup_l2, d);
  }
  if (out.per_time.empty()) throw DomainError("limit error: the trajectories share no sample times");
  return out;
}

}  // namespace

LimitError limit_error_inviscid(const Trajectory& decm, const Trajectory& sqg) {
  if (decm.time_scale() != TimeScale::gyration)
    throw DomainError("limit_error_inviscid: expects a gyration-scale trajectory");
  return compare_matched(decm, sqg, decm.b());
}

LimitError limit_error_critical(const Trajectory& decm, double b, const Trajectory& sqg) {
  if (decm.b() != b) throw DomainError("limit_error_critical: b does not match the trajectory");
  if (decm.holds_boosted_field()) return compare_matched(decm, sqg, b);
  if (decm.source_scale() == TimeScale::laboratory) return compare_matched(boost_map(decm), sqg, b);
  throw DomainError("limit_error_critical: expects a laboratory or boosted trajectory");
}

WScaling w_scaling_report(const ScalarField& Q, std::span<const double> b_list,
                          const EosParams& base) {
  if (b_list.size() < 2) throw DomainError("w_scaling_report: need at least two values of b");
  WScaling r;
  const SpectralField Qh = forward(Q);
  for (double b : b_list) {
    EosParams p = base;
    p.b = b;
    const SpectralW w = solve_w_boosted_spectral(Qh, p);
    r.b.push_back(b);
    r.w_l2.push_back(l2_norm(w.w));
    r.w_h3.push_back(sobolev_seminorm(w.w, 3.0));
  }
  r.slope_l2 = loglog_slope(r.b, r.w_l2);
  r.slope_h3 = loglog_slope(r.b, r.w_h3);
  return r;
}

}  // namespace decm
