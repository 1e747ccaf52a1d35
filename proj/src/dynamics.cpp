#include "decm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "decm/kernels.hpp"

namespace decm {

std::string_view to_string(TimeScale s) noexcept {
  switch (s) {
    case TimeScale::laboratory: return "lab";
    case TimeScale::gyration: return "gyration";
    case TimeScale::friction: return "friction";
  }
  return "lab";
}

std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::decm: return "decm";
    case Model::inviscid_sqg: return "inviscid_sqg";
    case Model::critical_sqg: return "critical_sqg";
  }
  return "decm";
}

TimeScale parse_time_scale(std::string_view name) {
  if (name == "lab" || name == "laboratory") return TimeScale::laboratory;
  if (name == "gyration") return TimeScale::gyration;
  if (name == "friction") return TimeScale::friction;
  throw DomainError("unknown time scale '" + std::string(name) +
                    "' (expected lab, gyration or friction)");
}

Model parse_model(std::string_view name) {
  if (name == "decm") return Model::decm;
  if (name == "inviscid_sqg") return Model::inviscid_sqg;
  if (name == "critical_sqg") return Model::critical_sqg;
  throw DomainError("unknown model '" + std::string(name) +
                    "' (expected decm, inviscid_sqg or critical_sqg)");
}

double time_factor(TimeScale s, double b) {
  switch (s) {
    case TimeScale::laboratory: return 1.0;
    case TimeScale::gyration: return b / (1.0 + b * b);
    case TimeScale::friction: return 1.0 / (1.0 + b * b);
  }
  return 1.0;
}

void SimConfig::validate() const {
  auto bad = [](const std::string& m) { throw DomainError("config: " + m); };
  if (!std::isfinite(b) || b < 0.0) bad("b must be finite and >= 0");
  if (!std::isfinite(eps) || eps < 0.0) bad("eps must be finite and >= 0");
  if (!std::isfinite(t_end) || !(t_end > 0.0)) bad("t_end must be finite and > 0");
  if (sample_count < 1) bad("sample_count must be >= 1");
  if (dt_policy.kind == DtPolicy::Kind::fixed && !(dt_policy.value > 0.0))
    bad("dt must be > 0");
  if (dt_policy.kind == DtPolicy::Kind::cfl && !(dt_policy.value > 0.0 && dt_policy.value <= 1.0))
    bad("cfl safety factor must lie in (0, 1]");
  if (boosted && time_scale != TimeScale::friction) bad("boosted requires the friction time scale");
  if (model == Model::decm) {
    if (boosted && b == 0.0) bad("boosted requires b > 0");
    if (time_scale == TimeScale::gyration && b == 0.0)
      bad("the gyration time scale is undefined for b = 0");
    if (eps > 0.0 && time_scale != TimeScale::laboratory)
      bad("eps > 0 is supported in the laboratory time scale only");
  } else {
    if (boosted) bad("boosted applies to the decm model only");
    if (eps > 0.0) bad("eps applies to the decm model only");
  }
  eos_params().validate();
}

State make_state(const SimConfig& config, const ScalarField& q0, double t0) {
  require_same_grid(config.grid, q0.grid(), "make_state");
  SpectralField spec = remove_mean(forward(q0));
  ScalarField field = inverse(spec);
  return State{t0, std::move(field), std::move(spec), 0};
}

// ----- nonlinear terms ----------------------------------------------------------------------

namespace {

struct Advection {
  SpectralField n;
  double vmax = 0.0;
};

// −D(V·∇q) with V = R^⊥ψ.
Advection advect(const SpectralField& psi, const SpectralField& q) {
  const SpectralVector vel = riesz_perp(dealias(psi));
  const SpectralVector grad = gradient(dealias(q));
  const VectorField v = inverse(vel);
  const VectorField g = inverse(grad);
  const std::size_t m = v.x.values().size();
  ScalarField prod(q.grid());
  double vmax2 = 0.0;
  const double* vx = v.x.data();
  const double* vy = v.y.data();
  const double* gx = g.x.data();
  const double* gy = g.y.data();
  double* p = prod.data();
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = -(vx[i] * gx[i] + vy[i] * gy[i]);
    vmax2 = std::max(vmax2, vx[i] * vx[i] + vy[i] * vy[i]);
  }
  Advection a{dealias(forward(prod)), std::sqrt(vmax2)};
  a.n.at(0, 0) = 0.0;
  return a;
}

AlignedVector<double> linear_rate(const SimConfig& c) {
  const auto w = waves(c.grid);
  AlignedVector<double> r(w->kmag.size(), 0.0);
  double coef = 0.0;
  if (c.model == Model::critical_sqg) {
    coef = 1.0;
  } else if (c.model == Model::decm) {
    switch (c.time_scale) {
      case TimeScale::laboratory: coef = 1.0 / (1.0 + c.b * c.b); break;
      case TimeScale::gyration: coef = 1.0 / c.b; break;
      case TimeScale::friction: coef = 1.0; break;
    }
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = coef * w->kmag[i] + c.eps * w->kmag2[i];
  return r;
}

struct Nonlinear {
  SpectralField n;
  SpectralField w;  // auxiliary solution (for warm starts); empty grid-sized zero otherwise
  double vmax = 0.0;
  double u_l2 = 0.0;
  int iterations = 0;
  int fallbacks = 0;
};

template <class Solve>
auto with_fallback(EosParams p, Solve&& solve, int& fallbacks) {
  try {
    return solve(p);
  } catch (const ConvergenceError&) {
    if (p.method != EosMethod::fixed_point) throw;
    ++fallbacks;
    p.method = EosMethod::krylov;
    return solve(p);
  }
}

Nonlinear evaluate(const SpectralField& q, const SimConfig& c, const SpectralField* guess,
                   double tol_scale) {
  Nonlinear out{SpectralField(q.grid()), SpectralField(q.grid())};
  if (!c.nonlinear_enabled) return out;
  if (c.model != Model::decm) {
    Advection a = advect(q, q);
    out.n = std::move(a.n);
    out.vmax = a.vmax;
    out.u_l2 = l2_norm(riesz_perp(q));
    return out;
  }
  const double b = c.b;
  const double s = 1.0 + b * b;
  const double alpha = b / s;
  const EosParams params = c.eos_params();
  SpectralField psi(q.grid());
  SpectralVector u{SpectralField(q.grid()), SpectralField(q.grid())};

  if (c.boosted) {
    SpectralW ws = with_fallback(
        params, [&](const EosParams& p) { return solve_w_boosted_spectral(q, p, guess, tol_scale); },
        out.fallbacks);
    out.iterations = ws.iterations;
    psi = combine(1.0 + 1.0 / s, q, 1.0, ws.w);
    u = riesz_perp(combine(1.0, ws.w, 1.0 / s, q));
    out.w = std::move(ws.w);
  } else {
    const SpectralField qe = mollify(q, c.eps);
    SpectralEos e = with_fallback(
        params,
        [&](const EosParams& p) { return solve_eos_spectral(qe, p, guess, false, tol_scale); },
        out.fallbacks);
    out.iterations = e.iterations;
    switch (c.time_scale) {
      case TimeScale::laboratory:
        psi = mollify(combine(1.0 / s, e.v, alpha, q), c.eps);
        u = riesz_perp(mollify(e.v, c.eps));
        break;
      case TimeScale::gyration:
        psi = combine(1.0, q, 1.0 / b, e.v);
        u = std::move(e.u);
        break;
      case TimeScale::friction:
        psi = combine(b, q, 1.0, e.v);
        u = std::move(e.u);
        break;
    }
    out.w = std::move(e.w);
  }
  Advection a = advect(psi, q);
  out.n = std::move(a.n);
  out.vmax = a.vmax;
  out.u_l2 = l2_norm(u);
  return out;
}

ScalarField evaluate_rhs(const ScalarField& q, const SimConfig& c) {
  c.validate();
  require_same_grid(c.grid, q.grid(), "rhs");
  const SpectralField qh = remove_mean(forward(q));
  Nonlinear nl = evaluate(qh, c, nullptr, 1.0);
  const auto rate = linear_rate(c);
  SpectralField out = std::move(nl.n);
  auto o = out.coeffs();
  const auto in = qh.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= rate[i] * in[i];
  return inverse(out);
}

SimConfig with_scale(SimConfig c, TimeScale s, bool boosted, double eps) {
  c.model = Model::decm;
  c.time_scale = s;
  c.boosted = boosted;
  c.eps = eps;
  return c;
}

SimConfig sqg_config(const Grid& g, Model m) {
  SimConfig c;
  c.grid = g;
  c.model = m;
  return c;
}

}  // namespace

ScalarField rhs_lab(const ScalarField& q, const SimConfig& config) {
  return evaluate_rhs(q, with_scale(config, TimeScale::laboratory, false, 0.0));
}

ScalarField rhs_gyration(const ScalarField& q, const SimConfig& config) {
  return evaluate_rhs(q, with_scale(config, TimeScale::gyration, false, 0.0));
}

ScalarField rhs_friction(const ScalarField& q, const SimConfig& config) {
  return evaluate_rhs(q, with_scale(config, TimeScale::friction, false, 0.0));
}

ScalarField rhs_friction_boosted(const ScalarField& Q, const SimConfig& config) {
  return evaluate_rhs(Q, with_scale(config, TimeScale::friction, true, 0.0));
}

ScalarField rhs_epsilon(const ScalarField& qe, const SimConfig& config) {
  return evaluate_rhs(qe, with_scale(config, TimeScale::laboratory, false, config.eps));
}

ScalarField rhs_inviscid_sqg(const ScalarField& q) {
  return evaluate_rhs(q, sqg_config(q.grid(), Model::inviscid_sqg));
}

ScalarField rhs_critical_sqg(const ScalarField& q) {
  return evaluate_rhs(q, sqg_config(q.grid(), Model::critical_sqg));
}

ScalarField rhs(const ScalarField& q, const SimConfig& config) { return evaluate_rhs(q, config); }

// ----- stepper ------------------------------------------------------------------------------

Stepper::Stepper(SimConfig config)
    : config_(std::move(config)), guess_(config_.grid) {
  config_.validate();
  rate_ = linear_rate(config_);
}

Stepper::Eval Stepper::nonlinear(const SpectralField& q, double dt_hint) {
  const double tol = config_.eos.tol;
  const double tol_scale = std::clamp(dt_hint * dt_hint * dt_hint / tol, 1e-6, 1.0);
  Nonlinear nl = evaluate(q, config_, have_guess_ ? &guess_ : nullptr, tol_scale);
  if (config_.model == Model::decm && config_.nonlinear_enabled) {
    guess_ = std::move(nl.w);
    have_guess_ = true;
  }
  return {std::move(nl.n), nl.vmax, nl.u_l2, nl.iterations, nl.fallbacks};
}

StepInfo Stepper::advance(State& s, double max_dt) {
  if (!(max_dt > 0.0)) throw DomainError("advance: max_dt must be > 0");
  const bool cfl = config_.dt_policy.kind == DtPolicy::Kind::cfl;
  const double hint = cfl ? config_.grid.dx() : config_.dt_policy.value;
  Eval first = nonlinear(s.spectral, hint);
  if (!std::isfinite(first.vmax))
    throw SimulationAbort("non-finite velocity at t = " + std::to_string(s.t), s.t, s.step_count,
                          first.vmax);
  double dt = config_.dt_policy.value;
  if (cfl) dt = config_.dt_policy.value * config_.grid.dx() / std::max(1.0, first.vmax);
  dt = std::min(dt, max_dt);
  return finish(s, s.spectral, std::move(first), dt);
}

StepInfo Stepper::advance_exact(State& s, double dt) {
  if (!(dt > 0.0)) throw DomainError("advance_exact: dt must be > 0");
  Eval first = nonlinear(s.spectral, dt);
  return finish(s, s.spectral, std::move(first), dt);
}

StepInfo Stepper::finish(State& s, const SpectralField& q0, Eval e1, double dt) {
  const std::size_t m = rate_.size();
  AlignedVector<double> ef(m), eh(m), emh(m);
  for (std::size_t i = 0; i < m; ++i) {
    ef[i] = std::exp(-rate_[i] * dt);
    eh[i] = std::exp(-rate_[i] * dt * 0.5);
    emh[i] = std::exp(rate_[i] * dt * 0.5);
  }
  const auto& kt = kernels::active();
  auto scaled = [&](SpectralField f, const AlignedVector<double>& mult) {
    kt.scale_real(f.data(), mult.data(), m);
    return f;
  };

  StepInfo info;
  info.dt = dt;
  info.vmax = e1.vmax;
  info.u_l2 = e1.u_l2;
  info.eos_iterations = e1.iterations;
  info.eos_fallbacks = e1.fallbacks;

  const SpectralField u1 = scaled(combine(1.0, q0, dt, e1.n), ef);
  Eval e2 = nonlinear(u1, dt);
  const SpectralField u2 = combine(0.75, scaled(q0, eh), 0.25, scaled(combine(1.0, u1, dt, e2.n), emh));
  Eval e3 = nonlinear(u2, dt);
  SpectralField next = combine(1.0 / 3.0, scaled(q0, ef), 2.0 / 3.0,
                               scaled(combine(1.0, u2, dt, e3.n), eh));
  info.eos_iterations += e2.iterations + e3.iterations;
  info.eos_fallbacks += e2.fallbacks + e3.fallbacks;

  next.at(0, 0) = 0.0;
  ScalarField field = inverse(next);
  if (!field.all_finite()) {
    const double norm = l2_norm(next);
    throw SimulationAbort("state became non-finite at t = " + std::to_string(s.t + dt) +
                              " (step " + std::to_string(s.step_count + 1) + ")",
                          s.t + dt, s.step_count + 1, norm);
  }
  s.spectral = std::move(next);
  s.field = std::move(field);
  s.t += dt;
  ++s.step_count;
  return info;
}

State step(const State& s, const SimConfig& config) {
  Stepper st(config);
  State out = s;
  st.advance(out, std::numeric_limits<double>::infinity());
  return out;
}

// ----- trajectories -------------------------------------------------------------------------

void Trajectory::append(double t, ScalarField field) {
  if (!fields_.empty()) require_same_grid(fields_.front().grid(), field.grid(), "Trajectory");
  if (!times_.empty() && !(t > times_.back()))
    throw DomainError("Trajectory: sample times must increase");
  times_.push_back(t);
  fields_.push_back(std::move(field));
}

double Trajectory::time(std::size_t i) const {
  const double t = times_.at(i);
  if (boosted_ && scale_ == TimeScale::laboratory) return t / (1.0 + b_ * b_);
  return t;
}

ScalarField Trajectory::field(std::size_t i) const {
  ScalarField f = fields_.at(i);
  if (boosted_) f *= b_;
  return f;
}

const Grid& Trajectory::grid() const {
  if (fields_.empty()) throw DomainError("Trajectory: empty");
  return fields_.front().grid();
}

Trajectory boost_map(const Trajectory& traj) {
  if (traj.boosted_ || traj.boosted_run_)
    throw DomainError("boost_map: trajectory is already boosted");
  if (traj.model_ != Model::decm) throw DomainError("boost_map: only decm trajectories");
  if (traj.scale_ == TimeScale::gyration)
    throw DomainError("boost_map: expects a laboratory or friction trajectory");
  if (!(traj.b_ > 0.0)) throw DomainError("boost_map: b must be > 0");
  Trajectory out = traj;
  out.boosted_ = true;
  return out;
}

Trajectory unboost_map(const Trajectory& traj) {
  if (!traj.boosted_) throw DomainError("unboost_map: trajectory is not boosted");
  Trajectory out = traj;
  out.boosted_ = false;
  return out;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  if (a.scale_ != b.scale_ || a.model_ != b.model_ || a.b_ != b.b_ || a.boosted_ != b.boosted_ ||
      a.boosted_run_ != b.boosted_run_ ||
      a.times_ != b.times_ || a.fields_.size() != b.fields_.size())
    return false;
  for (std::size_t i = 0; i < a.fields_.size(); ++i) {
    const auto x = a.fields_[i].values();
    const auto y = b.fields_[i].values();
    if (!(a.fields_[i].grid() == b.fields_[i].grid()) || !std::equal(x.begin(), x.end(), y.begin()))
      return false;
  }
  return true;
}

// ----- runs ---------------------------------------------------------------------------------

std::vector<double> sample_times(double t_end, int count) {
  if (count < 1) throw DomainError("sample_times: count must be >= 1");
  if (count == 1) return {t_end};
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = t_end * i / (count - 1);
  t.back() = t_end;
  return t;
}

namespace {

struct Norms {
  double linf, l2, l4, l8;
};

Norms norms_of(const ScalarField& f) {
  const auto& k = kernels::active();
  const std::size_t m = f.values().size();
  const double area = f.grid().dx() * f.grid().dx();
  return {k.max_abs(f.data(), m), std::sqrt(k.sum_sq(f.data(), m) * area),
          std::pow(k.sum_pow4(f.data(), m) * area, 0.25),
          std::pow(k.sum_pow8(f.data(), m) * area, 0.125)};
}

double growth(double after, double before) { return before > 0.0 ? after / before - 1.0 : 0.0; }

}  // namespace

Trajectory run(const SimConfig& config, const ScalarField& q0, const Observers& observers) {
  config.validate();
  Stepper stepper(config);
  State s = make_state(config, q0);
  Trajectory traj(config.time_scale, config.model, config.b, config.boosted);
  RunMonitor& mon = traj.monitor();
  mon.min_dt = std::numeric_limits<double>::infinity();

  const std::vector<double> times = sample_times(config.t_end, config.sample_count);
  auto record = [&] {
    if (observers.on_sample) observers.on_sample(s);
    traj.append(s.t, s.field);
  };
  std::size_t next = 0;
  if (times.front() == 0.0) {
    record();
    next = 1;
  }
  Norms before = norms_of(s.field);
  auto on_step = [&](const StepInfo& info) {
    const Norms after = norms_of(s.field);
    ++mon.steps;
    mon.max_linf_growth = std::max(mon.max_linf_growth, growth(after.linf, before.linf));
    mon.max_lp_growth[0] = std::max(mon.max_lp_growth[0], growth(after.l2, before.l2));
    mon.max_lp_growth[1] = std::max(mon.max_lp_growth[1], growth(after.l4, before.l4));
    mon.max_lp_growth[2] = std::max(mon.max_lp_growth[2], growth(after.l8, before.l8));
    if (before.l2 > 0.0)
      mon.velocity_constant =
          std::max(mon.velocity_constant, info.u_l2 / ((before.linf + 1.0) * before.l2));
    mon.min_dt = std::min(mon.min_dt, info.dt);
    mon.max_dt = std::max(mon.max_dt, info.dt);
    mon.max_eos_iterations = std::max(mon.max_eos_iterations, info.eos_iterations);
    mon.eos_fallbacks += info.eos_fallbacks;
    mon.max_abs_mean = std::max(mon.max_abs_mean, std::abs(s.spectral.mean()));
    before = after;
    if (observers.on_step) observers.on_step(s, info);
  };

  const bool fixed = config.dt_policy.kind == DtPolicy::Kind::fixed;
  for (; next < times.size(); ++next) {
    const double target = times[next];
    if (fixed) {
      const double span = target - s.t;
      const long m = std::max(1L, static_cast<long>(std::ceil(span / config.dt_policy.value - 1e-9)));
      const double h = span / static_cast<double>(m);
      for (long i = 0; i < m; ++i) {
        const StepInfo info = stepper.advance_exact(s, h);
        if (i + 1 == m) s.t = target;
        on_step(info);
      }
    } else {
      while (s.t < target) {
        const double remaining = target - s.t;
        const StepInfo info = stepper.advance(s, remaining);
        if (info.dt >= remaining || target - s.t <= 1e-12 * std::max(1.0, target)) s.t = target;
        on_step(info);
      }
    }
    record();
  }
  if (mon.steps == 0) mon.min_dt = 0.0;
  return traj;
}

}  // namespace decm
