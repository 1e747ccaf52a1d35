#include "decm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <thread>

#include "decm/diagnostics.hpp"

namespace decm {

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::verify_suite: return "verify_suite";
    case ExperimentKind::conservation: return "conservation";
    case ExperimentKind::cross_scale: return "cross_scale";
    case ExperimentKind::w_scaling: return "w_scaling";
    case ExperimentKind::limit_critical: return "limit_critical";
    case ExperimentKind::limit_inviscid: return "limit_inviscid";
    case ExperimentKind::decay_h3: return "decay_h3";
    case ExperimentKind::eps_convergence: return "eps_convergence";
    case ExperimentKind::temporal_convergence: return "temporal_convergence";
  }
  return "verify_suite";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (ExperimentKind k :
       {ExperimentKind::verify_suite, ExperimentKind::conservation, ExperimentKind::cross_scale,
        ExperimentKind::w_scaling, ExperimentKind::limit_critical, ExperimentKind::limit_inviscid,
        ExperimentKind::decay_h3, ExperimentKind::eps_convergence,
        ExperimentKind::temporal_convergence})
    if (name == to_string(k)) return k;
  throw DomainError("unknown experiment kind '" + std::string(name) + "'");
}

std::vector<std::string> required_thresholds(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::verify_suite:
      return {"riesz_tol", "perp_tol",      "leray_tol",        "lq_tol",
              "tq_tol",    "eos_agree_tol", "eos_residual_tol", "tinv_slack"};
    case ExperimentKind::conservation: return {"mp_tol", "balance_tol", "charge_tol"};
    case ExperimentKind::cross_scale: return {"diff_tol"};
    case ExperimentKind::w_scaling: return {"slope_lo", "slope_hi", "refine_tol"};
    case ExperimentKind::limit_critical: return {"slope_lo", "slope_hi"};
    case ExperimentKind::limit_inviscid: return {};
    case ExperimentKind::decay_h3: return {"envelope_max", "rate_max"};
    case ExperimentKind::eps_convergence: return {};
    case ExperimentKind::temporal_convergence: return {"ratio_lo", "ratio_hi"};
  }
  return {};
}

namespace {

bool uses_b_list(ExperimentKind k) { return k != ExperimentKind::verify_suite; }

std::size_t min_b_count(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::w_scaling:
    case ExperimentKind::limit_critical:
    case ExperimentKind::limit_inviscid: return 2;
    case ExperimentKind::verify_suite: return 0;
    default: return 1;
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  auto bad = [this](const std::string& m) {
    throw DomainError("experiment " + std::string(to_string(kind)) + ": " + m);
  };
  Grid g(n);
  (void)g;
  if (workers < 1) bad("workers must be >= 1");
  if (!(t_end > 0.0)) bad("t_end must be > 0");
  if (!(dt > 0.0)) bad("dt must be > 0");
  if (sample_count < 2) bad("sample_count must be >= 2");
  if (trials < 1) bad("trials must be >= 1");
  eos.validate();
  for (std::size_t i = 1; i < b_list.size(); ++i)
    if (!(b_list[i] > b_list[i - 1])) bad("b_list must be strictly increasing");
  for (double b : b_list)
    if (!(b > 0.0)) bad("b_list entries must be > 0");
  if (uses_b_list(kind) && b_list.size() < min_b_count(kind))
    bad("b_list needs at least " + std::to_string(min_b_count(kind)) + " entries");
  if (kind == ExperimentKind::eps_convergence) {
    if (eps_list.size() < 2) bad("eps_list needs at least two entries");
    for (double e : eps_list)
      if (!(e > 0.0)) bad("eps_list entries must be > 0");
  }
  if (kind == ExperimentKind::temporal_convergence) {
    if (dt_list.size() < 3) bad("dt_list needs at least three entries");
    for (std::size_t i = 1; i < dt_list.size(); ++i)
      if (!(dt_list[i] < dt_list[i - 1])) bad("dt_list must be strictly decreasing");
  }
  for (const auto& name : required_thresholds(kind))
    if (!thresholds.count(name)) bad("missing threshold '" + name + "'");
}

ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.thresholds.clear();
  switch (kind) {
    case ExperimentKind::verify_suite:
      s.n = 32;
      s.trials = 20;
      s.init = {InitKind::random_band, 2.0, 1, 6};
      s.thresholds = {{"riesz_tol", 1e-12},     {"perp_tol", 1e-12},
                      {"leray_tol", 1e-12},     {"lq_tol", 1e-8},
                      {"tq_tol", 1e-8},         {"eos_agree_tol", 1e-10},
                      {"eos_residual_tol", 1e-10}, {"tinv_slack", 1e-8}};
      break;
    case ExperimentKind::conservation:
      s.n = 128;
      s.b_list = {2.0};
      s.t_end = 1.0;
      s.dt = 2.5e-3;
      s.sample_count = 401;
      s.thresholds = {{"mp_tol", 1e-6}, {"balance_tol", 1e-6}, {"charge_tol", 1e-6}};
      break;
    case ExperimentKind::cross_scale:
      s.n = 128;
      s.b_list = {4.0};
      s.init.amplitude = 1.0;
      s.t_end = 0.5;
      s.dt = 5e-3;
      s.sample_count = 51;
      s.thresholds = {{"diff_tol", 1e-6}};
      break;
    case ExperimentKind::w_scaling:
      s.n = 64;
      s.b_list = {2.0, 4.0, 8.0, 16.0};
      s.init.amplitude = 1.0;
      s.thresholds = {{"slope_lo", -6.5}, {"slope_hi", -5.5}, {"refine_tol", 0.1}};
      break;
    case ExperimentKind::limit_critical:
      s.n = 128;
      s.b_list = {4.0, 8.0, 16.0, 32.0};
      s.init.amplitude = 0.1;
      s.t_end = 1.0;
      s.dt = 5e-3;
      s.sample_count = 101;
      s.thresholds = {{"slope_lo", -1.3}, {"slope_hi", -0.8}};
      break;
    case ExperimentKind::limit_inviscid:
      s.n = 128;
      s.b_list = {10.0, 100.0, 1000.0};
      s.t_end = 1.0;
      s.dt = 5e-3;
      s.sample_count = 101;
      break;
    case ExperimentKind::decay_h3:
      s.n = 128;
      s.b_list = {16.0};
      s.init.amplitude = 0.05;
      s.t_end = 5.0;
      s.dt = 1e-2;
      s.sample_count = 101;
      s.thresholds = {{"envelope_max", 1.0}, {"rate_max", -0.25}};
      break;
    case ExperimentKind::eps_convergence:
      s.n = 128;
      s.b_list = {2.0};
      s.eps_list = {0.1, 0.05, 0.025};
      s.t_end = 0.5;
      s.dt = 2.5e-3;
      s.sample_count = 2;
      break;
    case ExperimentKind::temporal_convergence:
      s.n = 128;
      s.b_list = {2.0};
      s.dt_list = {0.04, 0.02, 0.01};
      s.t_end = 1.0;
      s.sample_count = 2;
      s.thresholds = {{"ratio_lo", 6.0}, {"ratio_hi", 10.0}};
      break;
  }
  return s;
}

// ----- worker pool --------------------------------------------------------------------------

namespace {

struct MemberOutput {
  MemberResult result;
  std::optional<Trajectory> traj;
  std::vector<NormRecord> records;
  std::optional<ScalarField> final_field;
};

using Task = std::function<MemberOutput()>;

std::vector<MemberOutput> run_tasks(std::vector<std::pair<std::string, Task>>& tasks,
                                    std::vector<double> params, int workers) {
  std::vector<MemberOutput> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i].second();
      } catch (const std::exception& e) {
        out[i] = MemberOutput{};
        out[i].result.ok = false;
        out[i].result.error = e.what();
      }
      out[i].result.label = tasks[i].first;
      out[i].result.param = params[i];
    }
  };
  const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  return out;
}

Check make_check(std::string name, double value, double lo, double hi, bool strict = false) {
  Check c{std::move(name), value, lo, hi, strict, false};
  c.pass = std::isfinite(value) && value >= lo && (strict ? value < hi : value <= hi);
  return c;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

SimConfig base_config(const ExperimentSpec& s) {
  SimConfig c;
  c.grid = Grid(s.n);
  c.eos = s.eos;
  c.dt_policy = DtPolicy::fixed_dt(s.dt);
  c.t_end = s.t_end;
  c.sample_count = s.sample_count;
  return c;
}

MemberOutput simulate(const SimConfig& c, const ScalarField& q0, bool records = false) {
  MemberOutput m;
  std::vector<NormRecord> recs;
  Observers obs;
  if (records) obs.on_sample = [&](const State& s) { recs.push_back(norm_record(s)); };
  Trajectory t = run(c, q0, obs);
  const RunMonitor& mon = t.monitor();
  m.result.values["steps"] = static_cast<double>(mon.steps);
  m.result.values["max_linf_growth"] = mon.max_linf_growth;
  m.result.values["max_l2_growth"] = mon.max_lp_growth[0];
  m.result.values["max_l4_growth"] = mon.max_lp_growth[1];
  m.result.values["max_l8_growth"] = mon.max_lp_growth[2];
  m.result.values["velocity_constant"] = mon.velocity_constant;
  m.result.values["max_eos_iterations"] = mon.max_eos_iterations;
  m.result.values["eos_fallbacks"] = static_cast<double>(mon.eos_fallbacks);
  m.result.values["max_abs_mean"] = mon.max_abs_mean;
  m.final_field = t.field(t.size() - 1);
  m.traj = std::move(t);
  m.records = std::move(recs);
  return m;
}

// Monotone check: the largest ratio of consecutive values (must stay below 1).
double max_consecutive_ratio(const std::vector<double>& v) {
  double r = -kInf;
  for (std::size_t i = 1; i < v.size(); ++i) r = std::max(r, v[i] / v[i - 1]);
  return r;
}

// ----- verify suite -------------------------------------------------------------------------

SpectralVector random_vector(const Grid& g, std::uint64_t seed, int band) {
  return {forward(random_band_field(g, seed, band)), forward(random_band_field(g, seed + 7919, band))};
}

MemberOutput verify_operators(const ExperimentSpec& s) {
  const Grid g(s.n);
  const int band = s.init.band;
  const double amp = s.init.amplitude.value_or(1.0);
  const double bs[] = {0.5, 2.0, 8.0};
  double rr = 0, perp = 0, leray = 0, lq = 0, lq_sw = 0, lq_forms = 0, tq = 0;
  for (int t = 0; t < s.trials; ++t) {
    const std::uint64_t seed = s.init.seed * 1000003ULL + 97ULL * t;
    const SpectralField f = forward(random_band_field(g, seed, band));
    const SpectralField rrf = riesz(riesz(f, 1), 1) + riesz(riesz(f, 2), 2);
    rr = std::max(rr, l2_norm(rrf + f) / l2_norm(f));
    perp = std::max(perp, max_abs(riesz_dot(riesz_perp(f))));
    const SpectralVector v = random_vector(g, seed + 1, band);
    const SpectralVector pv = leray_project(v);
    leray = std::max(leray, l2_norm(leray_project(pv) - pv) / l2_norm(pv));

    const SpectralField q = forward(random_band_field(g, seed + 2, band, amp));
    const SpectralField gf = forward(random_band_field(g, seed + 3, band));
    const LqOperator L(q);
    const SpectralField lf = L.apply(f), lg = L.apply(gf);
    const double scale = l2_norm(lf) * l2_norm(gf) + l2_norm(f) * l2_norm(lg);
    lq = std::max(lq, std::abs(inner(lf, gf) + inner(f, lg)) / scale);
    lq_sw = std::max(lq_sw, std::abs(inner(lf, gf) + inner(f, L.apply_switched(gf))) / scale);
    lq_forms = std::max(lq_forms, l2_norm(lf - L.apply_switched(f)) / std::max(l2_norm(lf), 1e-300));

    const double b = bs[t % 3];
    const SpectralVector u = leray_project_mean_free(random_vector(g, seed + 4, band));
    const double uu = inner(u, u);
    tq = std::max(tq, std::abs(inner(apply_Tq_spectral(L, u, b), u) - (1 + b * b) * uu) /
                          ((1 + b * b) * uu));
  }
  MemberOutput m;
  m.result.values = {{"riesz_rr", rr},   {"riesz_perp", perp},         {"leray_idempotence", leray},
                     {"lq_antisym", lq}, {"lq_antisym_switched", lq_sw}, {"lq_forms", lq_forms},
                     {"tq_energy", tq}};
  return m;
}

MemberOutput verify_eos(const ExperimentSpec& s) {
  const Grid g16(16);
  const double amp = s.init.amplitude.value_or(1.0);
  double agree = 0.0, residual = 0.0;
  int trial = 0;
  for (double b : {0.5, 2.0, 8.0}) {
    for (int t = 0; t < 3; ++t, ++trial) {
      const ScalarField q = random_band_field(g16, s.init.seed * 7777ULL + trial, 4, amp);
      EosParams p = s.eos;
      p.b = b;
      std::vector<ScalarField> ws;
      for (EosMethod m : {EosMethod::fixed_point, EosMethod::krylov, EosMethod::dense_oracle}) {
        p.method = m;
        ws.push_back(solve_w(q, p).w);
      }
      agree = std::max({agree, max_abs(ws[0] - ws[1]), max_abs(ws[0] - ws[2]),
                        max_abs(ws[1] - ws[2])});
      p.method = EosMethod::fixed_point;
      residual = std::max(residual, solve_eos(q, p).residual);
    }
  }
  // Closure at the suite resolution.
  const Grid g(s.n);
  EosParams p = s.eos;
  p.b = 4.0;
  const double res_n = solve_eos(random_band_field(g, s.init.seed + 31, s.init.band, 1.0), p).residual;
  MemberOutput m;
  m.result.values = {{"method_agreement", agree},
                     {"eos_residual_n16", residual},
                     {"eos_residual_n", res_n}};
  return m;
}

MemberOutput verify_tq_inverse(const ExperimentSpec& s) {
  const Grid g(s.n);
  const int band = s.init.band;
  const double amp = s.init.amplitude.value_or(1.0);
  double contraction = -kInf, lipschitz = -kInf;
  for (int t = 0; t < s.trials; ++t) {
    const std::uint64_t seed = s.init.seed * 15485863ULL + 13ULL * t;
    const double b = (t % 3 == 0) ? 0.5 : (t % 3 == 1 ? 2.0 : 8.0);
    EosParams p = s.eos;
    p.b = b;
    const ScalarField q1 = random_band_field(g, seed, band, amp);
    const ScalarField q2 = random_band_field(g, seed + 1, band, amp);
    const VectorField f = inverse(riesz_perp(forward(random_band_field(g, seed + 2, band))));
    const double fn = l2_norm(f);
    const VectorField u1 = apply_Tq_inverse(q1, f, p);
    const VectorField u2 = apply_Tq_inverse(q2, f, p);
    const double s2 = 1.0 + b * b;
    contraction = std::max(contraction, l2_norm(u1) / (fn / s2) - 1.0);
    const double bound = b / (s2 * s2) * max_abs(q1 - q2) * fn;
    lipschitz = std::max(lipschitz, l2_norm(u1 - u2) / bound - 1.0);
  }
  MemberOutput m;
  m.result.values = {{"contraction_excess", contraction}, {"lipschitz_excess", lipschitz}};
  return m;
}

// ----- report assembly per kind -------------------------------------------------------------

double value_of(const MemberOutput& m, const std::string& key) {
  if (!m.result.ok) return std::numeric_limits<double>::quiet_NaN();
  auto it = m.result.values.find(key);
  return it == m.result.values.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

double sup_difference_by_index(const Trajectory& a, const Trajectory& b, double scale_a) {
  if (a.size() != b.size()) throw DomainError("trajectories have different sample counts");
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sup = std::max(sup, l2_norm(scale_a * a.field(i) - b.field(i)));
  return sup;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.spec = spec;
  const auto& th = spec.thresholds;
  std::vector<std::pair<std::string, Task>> tasks;
  std::vector<double> params;
  auto add = [&](std::string label, double param, Task t) {
    tasks.emplace_back(std::move(label), std::move(t));
    params.push_back(param);
  };
  const Grid grid(spec.n);

  switch (spec.kind) {
    case ExperimentKind::verify_suite: {
      add("operators", spec.n, [&] { return verify_operators(spec); });
      add("eos_oracle", 16, [&] { return verify_eos(spec); });
      add("tq_inverse", spec.n, [&] { return verify_tq_inverse(spec); });
      auto out = run_tasks(tasks, params, spec.workers);
      rep.checks = {
          make_check("riesz_rr", value_of(out[0], "riesz_rr"), -kInf, th.at("riesz_tol")),
          make_check("riesz_perp", value_of(out[0], "riesz_perp"), -kInf, th.at("perp_tol")),
          make_check("leray_idempotence", value_of(out[0], "leray_idempotence"), -kInf,
                     th.at("leray_tol")),
          make_check("lq_antisym", value_of(out[0], "lq_antisym"), -kInf, th.at("lq_tol")),
          make_check("lq_antisym_switched", value_of(out[0], "lq_antisym_switched"), -kInf,
                     th.at("lq_tol")),
          make_check("tq_energy", value_of(out[0], "tq_energy"), -kInf, th.at("tq_tol")),
          make_check("method_agreement", value_of(out[1], "method_agreement"), -kInf,
                     th.at("eos_agree_tol")),
          make_check("eos_residual_n16", value_of(out[1], "eos_residual_n16"), -kInf,
                     th.at("eos_residual_tol")),
          make_check("eos_residual_n", value_of(out[1], "eos_residual_n"), -kInf,
                     th.at("eos_residual_tol")),
          make_check("contraction_excess", value_of(out[2], "contraction_excess"), -kInf,
                     th.at("tinv_slack")),
          make_check("lipschitz_excess", value_of(out[2], "lipschitz_excess"), -kInf,
                     th.at("tinv_slack")),
      };
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::conservation: {
      SimConfig c = base_config(spec);
      c.b = spec.b_list.front();
      const ScalarField q0 = make_initial(grid, spec.init);
      add("lab", c.b, [&, c] {
        MemberOutput m = simulate(c, q0, true);
        const auto res = energy_balance_residual(m.records, c);
        m.result.values["balance_rate"] = balance_rate(m.records, res);
        m.result.values["charge_residual_t0"] = charge_conservation_residual(q0, c);
        m.result.values["charge_residual_end"] = charge_conservation_residual(*m.final_field, c);
        double mean = 0.0;
        for (const auto& r : m.records) mean = std::max(mean, std::abs(r.mean));
        m.result.values["max_abs_mean"] = std::max(mean, m.result.values["max_abs_mean"]);
        return m;
      });
      auto out = run_tasks(tasks, params, spec.workers);
      const auto& o = out[0];
      const double mp = std::max({value_of(o, "max_linf_growth"), value_of(o, "max_l2_growth"),
                                  value_of(o, "max_l4_growth"), value_of(o, "max_l8_growth")});
      rep.checks = {
          make_check("mean_exact_zero", value_of(o, "max_abs_mean"), 0.0, 0.0),
          make_check("max_principle_growth", mp, -kInf, th.at("mp_tol")),
          make_check("energy_balance_rate", value_of(o, "balance_rate"), -kInf, th.at("balance_tol")),
          make_check("charge_conservation", std::max(value_of(o, "charge_residual_t0"),
                                                     value_of(o, "charge_residual_end")),
                     -kInf, th.at("charge_tol")),
      };
      rep.members.push_back(out[0].result);
      break;
    }

    case ExperimentKind::cross_scale: {
      const double b = spec.b_list.front();
      const double s2 = 1.0 + b * b;
      const ScalarField Q0 = make_initial(grid, spec.init);
      const ScalarField q0 = (1.0 / b) * Q0;
      SimConfig lab = base_config(spec);
      lab.b = b;
      lab.t_end = spec.t_end * s2;
      lab.dt_policy = DtPolicy::fixed_dt(spec.dt * s2);
      SimConfig gyr = lab;
      gyr.time_scale = TimeScale::gyration;
      gyr.t_end = spec.t_end * b;
      gyr.dt_policy = DtPolicy::fixed_dt(spec.dt * b);
      SimConfig fr = lab;
      fr.time_scale = TimeScale::friction;
      fr.boosted = true;
      fr.t_end = spec.t_end;
      fr.dt_policy = DtPolicy::fixed_dt(spec.dt);
      add("lab", b, [&, lab] { return simulate(lab, q0); });
      add("gyration", b, [&, gyr] { return simulate(gyr, q0); });
      add("friction_boosted", b, [&, fr] { return simulate(fr, Q0); });
      auto out = run_tasks(tasks, params, spec.workers);
      double lab_fr = kInf, gyr_lab = kInf;
      if (out[0].result.ok && out[2].result.ok)
        lab_fr = limit_error_critical(*out[0].traj, b, *out[2].traj).sup_l2;
      if (out[0].result.ok && out[1].result.ok)
        gyr_lab = b * sup_difference_by_index(*out[1].traj, *out[0].traj, 1.0);
      rep.fits = {{"sup_l2_lab_vs_friction", lab_fr}, {"sup_l2_gyration_vs_lab", gyr_lab}};
      rep.checks = {make_check("lab_vs_friction_boosted", lab_fr, -kInf, th.at("diff_tol")),
                    make_check("gyration_vs_lab", gyr_lab, -kInf, th.at("diff_tol"))};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::w_scaling: {
      for (int n : {spec.n, 2 * spec.n}) {
        add("n=" + std::to_string(n), n, [&, n] {
          const ScalarField Q = make_initial(Grid(n), spec.init);
          const WScaling w = w_scaling_report(Q, spec.b_list, spec.eos);
          MemberOutput m;
          m.result.values["slope_l2"] = w.slope_l2;
          m.result.values["slope_h3"] = w.slope_h3;
          for (std::size_t i = 0; i < w.b.size(); ++i) {
            m.result.values["w_l2_b" + std::to_string(static_cast<int>(w.b[i]))] = w.w_l2[i];
            m.result.values["w_h3_b" + std::to_string(static_cast<int>(w.b[i]))] = w.w_h3[i];
          }
          return m;
        });
      }
      auto out = run_tasks(tasks, params, spec.workers);
      const double lo = th.at("slope_lo"), hi = th.at("slope_hi");
      for (std::size_t i = 0; i < out.size(); ++i) {
        const std::string tag = out[i].result.label;
        rep.checks.push_back(make_check("slope_l2 " + tag, value_of(out[i], "slope_l2"), lo, hi));
        rep.checks.push_back(make_check("slope_h3 " + tag, value_of(out[i], "slope_h3"), lo, hi));
      }
      const double d = std::max(std::abs(value_of(out[0], "slope_l2") - value_of(out[1], "slope_l2")),
                                std::abs(value_of(out[0], "slope_h3") - value_of(out[1], "slope_h3")));
      rep.checks.push_back(make_check("refinement_stability", d, -kInf, th.at("refine_tol")));
      rep.fits = {{"slope_l2", value_of(out[0], "slope_l2")},
                  {"slope_h3", value_of(out[0], "slope_h3")},
                  {"slope_l2_refined", value_of(out[1], "slope_l2")},
                  {"slope_h3_refined", value_of(out[1], "slope_h3")}};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::limit_critical: {
      const ScalarField Q0 = make_initial(grid, spec.init);
      SimConfig sqg = base_config(spec);
      sqg.model = Model::critical_sqg;
      add("critical_sqg", 0.0, [&, sqg] { return simulate(sqg, Q0); });
      for (double b : spec.b_list) {
        const double s2 = 1.0 + b * b;
        SimConfig lab = base_config(spec);
        lab.b = b;
        lab.t_end = spec.t_end * s2;
        lab.dt_policy = DtPolicy::fixed_dt(spec.dt * s2);
        add("decm_lab", b, [&, lab, b] { return simulate(lab, (1.0 / b) * Q0); });
      }
      auto out = run_tasks(tasks, params, spec.workers);
      std::vector<double> x, err;
      for (std::size_t i = 1; i < out.size(); ++i) {
        const double b = params[i];
        double e = std::numeric_limits<double>::quiet_NaN();
        if (out[0].result.ok && out[i].result.ok)
          e = limit_error_critical(*out[i].traj, b, *out[0].traj).sup_l2;
        out[i].result.values["sup_l2_error"] = e;
        x.push_back(1.0 + b * b);
        err.push_back(e);
      }
      double slope = std::numeric_limits<double>::quiet_NaN();
      try {
        slope = loglog_slope(x, err);
      } catch (const DomainError&) {
      }
      rep.fits = {{"slope_vs_1_plus_b2", slope}};
      rep.checks = {make_check("rate_slope", slope, th.at("slope_lo"), th.at("slope_hi")),
                    make_check("strictly_decreasing", max_consecutive_ratio(err), -kInf, 1.0, true)};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::limit_inviscid: {
      const ScalarField q0 = make_initial(grid, spec.init);
      SimConfig sqg = base_config(spec);
      sqg.model = Model::inviscid_sqg;
      add("inviscid_sqg", 0.0, [&, sqg] { return simulate(sqg, q0); });
      for (double b : spec.b_list) {
        SimConfig gyr = base_config(spec);
        gyr.b = b;
        gyr.time_scale = TimeScale::gyration;
        add("decm_gyration", b, [&, gyr] { return simulate(gyr, q0); });
      }
      auto out = run_tasks(tasks, params, spec.workers);
      std::vector<double> err;
      for (std::size_t i = 1; i < out.size(); ++i) {
        double e = std::numeric_limits<double>::quiet_NaN();
        if (out[0].result.ok && out[i].result.ok)
          e = limit_error_inviscid(*out[i].traj, *out[0].traj).sup_l2;
        out[i].result.values["sup_l2_error"] = e;
        err.push_back(e);
      }
      rep.checks = {make_check("strictly_decreasing", max_consecutive_ratio(err), -kInf, 1.0, true)};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::decay_h3: {
      SimConfig fr = base_config(spec);
      fr.b = spec.b_list.front();
      fr.time_scale = TimeScale::friction;
      fr.boosted = true;
      const ScalarField Q0 = make_initial(grid, spec.init);
      add("friction_boosted", fr.b, [&, fr] {
        MemberOutput m = simulate(fr, Q0, true);
        std::vector<double> t, h3;
        double env = 0.0;
        for (const auto& r : m.records) {
          t.push_back(r.t);
          h3.push_back(r.h3);
          env = std::max(env, r.h3 / (m.records.front().h3 * std::exp(-r.t / 4.0)));
        }
        const DecayFit f = decay_fit(t, h3);
        m.result.values["envelope_ratio"] = env;
        m.result.values["fitted_rate"] = f.rate;
        m.result.values["fit_r2"] = f.r2;
        return m;
      });
      auto out = run_tasks(tasks, params, spec.workers);
      rep.fits = {{"fitted_rate", value_of(out[0], "fitted_rate")}};
      rep.checks = {make_check("h3_envelope", value_of(out[0], "envelope_ratio"), -kInf,
                               th.at("envelope_max")),
                    make_check("fitted_rate", value_of(out[0], "fitted_rate"), -kInf, th.at("rate_max"))};
      rep.members.push_back(out[0].result);
      break;
    }

    case ExperimentKind::eps_convergence: {
      SimConfig c = base_config(spec);
      c.b = spec.b_list.front();
      const ScalarField q0 = make_initial(grid, spec.init);
      add("eps=0", 0.0, [&, c] { return simulate(c, q0); });
      std::vector<double> eps = spec.eps_list;
      std::sort(eps.begin(), eps.end(), std::greater<>());
      for (double e : eps) {
        SimConfig ce = c;
        ce.eps = e;
        add("eps", e, [&, ce] { return simulate(ce, inverse(mollify(forward(q0), ce.eps))); });
      }
      auto out = run_tasks(tasks, params, spec.workers);
      std::vector<double> err;
      for (std::size_t i = 1; i < out.size(); ++i) {
        double d = std::numeric_limits<double>::quiet_NaN();
        if (out[0].result.ok && out[i].result.ok) d = l2_norm(*out[i].final_field - *out[0].final_field);
        out[i].result.values["l2_error_t_end"] = d;
        err.push_back(d);
      }
      rep.checks = {make_check("strictly_decreasing", max_consecutive_ratio(err), -kInf, 1.0, true)};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }

    case ExperimentKind::temporal_convergence: {
      SimConfig c = base_config(spec);
      c.b = spec.b_list.front();
      const ScalarField q0 = make_initial(grid, spec.init);
      for (double dt : spec.dt_list) {
        SimConfig cd = c;
        cd.dt_policy = DtPolicy::fixed_dt(dt);
        add("dt", dt, [&, cd] { return simulate(cd, q0); });
      }
      auto out = run_tasks(tasks, params, spec.workers);
      std::vector<double> diffs;
      for (std::size_t i = 1; i < out.size(); ++i) {
        double d = std::numeric_limits<double>::quiet_NaN();
        if (out[i - 1].result.ok && out[i].result.ok)
          d = l2_norm(*out[i - 1].final_field - *out[i].final_field);
        diffs.push_back(d);
        rep.fits["diff_" + std::to_string(i)] = d;
      }
      double rmin = kInf, rmax = -kInf;
      for (std::size_t i = 1; i < diffs.size(); ++i) {
        const double r = diffs[i - 1] / diffs[i];
        rep.fits["ratio_" + std::to_string(i)] = r;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
      if (!std::isfinite(rmin) || !std::isfinite(rmax)) rmin = rmax = std::numeric_limits<double>::quiet_NaN();
      rep.checks = {make_check("min_ratio", rmin, th.at("ratio_lo"), th.at("ratio_hi")),
                    make_check("max_ratio", rmax, th.at("ratio_lo"), th.at("ratio_hi"))};
      for (auto& o : out) rep.members.push_back(std::move(o.result));
      break;
    }
  }

  rep.pass = !rep.checks.empty();
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  for (const auto& m : rep.members) rep.pass = rep.pass && m.ok;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

double bisect_decay_amplitude(const ExperimentSpec& spec, double lo, double hi, double rel_width) {
  if (spec.kind != ExperimentKind::decay_h3) throw DomainError("bisect_decay_amplitude: needs a decay_h3 spec");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("bisect_decay_amplitude: need 0 < lo < hi");
  auto passes = [&](double a) {
    ExperimentSpec s = spec;
    s.init.amplitude = a;
    s.thresholds["rate_max"] = kInf;  // only the envelope decides here
    const ExperimentReport r = run_experiment(s);
    for (const auto& c : r.checks)
      if (c.name == "h3_envelope") return c.pass && r.members.front().ok;
    return false;
  };
  if (!passes(lo)) return lo;
  if (passes(hi)) return hi;
  while ((hi - lo) > rel_width * lo) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace decm
