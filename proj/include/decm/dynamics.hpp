#pragma once

// Time evolution of the charge density.
//
// Laboratory scale:   ∂_t q + (B/(1+B²)) R^⊥q·∇q + (1/(1+B²)) (u[q]·∇q + Λq) = 0
// Gyration scale:     ∂_t q + R^⊥q·∇q + (1/B) (u[q]·∇q + Λq) = 0,        t₁ = (B/(1+B²)) t
// Friction scale:     ∂_t q + (B R^⊥q + u[q])·∇q + Λq = 0,                t₂ = t/(1+B²)
// Friction, boosted:  ∂_t Q + R^⊥V·∇Q + ΛQ = 0,  V = (1 + 1/(1+B²)) Q + W[Q],  Q = Bq
//
// With eps > 0 (laboratory scale only) the regularized system is evolved instead: the
// velocity is J_ε u[J_ε q], the rotation term uses J_ε R^⊥q, and εΔq is added.
//
// Every model is written as ∂_t q = N(q) − 𝓛 q with 𝓛 diagonal in Fourier space and N a
// dealiased advection −V·∇q by a divergence-free velocity V. The stepper is the
// integrating-factor form of the three-stage strong-stability-preserving Runge-Kutta scheme.

#include <array>
#include <functional>
#include <string_view>
#include <vector>

#include "decm/eos.hpp"
#include "decm/spectral.hpp"

namespace decm {

enum class TimeScale { laboratory, gyration, friction };
enum class Model { decm, inviscid_sqg, critical_sqg };

std::string_view to_string(TimeScale s) noexcept;
std::string_view to_string(Model m) noexcept;
/// Accepts lab|laboratory, gyration, friction.
TimeScale parse_time_scale(std::string_view name);
/// Accepts decm, inviscid_sqg, critical_sqg.
Model parse_model(std::string_view name);

/// Factor converting a laboratory-time interval into the given scale.
double time_factor(TimeScale s, double b);

struct DtPolicy {
  enum class Kind { fixed, cfl };
  Kind kind = Kind::fixed;
  double value = 1e-3;  // dt for fixed, safety factor for cfl

  static DtPolicy fixed_dt(double dt) { return {Kind::fixed, dt}; }
  static DtPolicy cfl(double safety) { return {Kind::cfl, safety}; }
};

struct SimConfig {
  Grid grid{64};
  double b = 0.0;
  double eps = 0.0;
  TimeScale time_scale = TimeScale::laboratory;
  bool boosted = false;
  Model model = Model::decm;
  DtPolicy dt_policy;
  double t_end = 1.0;
  bool nonlinear_enabled = true;
  EosParams eos;       // eos.b is overwritten with b
  int sample_count = 101;

  /// Throws DomainError on inconsistent settings.
  void validate() const;
  EosParams eos_params() const {
    EosParams p = eos;
    p.b = b;
    return p;
  }
};

struct State {
  double t = 0.0;
  ScalarField field;
  SpectralField spectral;
  long step_count = 0;
};

/// Validates q0 (finite, grid) and removes any mean it carries.
State make_state(const SimConfig& config, const ScalarField& q0, double t0 = 0.0);

// ----- right-hand sides ---------------------------------------------------------------------

ScalarField rhs_lab(const ScalarField& q, const SimConfig& config);
ScalarField rhs_gyration(const ScalarField& q, const SimConfig& config);
/// Unboosted friction scale.
ScalarField rhs_friction(const ScalarField& q, const SimConfig& config);
ScalarField rhs_friction_boosted(const ScalarField& Q, const SimConfig& config);
ScalarField rhs_epsilon(const ScalarField& qe, const SimConfig& config);
ScalarField rhs_inviscid_sqg(const ScalarField& q);
ScalarField rhs_critical_sqg(const ScalarField& q);
/// Right-hand side of whatever `config` describes.
ScalarField rhs(const ScalarField& q, const SimConfig& config);

// ----- stepping -----------------------------------------------------------------------------

struct StepInfo {
  double dt = 0.0;
  double vmax = 0.0;        // grid max of the advecting velocity at the start of the step
  double u_l2 = 0.0;        // ‖u‖ of the equation-of-state velocity at the start of the step
  int eos_iterations = 0;   // summed over stages
  int eos_fallbacks = 0;    // stages where fixed-point failed and Krylov took over
};

/// Stateful integrator. Holds the multiplier tables and the last auxiliary solution
/// (used as the initial guess of the next solve).
class Stepper {
public:
  explicit Stepper(SimConfig config);

  const SimConfig& config() const noexcept { return config_; }

  /// Advances by at most `max_dt` (CFL policy) or exactly `max_dt` (fixed policy, where
  /// max_dt must not exceed the configured dt by more than rounding).
  StepInfo advance(State& s, double max_dt);
  /// Advances by exactly dt regardless of policy.
  StepInfo advance_exact(State& s, double dt);

private:
  struct Eval {
    SpectralField n;
    double vmax = 0.0;
    double u_l2 = 0.0;
    int iterations = 0;
    int fallbacks = 0;
  };
  Eval nonlinear(const SpectralField& q, double dt_hint);
  StepInfo finish(State& s, const SpectralField& q, Eval first, double dt);

  SimConfig config_;
  AlignedVector<double> rate_;
  SpectralField guess_;
  bool have_guess_ = false;
};

/// One step with the configured policy (CFL or fixed dt).
State step(const State& s, const SimConfig& config);

// ----- runs ---------------------------------------------------------------------------------

/// Per-run checks accumulated step by step.
struct RunMonitor {
  long steps = 0;
  double max_linf_growth = 0.0;           // max over steps of ‖q_{n+1}‖_∞/‖q_n‖_∞ − 1
  std::array<double, 3> max_lp_growth{};  // p = 2, 4, 8
  double velocity_constant = 0.0;         // max of ‖u‖/((‖q‖_∞+1)‖q‖)
  double min_dt = 0.0;
  double max_dt = 0.0;
  int max_eos_iterations = 0;
  long eos_fallbacks = 0;
  double max_abs_mean = 0.0;              // largest |zero mode| seen (expected exactly 0)

  bool max_principle_ok(double rel_tol = 1e-6) const {
    if (max_linf_growth > rel_tol) return false;
    for (double g : max_lp_growth)
      if (g > rel_tol) return false;
    return true;
  }
};

class Trajectory {
public:
  /// `boosted_run` marks trajectories whose stored field is already Q = Bq.
  Trajectory(TimeScale scale, Model model, double b, bool boosted_run = false)
      : scale_(scale), model_(model), b_(b), boosted_run_(boosted_run) {}

  void append(double t, ScalarField field);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  /// Sample time in this trajectory's own scale.
  double time(std::size_t i) const;
  /// Sample field (Bq when boosted).
  ScalarField field(std::size_t i) const;
  const Grid& grid() const;

  TimeScale time_scale() const noexcept { return boosted_ ? TimeScale::friction : scale_; }
  TimeScale source_scale() const noexcept { return scale_; }
  Model model() const noexcept { return model_; }
  double b() const noexcept { return b_; }
  /// True for a boost_map view.
  bool boosted() const noexcept { return boosted_; }
  /// True when field(i) returns the boosted variable Q (a view or a boosted run).
  bool holds_boosted_field() const noexcept { return boosted_ || boosted_run_; }

  RunMonitor& monitor() noexcept { return monitor_; }
  const RunMonitor& monitor() const noexcept { return monitor_; }

  friend Trajectory boost_map(const Trajectory& traj);
  friend Trajectory unboost_map(const Trajectory& traj);
  friend bool operator==(const Trajectory& a, const Trajectory& b);

private:
  TimeScale scale_;
  Model model_;
  double b_;
  bool boosted_run_ = false;
  bool boosted_ = false;
  std::vector<double> times_;
  std::vector<ScalarField> fields_;
  RunMonitor monitor_;
};

/// Q(x, t₂) = B q(x, (1+B²) t₂). Accepts laboratory or (unboosted) friction trajectories.
/// The stored samples are untouched; only the view changes, so unboost_map(boost_map(x))
/// reproduces x exactly.
Trajectory boost_map(const Trajectory& traj);
Trajectory unboost_map(const Trajectory& traj);

struct Observers {
  std::function<void(const State&)> on_sample;
  std::function<void(const State&, const StepInfo&)> on_step;
};

/// Sample times: `count` uniform points on [0, t_end] including both ends (count = 1 gives
/// t_end only). The integrator lands exactly on each.
std::vector<double> sample_times(double t_end, int count);

/// Integrates from q0 at t = 0 to config.t_end. Throws SimulationAbort when the state stops
/// being finite.
Trajectory run(const SimConfig& config, const ScalarField& q0, const Observers& observers = {});

}  // namespace decm
