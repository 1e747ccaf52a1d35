#pragma once

#include <span>
#include <utility>
#include <vector>

#include "decm/dynamics.hpp"
#include "decm/eos.hpp"
#include "decm/spectral.hpp"

namespace decm {

// ----- norms --------------------------------------------------------------------------------

/// ‖f‖_{L^p} by grid quadrature. p = 2, 4, 8 use the vector kernels; any p >= 1 and
/// p = +inf are accepted.
double lp_norm(const ScalarField& f, double p);
/// Inhomogeneous (Σ_k (1+|k|²)^s |f̂(k)|²)^{1/2}, scaled by 2π.
double sobolev_norm(const SpectralField& f, double s);
double sobolev_norm(const ScalarField& f, double s);
/// ‖Λ^s f‖_{L²}.
double sobolev_seminorm(const SpectralField& f, double s);
double sobolev_seminorm(const ScalarField& f, double s);
/// Σ_{|α|=3} ‖∂^α f‖²_{L²}.
double h3_energy(const SpectralField& f);
/// Σ_{|α|=3} ‖Λ^{1/2} ∂^α f‖²_{L²}, the dissipation paired with h3_energy.
double h3_dissipation(const SpectralField& f);

struct NormRecord {
  double t = 0.0;
  double l2 = 0.0;
  double l4 = 0.0;
  double linf = 0.0;
  double h_half = 0.0;  // ‖Λ^{1/2} f‖
  double h1 = 0.0;      // ‖∇f‖
  double h3 = 0.0;      // inhomogeneous H³
  double mean = 0.0;    // zero Fourier mode
};

NormRecord norm_record(double t, const ScalarField& f);
/// Same, with the mean read from the state's spectral zero mode.
NormRecord norm_record(const State& s);
std::vector<NormRecord> norm_series(const Trajectory& traj);

// ----- energy balance -----------------------------------------------------------------------

/// Coefficient c of the dissipation c‖Λ^{1/2}q‖² in the L² balance of the configured model.
double dissipation_coefficient(const SimConfig& config);

/// Per-interval residual of ½Δ‖q‖² + ∫ (c‖Λ^{1/2}q‖² + ε‖∇q‖²) dt (trapezoid in time),
/// divided by ‖q₀‖². Entry 0 is 0. `include_eps_sink = false` drops the ε term.
std::vector<double> energy_balance_residual(std::span<const NormRecord> records,
                                            const SimConfig& config, bool include_eps_sink = true);
std::vector<double> energy_balance_residual(const Trajectory& traj, const SimConfig& config);
/// max_i |residual_i| / Δt_i.
double balance_rate(std::span<const NormRecord> records, std::span<const double> residual);

// ----- physical fields ----------------------------------------------------------------------

/// E = −Rq.
VectorField electric_field(const ScalarField& q);
/// j = u q + E − B u^⊥ (product dealiased).
VectorField current_density(const ScalarField& q, const VectorField& u, double b);
/// ‖∇·j + ∂_t q‖ / max(‖∂_t q‖, tiny) with ∂_t q from the laboratory right-hand side.
double charge_conservation_residual(const ScalarField& q, const SimConfig& config);

// ----- fitting and comparisons --------------------------------------------------------------

struct DecayFit {
  double rate = 0.0;       // slope of log(value) against t
  double intercept = 0.0;
  double r2 = 1.0;
  int points = 0;
};

/// Least squares on log(value) for samples with t in [t_min, t_max]. Values must be > 0.
DecayFit decay_fit(std::span<const double> t, std::span<const double> value,
                   double t_min = -1e300, double t_max = 1e300);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct LimitError {
  double b = 0.0;
  double sup_l2 = 0.0;
  std::vector<std::pair<double, double>> per_time;  // (t, ‖difference‖_{L²})
};

/// L² difference at matched times between a gyration-scale DECM run and an inviscid SQG run.
LimitError limit_error_inviscid(const Trajectory& decm, const Trajectory& sqg);
/// sup_t ‖B q(·,(1+B²)t) − Q̄(t)‖ against a critical SQG run. `decm` may be a laboratory
/// trajectory (boosted here), an already boosted view, or a boosted friction run.
LimitError limit_error_critical(const Trajectory& decm, double b, const Trajectory& sqg);

struct WScaling {
  std::vector<double> b;
  std::vector<double> w_l2;
  std::vector<double> w_h3;  // ‖∇Δw‖ = ‖Λ³w‖
  double slope_l2 = 0.0;
  double slope_h3 = 0.0;
};

/// W[Q] for each B in b_list (solver settings from `base`, b overridden).
WScaling w_scaling_report(const ScalarField& Q, std::span<const double> b_list,
                          const EosParams& base = {});

}  // namespace decm
