#pragma once

// Velocity equation of state.
//
// Given the charge density q, the velocity u is the divergence-free, mean-zero solution of
//     T_q u = B R^⊥q − ℙ(q Rq),        T_q u = (1+B²) u + B ℙ(q u^⊥),
// which reduces to a scalar problem for w:
//     w − (B/(1+B²)) L_q w = −(1/(1+B²)²) L_q q,      L_q f = R·(q R^⊥f) = −R^⊥·(q Rf),
// with v = w + (B/(1+B²)) q, u = R^⊥v, ω = −Λv.
//
// All quadratic products dealias both factors and the result. The projector used by T_q also
// removes the mean, so T_q maps mean-zero divergence-free fields to themselves.

#include <string>
#include <string_view>

#include "decm/spectral.hpp"

namespace decm {

enum class EosMethod { fixed_point, krylov, dense_oracle };

std::string_view to_string(EosMethod m) noexcept;
/// Throws DomainError for unknown names.
EosMethod parse_eos_method(std::string_view name);

struct EosParams {
  double b = 0.0;
  double tol = 1e-12;
  int max_iter = 500;
  EosMethod method = EosMethod::fixed_point;

  /// Throws DomainError if b < 0, tol <= 0 or max_iter < 1.
  void validate() const;
};

struct WSolve {
  ScalarField w;
  double residual = 0.0;
  int iterations = 0;
};

struct EosSolution {
  ScalarField w;
  ScalarField v;
  VectorField u;
  ScalarField omega;
  double residual = 0.0;  // ‖T_q u − (B R^⊥q − ℙ(q Rq))‖
  int iterations = 0;
};

/// Largest grid accepted by the dense solver.
inline constexpr int kDenseOracleMaxN = 24;

ScalarField apply_Lq(const ScalarField& q, const ScalarField& f);
/// Same operator through the form −R^⊥·(q Rf).
ScalarField apply_Lq_switched(const ScalarField& q, const ScalarField& f);
VectorField apply_Tq(const ScalarField& q, const VectorField& u, double b);

/// Throws ConvergenceError when the chosen method fails; DomainError on bad input.
WSolve solve_w(const ScalarField& q, const EosParams& params);
/// W[Q] for the boosted field Q = Bq. Requires b > 0.
WSolve solve_w_boosted(const ScalarField& Q, const EosParams& params);
EosSolution solve_eos(const ScalarField& q, const EosParams& params);
/// T_q^{-1} f, with f first projected onto mean-zero divergence-free fields.
VectorField apply_Tq_inverse(const ScalarField& q, const VectorField& f, const EosParams& params);

// ----- spectral layer (used by the time stepper) ------------------------------------------

/// L_q with q frozen: keeps the dealiased q on the grid so one application costs four
/// transforms.
class LqOperator {
public:
  explicit LqOperator(const SpectralField& q);

  const Grid& grid() const noexcept { return q_grid_.grid(); }
  const ScalarField& q_grid() const noexcept { return q_grid_; }

  SpectralField apply(const SpectralField& f) const;
  SpectralField apply_switched(const SpectralField& f) const;

private:
  ScalarField q_grid_;
};

struct SpectralW {
  SpectralField w;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves (I − a L) w = rhs until ‖(I − a L) w − rhs‖ ≤ abs_tol.
SpectralW solve_shifted(const LqOperator& L, double a, const SpectralField& rhs, EosMethod method,
                        double abs_tol, int max_iter, const SpectralField* guess = nullptr);

struct SpectralEos {
  SpectralField w;
  SpectralField v;
  SpectralVector u;
  double residual = -1.0;  // set only when requested
  int iterations = 0;
};

/// Equation of state on spectral data. `tol_scale` ∈ (0, 1] tightens params.tol further.
SpectralEos solve_eos_spectral(const SpectralField& q, const EosParams& params,
                               const SpectralField* guess = nullptr, bool compute_residual = false,
                               double tol_scale = 1.0);

/// W[Q] on spectral data.
SpectralW solve_w_boosted_spectral(const SpectralField& Q, const EosParams& params,
                                   const SpectralField* guess = nullptr, double tol_scale = 1.0);

SpectralVector apply_Tq_spectral(const LqOperator& Lq, const SpectralVector& u, double b);

/// ℙ with the mean removed.
SpectralVector leray_project_mean_free(const SpectralVector& g);

/// B R^⊥q − ℙ(q Rq), the right side of the velocity equation.
SpectralVector eos_forcing(const LqOperator& Lq, const SpectralField& q, double b);

}  // namespace decm
