#pragma once

// Fields on the periodic torus [0, 2π)² and the Fourier-multiplier calculus used by every
// other module.
//
// Conventions:
//  * A Grid of n points per axis samples (x_i, y_j) = (2πi/n, 2πj/n); values are row-major
//    with i (the x index) as the row.
//  * f(x) = Σ_k f̂(k) e^{ik·x}, so forward() divides by n² and the L² norm obeys
//    ‖f‖² = ∫|f|² dx = (2π)² Σ_k |f̂(k)|².
//  * Spectral storage is the real-to-complex half plane: n rows (k₁ = −n/2+1 … n/2, stored
//    in FFT order) by n/2+1 columns (k₂ = 0 … n/2). Negative k₂ is implied by conjugate
//    symmetry.
//  * Zero mode of Λ^s (any s), R and Λ^{-1} is defined as 0.
//  * Odd multipliers (∂ⱼ, Rⱼ) vanish on the Nyquist lines k₁ = n/2 and k₂ = n/2, which keeps
//    their output conjugate-symmetric. Consequently R·R = −I holds on mean-zero fields without
//    Nyquist content, and the Leray projector is the identity on the Nyquist lines.

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <vector>

#include "decm/error.hpp"

namespace decm {

using cplx = std::complex<double>;

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Align)));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t(Align)); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class Grid {
public:
  /// Throws DomainError unless n is even and n >= 8.
  explicit Grid(int n);

  int n() const noexcept { return n_; }
  /// Number of physical points, n².
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  /// Columns of the half-plane spectral layout, n/2 + 1.
  int half() const noexcept { return n_ / 2 + 1; }
  std::size_t spectral_size() const noexcept { return static_cast<std::size_t>(n_) * half(); }
  double dx() const noexcept { return kTwoPi / n_; }
  double coord(int i) const noexcept { return kTwoPi * i / n_; }

  /// Wavenumber along x for spectral row `row` (FFT order).
  int k1(int row) const noexcept { return row <= n_ / 2 ? row : row - n_; }
  /// Wavenumber along y for spectral column `col`.
  int k2(int col) const noexcept { return col; }
  /// Spectral row holding wavenumber k₁ (any representative modulo n).
  int row_of(int k1) const noexcept { return ((k1 % n_) + n_) % n_; }

  /// Largest wavenumber kept by dealias(): modes with max(|k₁|,|k₂|) > n/3 are removed.
  int dealias_cutoff() const noexcept { return n_ / 3; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

private:
  int n_;
};

/// Real grid values of a periodic scalar.
class ScalarField {
public:
  explicit ScalarField(Grid grid);
  ScalarField(Grid grid, std::span<const double> values);

  template <class F>
  static ScalarField sample(Grid grid, F&& f) {
    ScalarField out(grid);
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = f(grid.coord(i), grid.coord(j));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const double* data() const noexcept { return values_.data(); }
  double* data() noexcept { return values_.data(); }

  double operator()(int i, int j) const noexcept { return values_[index(i, j)]; }
  double& operator()(int i, int j) noexcept { return values_[index(i, j)]; }

  bool all_finite() const noexcept;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

private:
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * grid_.n() + j;
  }
  Grid grid_;
  AlignedVector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Complex Fourier coefficients of a real periodic scalar.
class SpectralField {
public:
  explicit SpectralField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  std::span<cplx> coeffs() noexcept { return coeffs_; }
  cplx* data() noexcept { return coeffs_.data(); }
  const cplx* data() const noexcept { return coeffs_.data(); }

  cplx& at(int row, int col) noexcept { return coeffs_[static_cast<std::size_t>(row) * grid_.half() + col]; }
  cplx at(int row, int col) const noexcept {
    return coeffs_[static_cast<std::size_t>(row) * grid_.half() + col];
  }

  /// Coefficient of wavenumber (k₁, k₂); negative k₂ is read through conjugate symmetry.
  cplx mode(int k1, int k2) const noexcept;
  /// Sets (k₁, k₂) and its conjugate partner (−k₁, −k₂) when that partner is stored.
  void set_mode(int k1, int k2, cplx value) noexcept;

  double mean() const noexcept { return coeffs_[0].real(); }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

private:
  Grid grid_;
  AlignedVector<cplx> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// out = alpha * a + beta * b
SpectralField combine(double alpha, const SpectralField& a, double beta, const SpectralField& b);

struct VectorField {
  ScalarField x;
  ScalarField y;
  const Grid& grid() const noexcept { return x.grid(); }
};

struct SpectralVector {
  SpectralField x;
  SpectralField y;
  const Grid& grid() const noexcept { return x.grid(); }
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
SpectralVector operator+(const SpectralVector& a, const SpectralVector& b);
SpectralVector operator-(const SpectralVector& a, const SpectralVector& b);
SpectralVector operator*(double s, const SpectralVector& a);

/// Per-grid wavenumber tables (shared, immutable, built once per n).
struct WaveTable {
  AlignedVector<double> k1, k2;        // wavenumbers as doubles
  AlignedVector<double> kmag;          // |k|
  AlignedVector<double> kmag2;         // |k|²
  AlignedVector<double> d1, d2;        // kⱼ with Nyquist lines zeroed (for ∂ⱼ = i·dⱼ)
  AlignedVector<double> r1, r2;        // kⱼ/|k| with Nyquist lines and zero mode zeroed
  AlignedVector<double> keep;          // 1 inside the dealiasing band, 0 outside
  AlignedVector<double> weight;        // multiplicity of the stored coefficient (1 or 2)
};

std::shared_ptr<const WaveTable> waves(const Grid& grid);

// ----- transforms -----------------------------------------------------------------------

/// Throws DomainError on non-finite input.
SpectralField forward(const ScalarField& f);
ScalarField inverse(const SpectralField& f);
SpectralVector forward(const VectorField& f);
VectorField inverse(const SpectralVector& f);

// ----- multipliers ----------------------------------------------------------------------

/// Rⱼ: multiplier i kⱼ/|k|, axis ∈ {1, 2}.
SpectralField riesz(const SpectralField& f, int axis);
/// R^⊥f = (−R₂f, R₁f).
SpectralVector riesz_perp(const SpectralField& f);
/// R·g = R₁g₁ + R₂g₂.
SpectralField riesz_dot(const SpectralVector& g);
/// R^⊥·g = −R₂g₁ + R₁g₂.
SpectralField riesz_perp_dot(const SpectralVector& g);
/// Multiplier |k|^s. Throws DomainError for s < 0 on a field with nonzero mean.
SpectralField lambda_pow(const SpectralField& f, double s);
/// (ℙg)ᵢ = (δᵢⱼ + RᵢRⱼ) gⱼ.
SpectralVector leray_project(const SpectralVector& g);
VectorField leray_project(const VectorField& g);
/// Gaussian mollifier, multiplier exp(−ε²|k|²). ε = 0 is the identity.
SpectralField mollify(const SpectralField& f, double eps);
/// 2/3-rule truncation.
SpectralField dealias(const SpectralField& f);
/// ∂ⱼ, axis ∈ {1, 2}.
SpectralField partial(const SpectralField& f, int axis);
SpectralVector gradient(const SpectralField& f);
SpectralField divergence(const SpectralVector& g);
/// ∇^⊥·g = ∂₁g₂ − ∂₂g₁.
SpectralField curl(const SpectralVector& g);
SpectralField laplacian(const SpectralField& f);
/// Zeroes the mean.
SpectralField remove_mean(SpectralField f);

/// Applies a real radial multiplier m(|k|) mode-wise.
template <class F>
SpectralField apply_radial(const SpectralField& f, F&& m) {
  SpectralField out = f;
  const auto w = waves(f.grid());
  auto c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m(w->kmag[i]);
  return out;
}

// ----- products and inner products --------------------------------------------------------

/// Pointwise product in physical space. No dealiasing is applied here.
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// D(F(F⁻¹(Da) · F⁻¹(Db))): alias-free product of two spectral fields.
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);

/// ∫ f g dx by the trapezoid rule (exact for trigonometric polynomials of degree < n).
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& f, const VectorField& g);
/// (2π)² Σ_k Re(conj(f̂) ĝ) over the full wavenumber plane.
double inner(const SpectralField& f, const SpectralField& g);
double inner(const SpectralVector& f, const SpectralVector& g);

double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& f);
double l2_norm(const SpectralField& f);
double l2_norm(const SpectralVector& f);
double max_abs(const ScalarField& f);
double max_abs(const SpectralField& f);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace decm
