#include "decm/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "decm/kernels.hpp"

namespace decm {

// ----- grid and fields ---------------------------------------------------------------------

Grid::Grid(int n) : n_(n) {
  if (n < 8 || n % 2 != 0)
    throw DomainError("grid size must be an even integer >= 8, got " + std::to_string(n));
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b))
    throw DomainError(std::string(where) + ": grid mismatch (" + std::to_string(a.n()) + " vs " +
                      std::to_string(b.n()) + ")");
}

ScalarField::ScalarField(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(Grid grid, std::span<const double> values) : grid_(grid) {
  if (values.size() != grid.size())
    throw DomainError("ScalarField: expected " + std::to_string(grid.size()) + " values, got " +
                      std::to_string(values.size()));
  values_.assign(values.begin(), values.end());
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField +=");
  kernels::axpby(1.0, values_.data(), 1.0, o.values_.data(), values_.data(), values_.size());
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField -=");
  kernels::axpby(1.0, values_.data(), -1.0, o.values_.data(), values_.data(), values_.size());
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

SpectralField::SpectralField(Grid grid) : grid_(grid), coeffs_(grid.spectral_size(), cplx(0.0)) {}

cplx SpectralField::mode(int k1, int k2) const noexcept {
  const int n = grid_.n();
  if (k2 < 0) return std::conj(mode(-k1, -k2));
  if (k2 > n / 2) return cplx(0.0);
  return at(grid_.row_of(k1), k2);
}

void SpectralField::set_mode(int k1, int k2, cplx value) noexcept {
  const int n = grid_.n();
  if (k2 < 0) {
    k1 = -k1;
    k2 = -k2;
    value = std::conj(value);
  }
  if (k2 > n / 2) return;
  at(grid_.row_of(k1), k2) = value;
  if (k2 == 0 || k2 == n / 2) at(grid_.row_of(-k1), k2) = std::conj(value);
}

namespace {

void combine_into(double alpha, const cplx* a, double beta, const cplx* b, cplx* out,
                  std::size_t n) {
  kernels::axpby(alpha, reinterpret_cast<const double*>(a), beta,
                 reinterpret_cast<const double*>(b), reinterpret_cast<double*>(out), 2 * n);
}

}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_, "SpectralField +=");
  combine_into(1.0, data(), 1.0, o.data(), data(), coeffs_.size());
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_, "SpectralField -=");
  combine_into(1.0, data(), -1.0, o.data(), data(), coeffs_.size());
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (cplx& c : coeffs_) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField combine(double alpha, const SpectralField& a, double beta, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid(), "combine");
  SpectralField out(a.grid());
  combine_into(alpha, a.data(), beta, b.data(), out.data(), out.coeffs().size());
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) { return {a.x + b.x, a.y + b.y}; }
VectorField operator-(const VectorField& a, const VectorField& b) { return {a.x - b.x, a.y - b.y}; }
VectorField operator*(double s, const VectorField& a) { return {s * a.x, s * a.y}; }
SpectralVector operator+(const SpectralVector& a, const SpectralVector& b) {
  return {a.x + b.x, a.y + b.y};
}
SpectralVector operator-(const SpectralVector& a, const SpectralVector& b) {
  return {a.x - b.x, a.y - b.y};
}
SpectralVector operator*(double s, const SpectralVector& a) { return {s * a.x, s * a.y}; }

// ----- wave tables -------------------------------------------------------------------------

namespace {

std::shared_ptr<const WaveTable> build_waves(const Grid& g) {
  auto t = std::make_shared<WaveTable>();
  const int n = g.n();
  const int h = g.half();
  const std::size_t m = g.spectral_size();
  for (auto* v : {&t->k1, &t->k2, &t->kmag, &t->kmag2, &t->d1, &t->d2, &t->r1, &t->r2, &t->keep,
                  &t->weight})
    v->assign(m, 0.0);
  const int cut = g.dealias_cutoff();
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < h; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * h + col;
      const int a = g.k1(row);
      const int b = g.k2(col);
      const double k2sq = double(a) * a + double(b) * b;
      const double km = std::sqrt(k2sq);
      const bool nyq = (a == n / 2) || (b == n / 2);
      t->k1[i] = a;
      t->k2[i] = b;
      t->kmag[i] = km;
      t->kmag2[i] = k2sq;
      t->d1[i] = nyq ? 0.0 : a;
      t->d2[i] = nyq ? 0.0 : b;
      t->r1[i] = (nyq || km == 0.0) ? 0.0 : a / km;
      t->r2[i] = (nyq || km == 0.0) ? 0.0 : b / km;
      t->keep[i] = (std::abs(a) <= cut && std::abs(b) <= cut) ? 1.0 : 0.0;
      t->weight[i] = (col == 0 || col == n / 2) ? 1.0 : 2.0;
    }
  }
  return t;
}

struct FftPlans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

// FFTW planning is not thread-safe; execution of an existing plan on fresh arrays is.
const FftPlans& plans_for(const Grid& g) {
  static std::map<int, FftPlans> cache;
  std::lock_guard lock(registry_mutex());
  auto it = cache.find(g.n());
  if (it != cache.end()) return it->second;
  AlignedVector<double> real(g.size());
  AlignedVector<cplx> spec(g.spectral_size());
  auto* cs = reinterpret_cast<fftw_complex*>(spec.data());
  FftPlans p;
  p.r2c = fftw_plan_dft_r2c_2d(g.n(), g.n(), real.data(), cs, FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_2d(g.n(), g.n(), cs, real.data(), FFTW_ESTIMATE);
  if (!p.r2c || !p.c2r) throw Error("FFTW planning failed for n = " + std::to_string(g.n()));
  return cache.emplace(g.n(), p).first->second;
}

}  // namespace

std::shared_ptr<const WaveTable> waves(const Grid& grid) {
  static std::map<int, std::shared_ptr<const WaveTable>> cache;
  static std::mutex m;
  std::lock_guard lock(m);
  auto& slot = cache[grid.n()];
  if (!slot) slot = build_waves(grid);
  return slot;
}

// ----- transforms --------------------------------------------------------------------------

SpectralField forward(const ScalarField& f) {
  if (!f.all_finite()) throw DomainError("forward: non-finite input values");
  const Grid& g = f.grid();
  const FftPlans& p = plans_for(g);
  SpectralField out(g);
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(f.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  out *= 1.0 / static_cast<double>(g.size());
  out.at(0, 0) = cplx(out.at(0, 0).real(), 0.0);
  return out;
}

ScalarField inverse(const SpectralField& f) {
  const Grid& g = f.grid();
  const FftPlans& p = plans_for(g);
  // c2r overwrites its input.
  SpectralField scratch = f;
  ScalarField out(g);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  return out;
}

SpectralVector forward(const VectorField& f) { return {forward(f.x), forward(f.y)}; }
VectorField inverse(const SpectralVector& f) { return {inverse(f.x), inverse(f.y)}; }

// ----- multipliers -------------------------------------------------------------------------

namespace {

SpectralField imag_multiplier(const SpectralField& f, const AlignedVector<double>& m) {
  SpectralField out(f.grid());
  kernels::active().scale_imag(f.data(), m.data(), out.data(), out.coeffs().size());
  return out;
}

SpectralField real_multiplier(const SpectralField& f, const AlignedVector<double>& m) {
  SpectralField out = f;
  kernels::active().scale_real(out.data(), m.data(), out.coeffs().size());
  return out;
}

void check_axis(int axis, const char* where) {
  if (axis != 1 && axis != 2)
    throw DomainError(std::string(where) + ": axis must be 1 or 2, got " + std::to_string(axis));
}

}  // namespace

SpectralField riesz(const SpectralField& f, int axis) {
  check_axis(axis, "riesz");
  const auto w = waves(f.grid());
  return imag_multiplier(f, axis == 1 ? w->r1 : w->r2);
}

SpectralVector riesz_perp(const SpectralField& f) {
  return {-1.0 * riesz(f, 2), riesz(f, 1)};
}

SpectralField riesz_dot(const SpectralVector& g) {
  require_same_grid(g.x.grid(), g.y.grid(), "riesz_dot");
  return riesz(g.x, 1) + riesz(g.y, 2);
}

SpectralField riesz_perp_dot(const SpectralVector& g) {
  require_same_grid(g.x.grid(), g.y.grid(), "riesz_perp_dot");
  return riesz(g.y, 1) - riesz(g.x, 2);
}

SpectralField lambda_pow(const SpectralField& f, double s) {
  // A round-off mean (sampled trigonometric data) is accepted and dropped.
  if (s < 0.0 && std::abs(f.mean()) > 1e-12 * std::max(1.0, max_abs(f)))
    throw DomainError("lambda_pow: negative power on nonzero-mean field");
  SpectralField out = apply_radial(f, [s](double k) { return k == 0.0 ? 0.0 : std::pow(k, s); });
  out.at(0, 0) = 0.0;
  return out;
}

SpectralVector leray_project(const SpectralVector& g) {
  const SpectralField div = riesz_dot(g);
  return {g.x + riesz(div, 1), g.y + riesz(div, 2)};
}

VectorField leray_project(const VectorField& g) { return inverse(leray_project(forward(g))); }

SpectralField mollify(const SpectralField& f, double eps) {
  if (!(eps >= 0.0)) throw DomainError("mollify: eps must be >= 0");
  if (eps == 0.0) return f;
  const double e2 = eps * eps;
  const auto w = waves(f.grid());
  SpectralField out = f;
  auto c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-e2 * w->kmag2[i]);
  return out;
}

SpectralField dealias(const SpectralField& f) { return real_multiplier(f, waves(f.grid())->keep); }

SpectralField partial(const SpectralField& f, int axis) {
  check_axis(axis, "partial");
  const auto w = waves(f.grid());
  return imag_multiplier(f, axis == 1 ? w->d1 : w->d2);
}

SpectralVector gradient(const SpectralField& f) { return {partial(f, 1), partial(f, 2)}; }

SpectralField divergence(const SpectralVector& g) { return partial(g.x, 1) + partial(g.y, 2); }

SpectralField curl(const SpectralVector& g) { return partial(g.y, 1) - partial(g.x, 2); }

SpectralField laplacian(const SpectralField& f) {
  const auto w = waves(f.grid());
  SpectralField out = f;
  auto c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -w->kmag2[i];
  return out;
}

SpectralField remove_mean(SpectralField f) {
  f.at(0, 0) = 0.0;
  return f;
}

// ----- products and norms ------------------------------------------------------------------

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "multiply");
  ScalarField out(a.grid());
  kernels::mul(a.data(), b.data(), out.data(), out.values().size());
  return out;
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid(), "dealiased_product");
  return dealias(forward(multiply(inverse(dealias(a)), inverse(dealias(b)))));
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  const double dx = f.grid().dx();
  return kernels::dot(f.data(), g.data(), f.values().size()) * dx * dx;
}

double inner(const VectorField& f, const VectorField& g) { return inner(f.x, g.x) + inner(f.y, g.y); }

double inner(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  const auto w = waves(f.grid());
  const auto a = f.coeffs();
  const auto b = g.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += w->weight[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return kTwoPi * kTwoPi * s;
}

double inner(const SpectralVector& f, const SpectralVector& g) {
  return inner(f.x, g.x) + inner(f.y, g.y);
}

double l2_norm(const ScalarField& f) {
  const double dx = f.grid().dx();
  return std::sqrt(kernels::sum_sq(f.data(), f.values().size())) * dx;
}
double l2_norm(const VectorField& f) { return std::sqrt(inner(f, f)); }
double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }
double l2_norm(const SpectralVector& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double max_abs(const ScalarField& f) { return kernels::max_abs(f.data(), f.values().size()); }

double max_abs(const SpectralField& f) {
  double m = 0.0;
  for (const cplx& c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace decm
