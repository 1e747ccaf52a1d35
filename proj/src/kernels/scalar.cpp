#include "decm/kernels.hpp"

#include <cmath>

namespace decm::kernels {
namespace {

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby_scalar(double alpha, const double* x, double beta, const double* y, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_pow4_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = a[i] * a[i];
    s += q * q;
  }
  return s;
}

double sum_pow8_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = a[i] * a[i];
    const double r = q * q;
    s += r * r;
  }
  return s;
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i]));
  return m;
}

void scale_real_scalar(cplx* c, const double* m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = cplx(c[i].real() * m[i], c[i].imag() * m[i]);
}

void scale_imag_scalar(const cplx* c, const double* m, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(-c[i].imag() * m[i], c[i].real() * m[i]);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::scalar,      mul_scalar,      axpby_scalar,
                                 dot_scalar,       sum_sq_scalar,   sum_pow4_scalar,
                                 sum_pow8_scalar,  max_abs_scalar,  scale_real_scalar,
                                 scale_imag_scalar};
  return table;
}

}  // namespace decm::kernels
