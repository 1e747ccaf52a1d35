#pragma once

// Data-parallel inner loops shared by the spectral layer, the solvers and the norms.
//
// Every kernel has a portable scalar reference implementation. When the build enables it
// and the CPU reports AVX2+FMA, an intrinsics variant is selected once at startup; the
// selection can be pinned with DECM_SIMD=scalar|avx2 or force_isa() (tests use the latter
// to compare both paths on identical inputs).

#include <complex>
#include <cstddef>
#include <string_view>

namespace decm::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = alpha * x[i] + beta * y[i]
  void (*axpby)(double alpha, const double* x, double beta, const double* y, double* out,
                std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  double (*sum_pow4)(const double* a, std::size_t n);
  double (*sum_pow8)(const double* a, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  // c[i] *= m[i] (complex by real)
  void (*scale_real)(cplx* c, const double* m, std::size_t n);
  // out[i] = i * m[i] * c[i]
  void (*scale_imag)(const cplx* c, const double* m, cplx* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table() noexcept;

/// Table used by the library. Resolved on first use.
const KernelTable& active() noexcept;

/// Pins the active table. Returns false when the requested ISA is unavailable.
bool force_isa(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

// Convenience wrappers over active().
inline void mul(const double* a, const double* b, double* out, std::size_t n) {
  active().mul(a, b, out, n);
}
inline void axpby(double alpha, const double* x, double beta, const double* y, double* out,
                  std::size_t n) {
  active().axpby(alpha, x, beta, y, out, n);
}
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum_sq(const double* a, std::size_t n) { return active().sum_sq(a, n); }
inline double max_abs(const double* a, std::size_t n) { return active().max_abs(a, n); }

}  // namespace decm::kernels
