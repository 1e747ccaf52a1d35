// Compiled with -mavx2 -mfma. Nothing in here may run before dispatch.cpp has checked the CPU.
#include "decm/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace decm::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby_avx2(double alpha, const double* x, double beta, const double* y, double* out,
                std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
  }
  for (; i < n; ++i) out[i] = std::fma(alpha, x[i], beta * y[i]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double sum_pow4_avx2(const double* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d x0 = _mm256_loadu_pd(a + i);
    __m256d x1 = _mm256_loadu_pd(a + i + 4);
    x0 = _mm256_mul_pd(x0, x0);
    x1 = _mm256_mul_pd(x1, x1);
    s0 = _mm256_fmadd_pd(x0, x0, s0);
    s1 = _mm256_fmadd_pd(x1, x1, s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) {
    const double q = a[i] * a[i];
    s += q * q;
  }
  return s;
}

double sum_pow8_avx2(const double* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(a + i);
    x = _mm256_mul_pd(x, x);
    x = _mm256_mul_pd(x, x);
    s0 = _mm256_fmadd_pd(x, x, s0);
  }
  double s = hsum(s0);
  for (; i < n; ++i) {
    const double q = a[i] * a[i];
    const double r = q * q;
    s += r * r;
  }
  return s;
}

double max_abs_avx2(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(a[i]));
  return r;
}

// Complex arrays are interleaved (re, im); one __m256d holds two complex values.
void scale_real_avx2(cplx* c, const double* m, std::size_t n) {
  auto* d = reinterpret_cast<double*>(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d mm = _mm_loadu_pd(m + i);
    // (m0, m0, m1, m1)
    const __m256d mv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm), 0b01010000);
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i), mv));
  }
  for (; i < n; ++i) c[i] = cplx(c[i].real() * m[i], c[i].imag() * m[i]);
}

void scale_imag_avx2(const cplx* c, const double* m, cplx* out, std::size_t n) {
  const auto* s = reinterpret_cast<const double*>(c);
  auto* d = reinterpret_cast<double*>(out);
  // i * (a + ib) = -b + ia: swap lanes, negate the new real part.
  const __m256d flip = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d mm = _mm_loadu_pd(m + i);
    const __m256d mv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm), 0b01010000);
    const __m256d swapped = _mm256_permute_pd(_mm256_loadu_pd(s + 2 * i), 0b0101);
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(_mm256_xor_pd(swapped, flip), mv));
  }
  for (; i < n; ++i) out[i] = cplx(-c[i].imag() * m[i], c[i].real() * m[i]);
}

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept {
  static const KernelTable table{Isa::avx2,     mul_avx2,      axpby_avx2,     dot_avx2,
                                 sum_sq_avx2,   sum_pow4_avx2, sum_pow8_avx2,  max_abs_avx2,
                                 scale_real_avx2, scale_imag_avx2};
  return table;
}

}  // namespace decm::kernels
