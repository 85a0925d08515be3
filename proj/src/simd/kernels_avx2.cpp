// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless cpu_supports_avx2().

#include "vstretch/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace vstretch::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, v);
}

// [w0, w1] -> [w0, w0, w1, w1]
inline __m256d duplicate_pairs(const double* w) {
  __m256d x = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(x, 0b01010000);
}

void scale_complex(std::complex<double>* c, const double* w, std::size_t n) {
  double* p = reinterpret_cast<double*>(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(p + 2 * i);
    _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(v, duplicate_pairs(w + i)));
  }
  for (; i < n; ++i) c[i] *= w[i];
}

double weighted_norm2(const std::complex<double>* c, const double* w, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(c);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v0 = _mm256_loadu_pd(p + 2 * i);
    __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(v0, v0), duplicate_pairs(w + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(v1, v1), duplicate_pairs(w + i + 2), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * std::norm(c[i]);
  return acc;
}

void real_to_complex(const double* a, double s, std::complex<double>* out, std::size_t n) {
  double* q = reinterpret_cast<double*>(out);
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(a + i), vs);
    __m256d lo = _mm256_unpacklo_pd(v, zero);  // a0 0 a2 0
    __m256d hi = _mm256_unpackhi_pd(v, zero);  // a1 0 a3 0
    _mm256_storeu_pd(q + 2 * i, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(q + 2 * i + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
  }
  for (; i < n; ++i) out[i] = {a[i] * s, 0.0};
}

void complex_real_part(const std::complex<double>* c, double s, double* out, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(p + 2 * i);      // r0 i0 r1 i1
    __m256d y = _mm256_loadu_pd(p + 2 * i + 4);  // r2 i2 r3 i3
    __m256d r = _mm256_unpacklo_pd(x, y);        // r0 r2 r1 r3
    r = _mm256_permute4x64_pd(r, 0b11011000);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(r, vs));
  }
  for (; i < n; ++i) out[i] = c[i].real() * s;
}

double max_abs_imag(const std::complex<double>* c, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(c);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(p + 2 * i);
    __m256d y = _mm256_loadu_pd(p + 2 * i + 4);
    m = _mm256_max_pd(m, abs_pd(_mm256_unpackhi_pd(x, y)));
  }
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::abs(c[i].imag()));
  return r;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i];
  return acc;
}

double max_abs(const double* a, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(a + i)));
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::abs(a[i]));
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(const double* x, double beta, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

constexpr KernelTable kTable{
    Backend::Avx2, "avx2",    scale_complex, weighted_norm2, real_to_complex, complex_real_part,
    max_abs_imag,  multiply,  dot,           sum,            max_abs,         axpy,
    xpby,          scale,
};

}  // namespace

const KernelTable* avx2_kernels() { return &kTable; }

}  // namespace vstretch::simd
