#pragma once

// Data-parallel inner loops shared by the spectral, solver and integrator code.
//
// Every kernel has a portable scalar reference and, where the target allows,
// an AVX2/FMA variant. The active table is chosen once at startup from the
// CPU feature bits and can be pinned explicitly (tests, reproducibility runs).
// Variants agree to rounding; reductions may differ in the last bits because
// the vector code sums in a different order.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace vstretch::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  const char* name;

  // c[i] *= w[i] (complex times real weight)
  void (*scale_complex)(std::complex<double>* c, const double* w, std::size_t n);
  // sum_i w[i] * |c[i]|^2
  double (*weighted_norm2)(const std::complex<double>* c, const double* w, std::size_t n);
  // out[i] = (a[i], 0) * s
  void (*real_to_complex)(const double* a, double s, std::complex<double>* out, std::size_t n);
  // out[i] = re(c[i]) * s
  void (*complex_real_part)(const std::complex<double>* c, double s, double* out, std::size_t n);
  // max_i |im(c[i])|
  double (*max_abs_imag)(const std::complex<double>* c, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = x + beta * y
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Returns nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

/// Currently active table. Defaults to the best variant the CPU supports.
const KernelTable& active();

/// Pins the active table. Throws std::runtime_error if the backend is not
/// available on this build or CPU.
void select(Backend backend);

/// Restores the automatic choice.
void select_best();

Backend parse_backend(std::string_view name);

// Span front ends over the active table.

inline void scale_complex(std::span<std::complex<double>> c, std::span<const double> w) {
  active().scale_complex(c.data(), w.data(), c.size());
}
inline double weighted_norm2(std::span<const std::complex<double>> c, std::span<const double> w) {
  return active().weighted_norm2(c.data(), w.data(), c.size());
}
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a.data(), b.data(), out.data(), out.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline double max_abs(std::span<const double> a) { return active().max_abs(a.data(), a.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void xpby(std::span<const double> x, double beta, std::span<double> y) {
  active().xpby(x.data(), beta, y.data(), y.size());
}
inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

}  // namespace vstretch::simd
