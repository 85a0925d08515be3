#include "vstretch/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace vstretch::simd {
namespace {

void scale_complex(std::complex<double>* c, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] *= w[i];
}

double weighted_norm2(const std::complex<double>* c, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(c[i]);
  return acc;
}

void real_to_complex(const double* a, double s, std::complex<double>* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = {a[i] * s, 0.0};
}

void complex_real_part(const std::complex<double>* c, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c[i].real() * s;
}

double max_abs_imag(const std::complex<double>* c, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(c[i].imag()));
  return m;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

constexpr KernelTable kTable{
    Backend::Scalar, "scalar",  scale_complex, weighted_norm2, real_to_complex, complex_real_part,
    max_abs_imag,    multiply,  dot,           sum,            max_abs,         axpy,
    xpby,            scale,
};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace vstretch::simd
