#include "vstretch/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "vstretch/error.hpp"
#include "vstretch/simd/kernels.hpp"

namespace vstretch {

namespace {

// FFTW's planner and plan destruction are not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

namespace detail {

struct GridData {
  int n = 0;
  double box_length = 0.0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> z11;
  std::vector<double> z22;
  std::vector<double> dealias;

  GridData(int n_, double box_length_) : n(n_), box_length(box_length_) {
    const std::size_t size = static_cast<std::size_t>(n) * n;
    {
      ComplexBuffer a(size), b(size);
      auto* in = reinterpret_cast<fftw_complex*>(a.data());
      auto* out = reinterpret_cast<fftw_complex*>(b.data());
      std::lock_guard lock(planner_mutex());
      forward = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
      backward = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (forward == nullptr || backward == nullptr) throw Error("fft", "FFTW planning failed");

    z11.resize(size);
    z22.resize(size);
    dealias.resize(size);
    for (int j = 0; j < n; ++j) {
      const int k2 = j < n / 2 ? j : j - n;
      for (int i = 0; i < n; ++i) {
        const int k1 = i < n / 2 ? i : i - n;
        const std::size_t idx = static_cast<std::size_t>(j) * n + i;
        // The multiplier is 0-homogeneous, so integer wavenumbers suffice.
        const double a = static_cast<double>(k1) * k1;
        const double b = static_cast<double>(k2) * k2;
        if (k1 == 0 && k2 == 0) {
          z11[idx] = 0.0;
          z22[idx] = 0.0;
        } else {
          z11[idx] = a / (a + b);
          z22[idx] = b / (a + b);
        }
        dealias[idx] = (3 * std::abs(k1) < n && 3 * std::abs(k2) < n) ? 1.0 : 0.0;
      }
    }
  }

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
  }

  GridData(const GridData&) = delete;
  GridData& operator=(const GridData&) = delete;
};

}  // namespace detail

Grid::Grid(int n, double box_length) {
  if (!is_power_of_two(n) || n < 16)
    throw InvalidArgument("grid size n must be a power of two >= 16, got " + std::to_string(n));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidArgument("box_length must be positive and finite");
  data_ = std::make_shared<const detail::GridData>(n, box_length);
}

int Grid::n() const noexcept { return data_->n; }
double Grid::box_length() const noexcept { return data_->box_length; }

double Grid::frequency(int index) const noexcept {
  return 2.0 * std::numbers::pi * wavenumber(index) / box_length();
}

std::span<const double> Grid::z11_weights() const noexcept { return data_->z11; }
std::span<const double> Grid::z22_weights() const noexcept { return data_->z22; }
std::span<const double> Grid::dealias_weights() const noexcept { return data_->dealias; }

Grid make_grid(int n, double box_length) { return Grid(n, box_length); }

RealField::RealField(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

RealField::RealField(Grid grid, RealBuffer values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
}

bool RealField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SpectralField::SpectralField(Grid grid) : grid_(std::move(grid)), coefficients_(grid_.size()) {}

SpectralField fft_forward(const RealField& f) {
  const Grid& g = f.grid();
  const auto& k = simd::active();
  const double norm = 1.0 / static_cast<double>(g.size());
  ComplexBuffer in(g.size());
  k.real_to_complex(f.values().data(), norm, in.data(), g.size());
  SpectralField out(g);
  fftw_execute_dft(g.data().forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.coefficients().data()));
  return out;
}

RealField fft_inverse(const SpectralField& F, double* max_imag) {
  const Grid& g = F.grid();
  const auto& k = simd::active();
  // FFTW may scribble on its input; keep F intact.
  ComplexBuffer in(F.coefficients().begin(), F.coefficients().end());
  ComplexBuffer out(g.size());
  fftw_execute_dft(g.data().backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  if (max_imag != nullptr) *max_imag = k.max_abs_imag(out.data(), out.size());
  RealField f(g);
  k.complex_real_part(out.data(), 1.0, f.values().data(), g.size());
  return f;
}

RealField apply_multiplier(const RealField& f, std::span<const double> weights) {
  const Grid& g = f.grid();
  if (weights.size() != g.size()) throw InvalidArgument("multiplier table does not match grid");
  const auto& k = simd::active();
  const double norm = 1.0 / static_cast<double>(g.size());
  ComplexBuffer a(g.size()), b(g.size());
  k.real_to_complex(f.values().data(), norm, a.data(), a.size());
  fftw_execute_dft(g.data().forward, reinterpret_cast<fftw_complex*>(a.data()),
                   reinterpret_cast<fftw_complex*>(b.data()));
  k.scale_complex(b.data(), weights.data(), b.size());
  fftw_execute_dft(g.data().backward, reinterpret_cast<fftw_complex*>(b.data()),
                   reinterpret_cast<fftw_complex*>(a.data()));
  RealField out(g);
  k.complex_real_part(a.data(), 1.0, out.values().data(), out.size());
  return out;
}

RealField apply_z11(const RealField& f) { return apply_multiplier(f, f.grid().z11_weights()); }
RealField apply_z22(const RealField& f) { return apply_multiplier(f, f.grid().z22_weights()); }
RealField dealias(const RealField& f) { return apply_multiplier(f, f.grid().dealias_weights()); }

double quadratic_form(const RealField& f) {
  const Grid& g = f.grid();
  const SpectralField F = fft_forward(f);
  const double L = g.box_length();
  return L * L * simd::weighted_norm2(F.coefficients(), g.z11_weights());
}

double cone_mass_ratio(const RealField& f, double k) {
  if (!(k > 1.0)) throw InvalidArgument("cone aperture k must exceed 1");
  const Grid& g = f.grid();
  const SpectralField F = fft_forward(f);
  std::vector<double> cone(g.size(), 0.0);
  const int n = g.n();
  for (int j = 0; j < n; ++j) {
    const int k2 = g.wavenumber(j);
    if (k2 == 0) continue;
    for (int i = 0; i < n; ++i) {
      const double ratio = static_cast<double>(g.wavenumber(i)) / k2;
      if (ratio > 1.0 / k && ratio < k) cone[g.index(i, j)] = 1.0;
    }
  }
  std::vector<double> ones(g.size(), 1.0);
  const double total = simd::weighted_norm2(F.coefficients(), ones);
  if (!(total > 0.0)) throw InvalidArgument("cone mass ratio undefined for a zero field");
  return simd::weighted_norm2(F.coefficients(), cone) / total;
}

double inner_product(const RealField& a, const RealField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
  const double h = a.grid().spacing();
  return h * h * simd::dot(a.values(), b.values());
}

double l2_norm(const RealField& f) { return std::sqrt(inner_product(f, f)); }

double integral(const RealField& f) {
  const double h = f.grid().spacing();
  return h * h * simd::sum(f.values());
}

double sup_norm(const RealField& f) { return simd::max_abs(f.values()); }

}  // namespace vstretch
