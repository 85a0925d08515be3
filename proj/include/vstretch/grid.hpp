#pragma once

// Periodic square grid, real/spectral fields on it, and the Fourier
// multipliers Z11 = d11 (Laplacian)^-1 and Z22 = d22 (Laplacian)^-1.
//
// Layout: fields are stored row-major with the x2 index selecting the row and
// the x1 index contiguous, value(i1, i2) = data[i2 * n + i1]. Cell (i1, i2)
// sits at x = (-L/2 + i1 h, -L/2 + i2 h), so the origin is a grid point.
// Spectral coefficients use the same layout with lattice index k in [0, n)
// mapping to the signed wavenumber k < n/2 ? k : k - n.
//
// The forward transform carries the 1/n^2 factor, so coefficient (0, 0) is
// the field mean, and Parseval reads ||f||_2^2 = L^2 sum |c_k|^2.

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace vstretch {

template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), std::align_val_t{Alignment}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{Alignment}); }
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator&) noexcept { return true; }
};

using RealBuffer = std::vector<double, AlignedAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

namespace detail {
struct GridData;
}

class Grid {
 public:
  /// Throws InvalidArgument unless n is a power of two >= 16 and box_length > 0.
  Grid(int n, double box_length);

  int n() const noexcept;
  double box_length() const noexcept;
  double spacing() const noexcept { return box_length() / n(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n()) * n(); }
  std::size_t index(int i1, int i2) const noexcept {
    return static_cast<std::size_t>(i2) * n() + i1;
  }

  /// Signed wavenumber for a lattice index, in [-n/2, n/2).
  int wavenumber(int index) const noexcept { return index < n() / 2 ? index : index - n(); }
  /// Angular frequency 2 pi k / L for a lattice index.
  double frequency(int index) const noexcept;
  /// Physical coordinate of a cell center along either axis.
  double coordinate(int index) const noexcept { return -0.5 * box_length() + index * spacing(); }

  /// Multiplier tables, one weight per lattice point in field layout.
  std::span<const double> z11_weights() const noexcept;
  std::span<const double> z22_weights() const noexcept;
  /// 1 where both |k_j| < n/3 (2/3 rule), 0 elsewhere.
  std::span<const double> dealias_weights() const noexcept;

  const detail::GridData& data() const noexcept { return *data_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n() == b.n() && a.box_length() == b.box_length();
  }

 private:
  std::shared_ptr<const detail::GridData> data_;
};

Grid make_grid(int n, double box_length);

class RealField {
 public:
  explicit RealField(Grid grid);
  RealField(Grid grid, RealBuffer values);

  template <class F>
  static RealField sample(const Grid& grid, F&& f) {
    RealField out(grid);
    for (int i2 = 0; i2 < grid.n(); ++i2)
      for (int i1 = 0; i1 < grid.n(); ++i1)
        out(i1, i2) = f(grid.coordinate(i1), grid.coordinate(i2));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i1, int i2) noexcept { return values_[grid_.index(i1, i2)]; }
  double operator()(int i1, int i2) const noexcept { return values_[grid_.index(i1, i2)]; }

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  RealBuffer values_;
};

class SpectralField {
 public:
  explicit SpectralField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<std::complex<double>> coefficients() noexcept { return coefficients_; }
  std::span<const std::complex<double>> coefficients() const noexcept { return coefficients_; }

  std::complex<double>& operator()(int k1, int k2) noexcept { return coefficients_[grid_.index(k1, k2)]; }
  std::complex<double> operator()(int k1, int k2) const noexcept {
    return coefficients_[grid_.index(k1, k2)];
  }

 private:
  Grid grid_;
  ComplexBuffer coefficients_;
};

SpectralField fft_forward(const RealField& f);

/// Inverse transform, keeping the real part. When `max_imag` is given it
/// receives the largest discarded imaginary part.
RealField fft_inverse(const SpectralField& F, double* max_imag = nullptr);

/// Inverse transform of m(lambda) f^(lambda) for a weight table in field layout.
RealField apply_multiplier(const RealField& f, std::span<const double> weights);

/// Z11 f, multiplier lambda1^2 / |lambda|^2 with m(0) = 0.
RealField apply_z11(const RealField& f);
/// Z22 f, multiplier lambda2^2 / |lambda|^2 with m(0) = 0.
RealField apply_z22(const RealField& f);
/// Spectral truncation to |k_j| < n/3.
RealField dealias(const RealField& f);

/// <Z11 f, f> evaluated on the Fourier side: L^2 sum m |f^|^2 >= 0.
double quadratic_form(const RealField& f);

/// Fraction of spectral mass on lattice points with 1/k < lambda1/lambda2 < k.
/// Throws InvalidArgument for a zero field or k <= 1.
double cone_mass_ratio(const RealField& f, double k);

// Grid-weighted reductions (h^2 times the plain sums).
double inner_product(const RealField& a, const RealField& b);
double l2_norm(const RealField& f);
double integral(const RealField& f);
double sup_norm(const RealField& f);

}  // namespace vstretch
