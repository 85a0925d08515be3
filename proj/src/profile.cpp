#include "vstretch/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vstretch/lanczos.hpp"
#include "vstretch/simd/kernels.hpp"

namespace vstretch {

RestrictedOperator::RestrictedOperator(Mask mask) : mask_(std::move(mask)) {}

std::vector<double> RestrictedOperator::restrict_to_mask(const RealField& f) const {
  if (!(f.grid() == grid())) throw InvalidArgument("field and mask live on different grids");
  std::vector<double> x(dimension());
  const auto cells = mask_.cells();
  const auto values = f.values();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = values[cells[i]];
  return x;
}

RealField RestrictedOperator::extend_by_zero(std::span<const double> x) const {
  if (x.size() != dimension()) throw InvalidArgument("vector length does not match mask");
  RealField f(grid());
  const auto cells = mask_.cells();
  auto values = f.values();
  for (std::size_t i = 0; i < x.size(); ++i) values[cells[i]] = x[i];
  return f;
}

void RestrictedOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dimension() || y.size() != dimension())
    throw InvalidArgument("vector length does not match mask");
  // Zero-extend, multiply by lambda1^2/|lambda|^2 on the Fourier side, restrict.
  RealField ext = extend_by_zero(x);
  RealField out = apply_z11(ext);
  const auto cells = mask_.cells();
  const auto values = out.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = values[cells[i]];
}

RealField apply_L(const RestrictedOperator& op, const RealField& phi) {
  if (!(phi.grid() == op.grid())) throw InvalidArgument("field and mask live on different grids");
  const auto ind = op.mask().indicator();
  const auto v = phi.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (ind[i] == 0 && v[i] != 0.0) throw InvalidArgument("apply_L: field is nonzero off the mask");
  const std::vector<double> x = op.restrict_to_mask(phi);
  std::vector<double> y(x.size());
  op.apply(x, y);
  return op.extend_by_zero(y);
}

Eigen::MatrixXd dense_L_matrix(const RestrictedOperator& op) {
  const std::size_t c = op.dimension();
  if (c > kDenseCellLimit)
    throw InvalidArgument("dense_L_matrix: " + std::to_string(c) + " cells exceeds the limit of " +
                          std::to_string(kDenseCellLimit));
  const Grid& g = op.grid();
  const int n = g.n();
  // Convolution kernel K(d) = n^-2 sum_k m(k) exp(2 pi i k.d / n).
  SpectralField m(g);
  const auto w = g.z11_weights();
  const double norm = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) m.coefficients()[i] = w[i] * norm;
  const RealField kernel = fft_inverse(m);

  const auto cells = op.mask().cells();
  Eigen::MatrixXd L(c, c);
  for (std::size_t a = 0; a < c; ++a) {
    const int a1 = static_cast<int>(cells[a] % n), a2 = static_cast<int>(cells[a] / n);
    for (std::size_t b = 0; b < c; ++b) {
      const int b1 = static_cast<int>(cells[b] % n), b2 = static_cast<int>(cells[b] / n);
      const int d1 = ((a1 - b1) % n + n) % n;
      const int d2 = ((a2 - b2) % n + n) % n;
      L(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = kernel(d1, d2);
    }
  }
  return L;
}

double estimate_coercivity(const RestrictedOperator& op, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("coercivity tolerance must be positive");
  const std::size_t dim = op.dimension();
  const LinearMap apply = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  const LanczosResult r = lanczos_smallest(dim, apply, tol, static_cast<int>(2 * dim));
  if (r.value <= 10.0 * std::numeric_limits<double>::epsilon())
    throw Error("singular", "operator numerically singular (smallest eigenvalue estimate " +
                                std::to_string(r.value) + ")");
  return std::min(r.value, 1.0);
}

namespace {

double norm2(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

// ||b - A x|| written into r.
double true_residual(const RestrictedOperator& op, std::span<const double> b, std::span<const double> x,
                     std::span<double> r) {
  op.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r);
}

}  // namespace

ProfileSolution solve_profile(const RestrictedOperator& op, double tol, int max_iter, double coercivity_tol) {
  if (!(tol > 0.0 && tol < 1e-2)) throw InvalidArgument("solver tolerance must lie in (0, 1e-2)");
  if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
  const Grid& g = op.grid();
  const Mask& mask = op.mask();
  if (mask.diameter() > g.box_length() / 4.0) {
    std::ostringstream os;
    os << "mask diameter " << mask.diameter() << " exceeds box_length/4 = " << g.box_length() / 4.0;
    if (mask.cell_count() == g.size()) os << " (full torus: the constant right-hand side lies on the removed zero mode)";
    throw InvalidArgument(os.str());
  }

  constexpr int kTrueResidualStride = 25;
  const std::size_t dim = op.dimension();
  const std::vector<double> b(dim, 1.0);
  const double b_norm = norm2(b);

  std::vector<double> x(dim, 0.0), r = b, p = r, ap(dim), scratch(dim);
  std::vector<double> best_x = x;
  double best_residual = 1.0;
  double rr = simd::dot(r, r);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(max_iter));

  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, ap);
    const double curvature = simd::dot(p, ap);
    if (!(curvature > 0.0)) {
      std::ostringstream os;
      os << "CG breakdown at iteration " << it << ": nonpositive curvature " << curvature;
      throw SolveError(os.str(), op.extend_by_zero(best_x), best_residual, std::move(history), it);
    }
    const double alpha = rr / curvature;
    simd::axpy(alpha, p, x);
    simd::axpy(-alpha, ap, r);
    double rr_new = simd::dot(r, r);
    history.push_back(std::sqrt(rr_new) / b_norm);

    const bool candidate = std::sqrt(rr_new) <= tol * b_norm;
    if (candidate || it % kTrueResidualStride == 0) {
      const double true_norm = true_residual(op, b, x, scratch);
      const double rel = true_norm / b_norm;
      if (rel < best_residual) {
        best_residual = rel;
        best_x = x;
      }
      r = scratch;
      rr_new = true_norm * true_norm;
      if (rel <= tol) {
        ProfileSolution sol{op.extend_by_zero(x), mask, rel, it, 0.0, std::move(history)};
        sol.delta_estimate = estimate_coercivity(op, coercivity_tol);
        return sol;
      }
    }
    simd::xpby(r, rr_new / rr, p);
    rr = rr_new;
  }
  const double final_residual = true_residual(op, b, x, scratch) / b_norm;
  if (final_residual < best_residual) {
    best_residual = final_residual;
    best_x = x;
  }
  std::ostringstream os;
  os << "CG did not converge in " << max_iter << " iterations (best relative residual " << best_residual << ")";
  throw SolveError(os.str(), op.extend_by_zero(best_x), best_residual, std::move(history), max_iter);
}

ProfileReport verify_profile(const RealField& q, const Mask& mask) {
  if (!(q.grid() == mask.grid())) throw InvalidArgument("profile and mask live on different grids");
  const Grid& g = q.grid();
  const double h2 = g.spacing() * g.spacing();
  const RealField zq = apply_z11(q);
  const auto ind = mask.indicator();
  const auto qv = q.values();
  const auto zv = zq.values();

  ProfileReport rep;
  double dev2 = 0.0, defect2 = 0.0;
  rep.q_min = std::numeric_limits<double>::infinity();
  rep.q_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < qv.size(); ++i) {
    const double defect = zv[i] * qv[i] - qv[i];
    defect2 += defect * defect;
    rep.defect_max = std::max(rep.defect_max, std::abs(defect));
    if (ind[i] != 0) {
      const double d = zv[i] - 1.0;
      dev2 += d * d;
      rep.on_mask_max_deviation = std::max(rep.on_mask_max_deviation, std::abs(d));
      rep.q_min = std::min(rep.q_min, qv[i]);
      rep.q_max = std::max(rep.q_max, qv[i]);
    } else {
      rep.off_mask_max = std::max(rep.off_mask_max, std::abs(qv[i]));
    }
  }
  rep.off_mask_exact_zero = rep.off_mask_max == 0.0;
  rep.on_mask_l2_deviation = std::sqrt(h2 * dev2);
  rep.on_mask_relative_l2 = std::sqrt(dev2 / static_cast<double>(mask.cell_count()));
  rep.defect_l2 = std::sqrt(h2 * defect2);
  rep.q_l2 = l2_norm(q);
  rep.q_sup = sup_norm(q);
  return rep;
}

}  // namespace vstretch
