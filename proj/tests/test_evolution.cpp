#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "test_support.hpp"
#include "vstretch/evolution.hpp"
#include "vstretch/geometry.hpp"
#include "vstretch/profile.hpp"

using namespace vstretch;

namespace {

const ProfileSolution& disk_profile() {
  static const ProfileSolution sol =
      solve_profile(RestrictedOperator(rasterize(parse_shape("disk(0, 0, 1)"), Grid(64, 8.0))), 1e-12, 2000);
  return sol;
}

RealField scaled(const RealField& f, double s) {
  RealField out = f;
  for (double& v : out.values()) v *= s;
  return out;
}

EvolveConfig self_similar_config(double t_max) {
  EvolveConfig c;
  c.t_max = t_max;
  c.dealias = false;
  c.rtol = 1e-10;
  c.atol = 1e-14;
  return c;
}

}  // namespace

TEST_CASE("rhs examples") {
  const Grid g(64, 2.0 * std::numbers::pi);
  for (bool d : {false, true}) {
    CHECK(sup_norm(rhs(RealField(g), d)) == 0.0);
    const RealField s2 = RealField::sample(g, [](double, double x2) { return std::sin(3.0 * x2); });
    CHECK(sup_norm(rhs(s2, d)) <= 1e-13);
  }
  // (Z11 w) w for w = cos x1: cos^2 x1.
  const RealField c1 = RealField::sample(g, [](double x1, double) { return std::cos(x1); });
  const RealField sq = RealField::sample(g, [](double x1, double) { return std::cos(x1) * std::cos(x1); });
  CHECK(testing::max_abs_diff(rhs(c1, false), sq) <= 1e-13);
  CHECK(testing::max_abs_diff(rhs(c1, true), sq) <= 1e-13);
  CHECK(testing::max_abs_diff(rhs(c1, false, -1), scaled(sq, -1.0)) <= 1e-13);
}

TEST_CASE("rhs on the self-similar profile") {
  const ProfileSolution& sol = disk_profile();
  const ProfileReport rep = verify_profile(sol);
  const double T = 1.0, t = 0.3, s = 1.0 / (T - t);
  RealField diff = rhs(scaled(sol.q, s), false);
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values()[i] -= s * s * sol.q.values()[i];
  const double bound = sol.residual_l2 * std::sqrt(mask_area(sol.mask)) * rep.q_sup * s * s;
  CHECK(l2_norm(diff) <= bound * (1.0 + 1e-6) + 1e-14);
  CHECK(l2_norm(diff) == doctest::Approx(rep.defect_l2 * s * s).epsilon(1e-6));
}

TEST_CASE("step on a zero field grows dt") {
  const Grid g(32, 8.0);
  EvolveConfig c;
  const StepResult r = step(RealField(g), 1e-3, c);
  CHECK(sup_norm(r.omega) == 0.0);
  CHECK(r.dt_taken == 1e-3);
  CHECK(r.dt_next > r.dt_taken);
  CHECK(r.rejected == 0);
}

TEST_CASE("step underflow") {
  const Grid g(32, 8.0);
  EvolveConfig c;
  c.dt_min = 1e-3;
  c.dt_initial = 1e-3;
  c.rtol = 1e-14;
  c.atol = 0.0;
  const RealField w = gaussian_bump(g, 50.0, 0.3, 1.0);
  CHECK_THROWS_AS(step(w, 1e-3, c), StepUnderflow);
}

TEST_CASE("embedded error estimate scales like dt^5") {
  const Grid g(64, 8.0);
  const RealField w = RealField::sample(g, [](double x1, double x2) { return std::exp(-(x1 * x1 + x2 * x2) / 0.5); });
  double prev = rk_trial(w, 0.1, false).error_max;
  for (double dt : {0.05, 0.025}) {
    const double e = rk_trial(w, dt, false).error_max;
    const double order = std::log2(prev / e);
    CAPTURE(dt);
    CHECK(order > 4.6);
    CHECK(order < 5.6);
    prev = e;
  }
}

TEST_CASE("fixed steps on Q/T follow the scalar reduction a' = a^2") {
  // Classical Dormand-Prince tableau applied to the scalar ODE, written out
  // independently of the library.
  const auto scalar_step = [](double y, double h) {
    const auto f = [](double v) { return v * v; };
    const double k1 = f(y);
    const double k2 = f(y + h * (k1 / 5));
    const double k3 = f(y + h * (3 * k1 / 40 + 9 * k2 / 40));
    const double k4 = f(y + h * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9));
    const double k5 = f(y + h * (19372 * k1 / 6561 - 25360 * k2 / 2187 + 64448 * k3 / 6561 - 212 * k4 / 729));
    const double k6 =
        f(y + h * (9017 * k1 / 3168 - 355 * k2 / 33 + 46732 * k3 / 5247 + 49 * k4 / 176 - 5103 * k5 / 18656));
    return y + h * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 - 2187 * k5 / 6784 + 11 * k6 / 84);
  };
  const ProfileSolution& sol = disk_profile();
  for (int n : {2, 8}) {
    RealField w = sol.q;
    double a = 1.0;
    for (int i = 0; i < n; ++i) {
      w = rk_trial(w, 0.5 / n, false).solution;
      a = scalar_step(a, 0.5 / n);
    }
    // a Q written as Q / (T - t) with t = 0, T = 1/a.
    CHECK(self_similar_deviation(w, sol.q, 1.0 / a, 0.0) <= 1e-12);
  }
}

TEST_CASE("adaptive steps shrink in proportion to the time left") {
  const ProfileSolution& sol = disk_profile();
  EvolveConfig c = self_similar_config(2.0);
  c.rtol = 1e-8;
  c.atol = 1e-12;
  const EvolutionTrace tr = evolve(sol.q, c);
  REQUIRE(tr.terminated == Termination::BlowupThreshold);
  REQUIRE(tr.blowup_time_estimate.has_value());
  const double T = *tr.blowup_time_estimate;
  std::vector<double> ratios;
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
    const double left = T - tr.times[i];
    // Closer to T the uncertainty of the fitted T itself dominates T - t.
    if (left < 1e-3 || left > 0.2) continue;
    ratios.push_back((tr.times[i + 1] - tr.times[i]) / left);
  }
  REQUIRE(ratios.size() >= 10);
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  for (double r : ratios) {
    CHECK(r > 0.8 * median);
    CHECK(r < 1.2 * median);
  }
}

TEST_CASE("zero field runs flat to the horizon") {
  EvolveConfig c;
  c.t_max = 0.5;
  const EvolutionTrace tr = evolve(RealField(Grid(32, 8.0)), c);
  CHECK(tr.terminated == Termination::Horizon);
  CHECK(tr.times.back() == 0.5);
  CHECK_FALSE(tr.blowup_time_estimate.has_value());
  for (double s : tr.sup_norm) CHECK(s == 0.0);
}

TEST_CASE("self-similar solution Q/T") {
  const ProfileSolution& sol = disk_profile();
  SUBCASE("tracks Q/(1-t) and crosses the threshold before T") {
    const EvolveConfig c = self_similar_config(2.0);
    double worst = 0.0;
    const EvolutionTrace tr = evolve(sol.q, c, [&](double t, const RealField& w) {
      if (t <= 0.9) worst = std::max(worst, self_similar_deviation(w, sol.q, 1.0, t));
    });
    CHECK(worst <= 1e-3);
    CHECK(tr.terminated == Termination::BlowupThreshold);
    CHECK(tr.times.back() < 1.0);
    REQUIRE(tr.blowup_time_estimate.has_value());
    CHECK(std::abs(*tr.blowup_time_estimate - 1.0) <= 0.02);
    CHECK(tr.fit_quality >= 0.999);
    const double q_sup = sup_norm(sol.q);
    for (std::size_t i = 0; i < tr.size() && tr.times[i] <= 0.9; i += 5)
      CHECK(tr.sup_norm[i] == doctest::Approx(q_sup / (1.0 - tr.times[i])).epsilon(1e-3));
  }
  SUBCASE("a loosely solved profile drifts further") {
    const ProfileSolution loose = solve_profile(RestrictedOperator(sol.mask), 1e-4, 2000);
    const EvolveConfig c = self_similar_config(0.9);
    double tight_dev = 0.0, loose_dev = 0.0;
    evolve(sol.q, c, [&](double t, const RealField& w) { tight_dev = self_similar_deviation(w, sol.q, 1.0, t); });
    evolve(loose.q, c, [&](double t, const RealField& w) { loose_dev = self_similar_deviation(w, loose.q, 1.0, t); });
    MESSAGE("deviation at t = 0.9: tight " << tight_dev << ", loose " << loose_dev);
    CHECK(loose_dev > 10.0 * tight_dev);
  }
}

TEST_CASE("positive bump: discrete positivity and monotone mass") {
  const Grid g(64, 8.0);
  EvolveConfig c;
  c.t_max = 5.0;
  const EvolutionTrace tr = evolve(gaussian_bump(g, 1.0, 0.25, 1.0), c);
  CHECK(tr.terminated != Termination::Horizon);
  REQUIRE(tr.blowup_time_estimate.has_value());
  CHECK(std::isfinite(*tr.blowup_time_estimate));
  CHECK(tr.fit_quality >= 0.99);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.qform[i] >= -1e-10 * tr.l2_norm[i] * tr.l2_norm[i]);
    if (i > 0) CHECK(tr.integral[i] >= tr.integral[i - 1] - 1e-8 * std::abs(tr.integral[i - 1]));
  }
}

TEST_CASE("negative bump contrast run stays bounded") {
  const Grid g(64, 8.0);
  EvolveConfig c;
  c.t_max = 5.0;
  const EvolutionTrace tr = evolve(gaussian_bump(g, -1.0, 0.25, 1.0), c);
  CHECK(tr.terminated == Termination::Horizon);
  CHECK(tr.sup_norm.back() <= tr.sup_norm.front());
}

TEST_CASE("dealiasing is immaterial while the solution is resolved") {
  const Grid g(64, 8.0);
  const RealField w = RealField::sample(g, [](double x1, double x2) { return std::exp(-(x1 * x1 + x2 * x2) / 0.72); });
  EvolveConfig c;
  c.t_max = 0.2;
  RealField with(g), without(g);
  c.dealias = true;
  evolve(w, c, [&](double, const RealField& f) { with = f; });
  c.dealias = false;
  evolve(w, c, [&](double, const RealField& f) { without = f; });
  CHECK(testing::max_abs_diff(with, without) <= 1e-7 * sup_norm(with));
}

TEST_CASE("reversed nonlinearity is the negated flow") {
  const Grid g(32, 8.0);
  const RealField w = gaussian_bump(g, 1.0, 0.3, 1.0);
  EvolveConfig c;
  c.t_max = 0.3;
  RealField a(g), b(g);
  c.nonlinearity_sign = -1;
  evolve(w, c, [&](double, const RealField& f) { a = f; });
  c.nonlinearity_sign = 1;
  evolve(scaled(w, -1.0), c, [&](double, const RealField& f) { b = scaled(f, -1.0); });
  CHECK(testing::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("non-finite input is rejected") {
  RealField w(Grid(32, 8.0));
  w(4, 4) = std::nan("");
  CHECK_THROWS_AS(evolve(w, EvolveConfig{}), EvolutionError);
  EvolveConfig bad;
  bad.safety = 1.5;
  CHECK_THROWS_AS(evolve(RealField(Grid(32, 8.0)), bad), InvalidArgument);
}

TEST_CASE("blow-up time fit") {
  EvolutionTrace tr;
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.5 + 0.01 * i;
    tr.times.push_back(t);
    tr.sup_norm.push_back(1.0 / (1.0 - t));
  }
  const BlowupFit fit = estimate_blowup_time(tr, 1.0);
  CHECK(fit.T == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.fit_quality == doctest::Approx(1.0).epsilon(1e-12));

  EvolutionTrace flat = tr;
  flat.sup_norm[35] = flat.sup_norm[34];
  CHECK_THROWS_WITH(estimate_blowup_time(flat, 0.2), doctest::Contains("no blow-up trend"));

  EvolutionTrace shortened;
  shortened.times.assign(tr.times.begin(), tr.times.begin() + 5);
  shortened.sup_norm.assign(tr.sup_norm.begin(), tr.sup_norm.begin() + 5);
  CHECK_THROWS_WITH(estimate_blowup_time(shortened, 1.0), doctest::Contains("no blow-up trend"));
  CHECK_THROWS_AS(estimate_blowup_time(tr, 0.0), InvalidArgument);
}

TEST_CASE("self-similar deviation") {
  const ProfileSolution& sol = disk_profile();
  CHECK(self_similar_deviation(scaled(sol.q, 1.0 / 0.75), sol.q, 1.0, 0.25) <= 1e-15);
  CHECK(self_similar_deviation(scaled(sol.q, 1.1 / 0.75), sol.q, 1.0, 0.25) == doctest::Approx(0.1));
  CHECK_THROWS_AS(self_similar_deviation(sol.q, sol.q, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("trace csv") {
  EvolutionTrace tr;
  tr.times = {0.0, 0.5};
  tr.sup_norm = {1.0, 2.0};
  tr.integral = {0.25, 0.5};
  tr.l2_norm = {1.5, 3.0};
  tr.qform = {0.125, 0.0};
  std::ostringstream os;
  write_trace_csv(os, tr);
  CHECK(os.str() == "t,sup_norm,integral,l2_norm,qform\n0,1,0.25,1.5,0.125\n0.5,2,0.5,3,0\n");
}
