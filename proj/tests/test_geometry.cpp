#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vstretch/error.hpp"
#include "vstretch/geometry.hpp"

using namespace vstretch;

namespace {

std::size_t brute_force_count(const Grid& g, double cx, double cy, double r) {
  std::size_t count = 0;
  for (int i2 = 0; i2 < g.n(); ++i2)
    for (int i1 = 0; i1 < g.n(); ++i1) {
      const double dx = g.coordinate(i1) - cx, dy = g.coordinate(i2) - cy;
      count += dx * dx + dy * dy <= r * r;
    }
  return count;
}

double brute_force_diameter(const Mask& m) {
  const Grid& g = m.grid();
  double d = 0.0;
  for (std::size_t a : m.cells())
    for (std::size_t b : m.cells()) {
      const double dx = g.coordinate(static_cast<int>(a % g.n())) - g.coordinate(static_cast<int>(b % g.n()));
      const double dy = g.coordinate(static_cast<int>(a / g.n())) - g.coordinate(static_cast<int>(b / g.n()));
      d = std::max(d, std::hypot(dx, dy));
    }
  return d;
}

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.indicator().size(); ++i)
    if (a.indicator()[i] && !b.indicator()[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("unit disk on a 64 grid, box 16") {
  const Grid g(64, 16.0);
  const Mask m = rasterize(parse_shape("disk(0, 0, 1)"), g);
  CHECK(m.cell_count() == 49);
  CHECK(m.cell_count() == brute_force_count(g, 0.0, 0.0, 1.0));
  const double expected = std::numbers::pi / (g.spacing() * g.spacing());
  CHECK(std::abs(static_cast<double>(m.cell_count()) - expected) <= 0.1 * expected);
  CHECK(m.diameter() == doctest::Approx(2.0));
  CHECK(m(32, 32));
  CHECK(m(36, 32));
  CHECK_FALSE(m(37, 32));
}

TEST_CASE("aligned rectangle covering 4x4 cells") {
  const Grid g(64, 16.0);
  const double h = g.spacing();
  const Mask m = rasterize(ShapeSpec{Rectangle{{-0.5 * h, -0.5 * h}, {4.0 * h, 4.0 * h}}}, g);
  CHECK(m.cell_count() == 16);
  CHECK(mask_area(m) == doctest::Approx(16.0 * h * h));
}

TEST_CASE("rasterization errors") {
  const Grid g(64, 16.0);
  CHECK_THROWS_AS(rasterize(parse_shape("disk(0, 0, 10)"), g), GeometryError);
  // Diameter 4.5 exceeds 16/4.
  CHECK_THROWS_AS(rasterize(parse_shape("disk(0, 0, 2.25)"), g), GeometryError);
  // Smaller than a cell and away from every center.
  CHECK_THROWS_AS(rasterize(parse_shape("disk(0.1, 0.1, 0.05)"), g), GeometryError);
  CHECK_THROWS_AS(validate(parse_shape("annulus(0, 0, 1, 0.5)")), GeometryError);
  CHECK_THROWS_AS(parse_shape("disk(0, 0, -1)"), GeometryError);
}

TEST_CASE("mask area") {
  const Grid g(64, 16.0);
  CHECK(mask_area(Mask::full(g)) == doctest::Approx(256.0));
  std::vector<std::uint8_t> one(g.size(), 0);
  one[g.index(3, 9)] = 1;
  const Mask single = Mask::from_indicator(g, one);
  CHECK(mask_area(single) == doctest::Approx(g.spacing() * g.spacing()));
  CHECK(single.diameter() == 0.0);
  CHECK_THROWS_AS(Mask::from_indicator(g, std::vector<std::uint8_t>(g.size(), 0)), GeometryError);

  const double coarse = mask_area(rasterize(parse_shape("disk(0, 0, 1)"), g));
  CHECK(std::abs(coarse - std::numbers::pi) <= 0.1 * std::numbers::pi);
  const double fine = mask_area(rasterize(parse_shape("disk(0, 0, 1)"), Grid(256, 16.0)));
  CHECK(std::abs(fine - std::numbers::pi) <= 0.02 * std::numbers::pi);
}

TEST_CASE("rasterization is monotone under inclusion") {
  const Grid g(128, 16.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-0.5, 0.5), r(0.2, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double cx = c(rng), cy = c(rng), r1 = r(rng), r2 = r1 + 0.5 * r(rng);
    const Mask small = rasterize(ShapeSpec{Disk{{cx, cy}, r1}}, g);
    const Mask big = rasterize(ShapeSpec{Disk{{cx, cy}, r2}}, g);
    CHECK(subset(small, big));
    const Mask hole = rasterize(make_difference(ShapeSpec{Disk{{cx, cy}, r2}}, ShapeSpec{Disk{{cx, cy}, r1}}), g);
    CHECK(subset(hole, big));
    CHECK(hole.cell_count() + small.cell_count() == big.cell_count());
  }
}

TEST_CASE("diameter matches pairwise brute force") {
  const Grid g(64, 16.0);
  for (const char* text : {"ellipse(0.3, -0.2, 1.5, 0.5)", "rect(-1, -0.7, 1.3, 2.1)", "annulus(0, 0, 0.5, 1.25)",
                           "union(disk(-1, 0, 0.5), disk(1.2, 0.4, 0.3))", "difference(disk(0,0,1), rect(0,-1,1,2))"}) {
    CAPTURE(text);
    const Mask m = rasterize(parse_shape(text), g);
    CHECK(m.diameter() == doctest::Approx(brute_force_diameter(m)).epsilon(1e-12));
  }
}

TEST_CASE("shape text round trip") {
  for (const char* text : {"disk(0, 0, 1)", "ellipse(0.25, -1, 2, 0.5)", "rect(-1, -1, 2, 0.125)",
                           "annulus(0, 0, 0.5, 1)", "union(disk(0, 0, 1), rect(1, 1, 0.5, 0.5))",
                           "difference(disk(0, 0, 1), disk(0.25, 0, 0.25))"}) {
    CAPTURE(text);
    const ShapeSpec s = parse_shape(text);
    const ShapeSpec again = parse_shape(to_string(s));
    CHECK(to_string(again) == to_string(s));
    for (double x = -1.5; x <= 1.5; x += 0.1)
      for (double y = -1.5; y <= 1.5; y += 0.1) CHECK(contains(s, x, y) == contains(again, x, y));
  }
}

TEST_CASE("parser errors name the column") {
  auto message = [](const char* text) {
    try {
      parse_shape(text);
    } catch (const GeometryError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("disc(0, 0, 1)").find("column 1") != std::string::npos);
  CHECK(message("disk(0, 0 1)").find("column") != std::string::npos);
  CHECK_FALSE(message("disk(0, 0)").empty());
  CHECK_FALSE(message("disk(0, 0, 1) trailing").empty());
  CHECK_FALSE(message("union()").empty());
}

TEST_CASE("closed sets include their boundary") {
  CHECK(contains(parse_shape("disk(0, 0, 1)"), 1.0, 0.0));
  CHECK(contains(parse_shape("rect(0, 0, 1, 1)"), 1.0, 1.0));
  CHECK(contains(parse_shape("annulus(0, 0, 0.5, 1)"), 0.5, 0.0));
  CHECK_FALSE(contains(parse_shape("annulus(0, 0, 0.5, 1)"), 0.25, 0.0));
  CHECK_FALSE(contains(parse_shape("difference(disk(0,0,1), disk(0,0,0.5))"), 0.5, 0.0));
}
