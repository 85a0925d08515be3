#pragma once

// Bounded sets A in the plane and their rasterization to grid masks.
//
// Shapes are closed sets: a cell belongs to the mask iff its center lies in
// the shape, boundary included. Text form (used in config files):
//
//   disk(cx, cy, r)
//   ellipse(cx, cy, a, b)         semi-axes along x1 and x2
//   rect(x0, y0, w, h)            lower-left corner and widths
//   annulus(cx, cy, r_in, r_out)
//   union(s1, s2, ...)
//   difference(s1, s2)            s1 minus s2

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vstretch/grid.hpp"

namespace vstretch {

struct ShapeSpec;

struct Disk {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 1.0;
};
struct Ellipse {
  std::array<double, 2> center{0.0, 0.0};
  std::array<double, 2> semi_axes{1.0, 1.0};
};
struct Rectangle {
  std::array<double, 2> corner{0.0, 0.0};
  std::array<double, 2> widths{1.0, 1.0};
};
struct Annulus {
  std::array<double, 2> center{0.0, 0.0};
  double inner_radius = 0.5;
  double outer_radius = 1.0;
};
struct Union {
  std::vector<ShapeSpec> parts;
};
struct Difference {
  std::shared_ptr<const ShapeSpec> keep;
  std::shared_ptr<const ShapeSpec> remove;
};

struct ShapeSpec {
  std::variant<Disk, Ellipse, Rectangle, Annulus, Union, Difference> shape;
};

ShapeSpec make_difference(ShapeSpec keep, ShapeSpec remove);

/// Throws GeometryError for nonpositive radii/widths, inner >= outer radius,
/// or empty unions.
void validate(const ShapeSpec& spec);

bool contains(const ShapeSpec& spec, double x1, double x2);

/// Parses the text form above. Throws GeometryError naming the offending
/// column on syntax errors.
ShapeSpec parse_shape(std::string_view text);
std::string to_string(const ShapeSpec& spec);

class Mask {
 public:
  /// Builds a mask from a 0/1 indicator in field layout. Computes cell count
  /// and diameter; rejects an empty indicator. No box-size constraint.
  static Mask from_indicator(Grid grid, std::vector<std::uint8_t> indicator);
  static Mask full(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const std::uint8_t> indicator() const noexcept { return indicator_; }
  bool operator()(int i1, int i2) const noexcept { return indicator_[grid_.index(i1, i2)] != 0; }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  /// Flat field indices of the member cells, ascending.
  std::span<const std::size_t> cells() const noexcept { return cells_; }
  /// Maximal distance between member cell centers.
  double diameter() const noexcept { return diameter_; }

  /// Mask as a 0/1 real field.
  RealField as_field() const;

 private:
  Mask(Grid grid, std::vector<std::uint8_t> indicator);

  Grid grid_;
  std::vector<std::uint8_t> indicator_;
  std::vector<std::size_t> cells_;
  double diameter_ = 0.0;
};

/// Cell-center rasterization. Throws GeometryError when no cell center falls
/// inside the shape or when diameter > box_length / 4.
Mask rasterize(const ShapeSpec& spec, const Grid& grid);

/// cell_count * h^2.
double mask_area(const Mask& mask);

}  // namespace vstretch
