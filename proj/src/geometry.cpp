#include "vstretch/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "vstretch/error.hpp"

namespace vstretch {

ShapeSpec make_difference(ShapeSpec keep, ShapeSpec remove) {
  return ShapeSpec{Difference{std::make_shared<const ShapeSpec>(std::move(keep)),
                              std::make_shared<const ShapeSpec>(std::move(remove))}};
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw GeometryError(std::string(what) + " must be positive");
}

}  // namespace

void validate(const ShapeSpec& spec) {
  std::visit(overloaded{
                 [](const Disk& d) { require_positive(d.radius, "disk radius"); },
                 [](const Ellipse& e) {
                   require_positive(e.semi_axes[0], "ellipse semi-axis");
                   require_positive(e.semi_axes[1], "ellipse semi-axis");
                 },
                 [](const Rectangle& r) {
                   require_positive(r.widths[0], "rectangle width");
                   require_positive(r.widths[1], "rectangle width");
                 },
                 [](const Annulus& a) {
                   require_positive(a.inner_radius, "annulus inner radius");
                   require_positive(a.outer_radius, "annulus outer radius");
                   if (!(a.inner_radius < a.outer_radius))
                     throw GeometryError("annulus inner radius must be below outer radius");
                 },
                 [](const Union& u) {
                   if (u.parts.empty()) throw GeometryError("union needs at least one part");
                   for (const auto& p : u.parts) validate(p);
                 },
                 [](const Difference& d) {
                   if (!d.keep || !d.remove) throw GeometryError("difference needs two operands");
                   validate(*d.keep);
                   validate(*d.remove);
                 },
             },
             spec.shape);
}

bool contains(const ShapeSpec& spec, double x1, double x2) {
  return std::visit(
      overloaded{
          [&](const Disk& d) {
            const double a = x1 - d.center[0], b = x2 - d.center[1];
            return a * a + b * b <= d.radius * d.radius;
          },
          [&](const Ellipse& e) {
            const double a = (x1 - e.center[0]) / e.semi_axes[0];
            const double b = (x2 - e.center[1]) / e.semi_axes[1];
            return a * a + b * b <= 1.0;
          },
          [&](const Rectangle& r) {
            return x1 >= r.corner[0] && x1 <= r.corner[0] + r.widths[0] && x2 >= r.corner[1] &&
                   x2 <= r.corner[1] + r.widths[1];
          },
          [&](const Annulus& a) {
            const double u = x1 - a.center[0], v = x2 - a.center[1];
            const double r2 = u * u + v * v;
            return r2 >= a.inner_radius * a.inner_radius && r2 <= a.outer_radius * a.outer_radius;
          },
          [&](const Union& u) {
            return std::any_of(u.parts.begin(), u.parts.end(),
                               [&](const ShapeSpec& p) { return contains(p, x1, x2); });
          },
          [&](const Difference& d) { return contains(*d.keep, x1, x2) && !contains(*d.remove, x1, x2); },
      },
      spec.shape);
}

// ---------------------------------------------------------------------------
// Text form

namespace {

class ShapeParser {
 public:
  explicit ShapeParser(std::string_view text) : text_(text) {}

  ShapeSpec parse() {
    ShapeSpec s = shape();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw GeometryError("shape syntax error at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected shape name");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_space();
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || !std::isfinite(v)) fail("expected number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  std::vector<double> numbers(std::size_t count) {
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) expect(',');
      out.push_back(number());
    }
    return out;
  }

  ShapeSpec shape() {
    skip_space();
    const std::size_t start = pos_;
    const std::string name = identifier();
    static constexpr std::string_view kKnown[] = {"disk", "ellipse", "rect", "annulus", "union", "difference"};
    if (std::find(std::begin(kKnown), std::end(kKnown), name) == std::end(kKnown)) {
      pos_ = start;
      fail("unknown shape '" + name + "'");
    }
    expect('(');
    ShapeSpec s;
    if (name == "disk") {
      auto v = numbers(3);
      s.shape = Disk{{v[0], v[1]}, v[2]};
    } else if (name == "ellipse") {
      auto v = numbers(4);
      s.shape = Ellipse{{v[0], v[1]}, {v[2], v[3]}};
    } else if (name == "rect") {
      auto v = numbers(4);
      s.shape = Rectangle{{v[0], v[1]}, {v[2], v[3]}};
    } else if (name == "annulus") {
      auto v = numbers(4);
      s.shape = Annulus{{v[0], v[1]}, v[2], v[3]};
    } else if (name == "union") {
      Union u;
      u.parts.push_back(shape());
      while (accept(',')) u.parts.push_back(shape());
      s.shape = std::move(u);
    } else if (name == "difference") {
      ShapeSpec keep = shape();
      expect(',');
      ShapeSpec remove = shape();
      s = make_difference(std::move(keep), std::move(remove));
    } else {
      fail("unknown shape '" + name + "'");
    }
    expect(')');
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_number(std::ostringstream& os, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, ptr - buf);
}

void write_shape(std::ostringstream& os, const ShapeSpec& spec) {
  auto list = [&](const char* name, std::initializer_list<double> values) {
    os << name << '(';
    bool first = true;
    for (double v : values) {
      if (!first) os << ", ";
      write_number(os, v);
      first = false;
    }
    os << ')';
  };
  std::visit(overloaded{
                 [&](const Disk& d) { list("disk", {d.center[0], d.center[1], d.radius}); },
                 [&](const Ellipse& e) {
                   list("ellipse", {e.center[0], e.center[1], e.semi_axes[0], e.semi_axes[1]});
                 },
                 [&](const Rectangle& r) {
                   list("rect", {r.corner[0], r.corner[1], r.widths[0], r.widths[1]});
                 },
                 [&](const Annulus& a) {
                   list("annulus", {a.center[0], a.center[1], a.inner_radius, a.outer_radius});
                 },
                 [&](const Union& u) {
                   os << "union(";
                   for (std::size_t i = 0; i < u.parts.size(); ++i) {
                     if (i > 0) os << ", ";
                     write_shape(os, u.parts[i]);
                   }
                   os << ')';
                 },
                 [&](const Difference& d) {
                   os << "difference(";
                   write_shape(os, *d.keep);
                   os << ", ";
                   write_shape(os, *d.remove);
                   os << ')';
                 },
             },
             spec.shape);
}

// Diameter of a point set: convex hull (monotone chain) then all hull pairs.
double point_set_diameter(std::vector<std::array<double, 2>> pts) {
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end());
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j)
      best = std::max(best, std::hypot(hull[i][0] - hull[j][0], hull[i][1] - hull[j][1]));
  return best;
}

}  // namespace

ShapeSpec parse_shape(std::string_view text) {
  ShapeSpec s = ShapeParser(text).parse();
  validate(s);
  return s;
}

std::string to_string(const ShapeSpec& spec) {
  std::ostringstream os;
  write_shape(os, spec);
  return os.str();
}

// ---------------------------------------------------------------------------
// Mask

Mask::Mask(Grid grid, std::vector<std::uint8_t> indicator)
    : grid_(std::move(grid)), indicator_(std::move(indicator)) {
  if (indicator_.size() != grid_.size()) throw GeometryError("indicator size does not match grid");
  std::vector<std::array<double, 2>> centers;
  for (std::size_t idx = 0; idx < indicator_.size(); ++idx) {
    if (indicator_[idx] == 0) continue;
    indicator_[idx] = 1;
    cells_.push_back(idx);
    const int i1 = static_cast<int>(idx % grid_.n());
    const int i2 = static_cast<int>(idx / grid_.n());
    centers.push_back({grid_.coordinate(i1), grid_.coordinate(i2)});
  }
  if (cells_.empty()) throw GeometryError("mask is empty");
  diameter_ = point_set_diameter(std::move(centers));
}

Mask Mask::from_indicator(Grid grid, std::vector<std::uint8_t> indicator) {
  return Mask(std::move(grid), std::move(indicator));
}

Mask Mask::full(const Grid& grid) { return Mask(grid, std::vector<std::uint8_t>(grid.size(), 1)); }

RealField Mask::as_field() const {
  RealField f(grid_);
  for (std::size_t idx : cells_) f.values()[idx] = 1.0;
  return f;
}

Mask rasterize(const ShapeSpec& spec, const Grid& grid) {
  validate(spec);
  std::vector<std::uint8_t> indicator(grid.size(), 0);
  bool any = false;
  for (int i2 = 0; i2 < grid.n(); ++i2)
    for (int i1 = 0; i1 < grid.n(); ++i1)
      if (contains(spec, grid.coordinate(i1), grid.coordinate(i2))) {
        indicator[grid.index(i1, i2)] = 1;
        any = true;
      }
  if (!any) throw GeometryError("shape " + to_string(spec) + " covers no cell center");
  Mask mask = Mask::from_indicator(grid, std::move(indicator));
  if (mask.diameter() > grid.box_length() / 4.0) {
    std::ostringstream os;
    os << "shape diameter " << mask.diameter() << " exceeds box_length/4 = " << grid.box_length() / 4.0;
    throw GeometryError(os.str());
  }
  return mask;
}

double mask_area(const Mask& mask) {
  const double h = mask.grid().spacing();
  return static_cast<double>(mask.cell_count()) * h * h;
}

}  // namespace vstretch
