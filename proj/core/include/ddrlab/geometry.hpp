#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ddrlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VertexId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;

// Lengths and distances live on the dyadic grid k * 2^-40. Sums and
// differences of such numbers below 2^12 are exact in binary64, which makes
// the graph metric and every distance difference matrix exactly additive.
inline constexpr double kLengthQuantum = 0x1p-40;

inline double quantize_length(double x) {
  const double scaled = x * 0x1p40;
  // Adding and subtracting 1.5 * 2^52 rounds to nearest even without a libm call.
  if (std::abs(scaled) < 0x1p51) return ((scaled + 0x1.8p52) - 0x1.8p52) * kLengthQuantum;
  return std::nearbyint(scaled) * kLengthQuantum;
}

inline double metric_norm(const Mat2& g, const Vec2& v) {
  return std::sqrt(v.dot(g * v));
}

inline double metric_dot(const Mat2& g, const Vec2& u, const Vec2& v) {
  return u.dot(g * v);
}

inline double polar_angle(const Vec2& v) { return std::atan2(v.y(), v.x()); }

inline Mat2 rotation(double angle) {
  Mat2 r;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

enum class DomainKind { disk, annulus, dumbbell, polygon };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// A closed boundary curve parametrized over s in [0, 1). Outer loops run
/// counter-clockwise and holes clockwise, so the domain lies to the left.
struct BoundaryCurve {
  std::function<Vec2(double)> point;
  bool is_hole = false;
};

/// Planar region with piecewise smooth boundary. All queries accept a
/// tolerance that admits points up to `tol` outside the closed region.
class Shape {
 public:
  static Shape disk(double radius = 1.0);
  static Shape annulus(double inner_radius, double outer_radius = 1.0);
  /// Star-shaped peanut r(theta) = base + amplitude * cos(2 theta); two lobes
  /// on the x axis joined by a concave neck on the y axis.
  static Shape dumbbell(double base = 0.65, double amplitude = 0.35);
  static Shape polygon(std::vector<Vec2> outer,
                       std::vector<std::vector<Vec2>> holes = {});

  DomainKind kind() const { return kind_; }
  /// Compact descriptor, e.g. "annulus:0.3"; parsed back by from_descriptor.
  std::string descriptor() const;
  static Shape from_descriptor(const std::string& text);

  /// Positive inside, negative outside; exact for circles and polygons,
  /// first-order accurate near the curve for the dumbbell.
  double signed_distance(const Vec2& p) const;
  bool contains(const Vec2& p, double tol = 0.0) const {
    return signed_distance(p) >= -tol;
  }
  bool segment_inside(const Vec2& a, const Vec2& b, double tol) const;
  /// Nearest point of the closed region (identity for inside points).
  Vec2 project_inside(const Vec2& p) const;

  std::vector<BoundaryCurve> boundary_curves() const;
  void bounding_box(Vec2& lo, Vec2& hi) const;

  double inner_radius() const { return r_in_; }
  double outer_radius() const { return r_out_; }

 private:
  double dumbbell_radius(double theta) const;

  DomainKind kind_ = DomainKind::disk;
  double r_in_ = 0.0;
  double r_out_ = 1.0;
  double base_ = 0.65;
  double amplitude_ = 0.35;
  std::vector<std::vector<Vec2>> rings_;  // polygon: outer ring first
};

}  // namespace ddrlab
