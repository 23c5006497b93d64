#include "ddrlab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ddrlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

// Strict crossing of two segments; touching within `tol` does not count.
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                    double tol) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  const double s1 = tol * (b - a).norm();
  const double s2 = tol * (d - c).norm();
  return ((d1 > s1 && d2 < -s1) || (d1 < -s1 && d2 > s1)) &&
         ((d3 > s2 && d4 < -s2) || (d3 < -s2 && d4 > s2));
}

double signed_area(const std::vector<Vec2>& ring) {
  double area = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    area += cross(ring[i], ring[(i + 1) % ring.size()]);
  }
  return 0.5 * area;
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disk: return "disk";
    case DomainKind::annulus: return "annulus";
    case DomainKind::dumbbell: return "dumbbell";
    case DomainKind::polygon: return "polygon";
  }
  return "disk";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "disk") return DomainKind::disk;
  if (name == "annulus") return DomainKind::annulus;
  if (name == "dumbbell") return DomainKind::dumbbell;
  if (name == "polygon") return DomainKind::polygon;
  throw std::invalid_argument("unknown domain kind: " + name);
}

Shape Shape::disk(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  Shape s;
  s.kind_ = DomainKind::disk;
  s.r_out_ = radius;
  return s;
}

Shape Shape::annulus(double inner_radius, double outer_radius) {
  if (!(inner_radius > 0.0 && inner_radius < outer_radius)) {
    throw std::invalid_argument("annulus needs 0 < r_in < r_out");
  }
  Shape s;
  s.kind_ = DomainKind::annulus;
  s.r_in_ = inner_radius;
  s.r_out_ = outer_radius;
  return s;
}

Shape Shape::dumbbell(double base, double amplitude) {
  if (!(amplitude >= 0.0 && base - amplitude > 0.0)) {
    throw std::invalid_argument("dumbbell needs base > amplitude >= 0");
  }
  Shape s;
  s.kind_ = DomainKind::dumbbell;
  s.base_ = base;
  s.amplitude_ = amplitude;
  s.r_out_ = base + amplitude;
  return s;
}

Shape Shape::polygon(std::vector<Vec2> outer, std::vector<std::vector<Vec2>> holes) {
  if (outer.size() < 3) throw std::invalid_argument("polygon needs >= 3 vertices");
  if (signed_area(outer) < 0.0) std::reverse(outer.begin(), outer.end());
  Shape s;
  s.kind_ = DomainKind::polygon;
  s.rings_.push_back(std::move(outer));
  for (auto& hole : holes) {
    if (hole.size() < 3) throw std::invalid_argument("hole needs >= 3 vertices");
    if (signed_area(hole) > 0.0) std::reverse(hole.begin(), hole.end());
    s.rings_.push_back(std::move(hole));
  }
  return s;
}

std::string Shape::descriptor() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case DomainKind::disk:
      out << "disk";
      if (r_out_ != 1.0) out << ':' << r_out_;
      break;
    case DomainKind::annulus:
      out << "annulus:" << r_in_;
      if (r_out_ != 1.0) out << ':' << r_out_;
      break;
    case DomainKind::dumbbell:
      out << "dumbbell:" << base_ << ':' << amplitude_;
      break;
    case DomainKind::polygon:
      out << "polygon";
      for (const auto& ring : rings_) {
        out << '|';
        for (std::size_t i = 0; i < ring.size(); ++i) {
          if (i) out << ';';
          out << ring[i].x() << ',' << ring[i].y();
        }
      }
      break;
  }
  return out.str();
}

Shape Shape::from_descriptor(const std::string& text) {
  std::vector<std::string> parts;
  const char sep = text.rfind("polygon", 0) == 0 ? '|' : ':';
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  const std::string& head = parts.front();
  if (head == "disk") return disk(parts.size() > 1 ? std::stod(parts[1]) : 1.0);
  if (head == "annulus") {
    if (parts.size() < 2) throw std::invalid_argument("annulus descriptor needs r_in");
    return annulus(std::stod(parts[1]), parts.size() > 2 ? std::stod(parts[2]) : 1.0);
  }
  if (head == "dumbbell") {
    if (parts.size() < 3) throw std::invalid_argument("dumbbell descriptor needs base:amplitude");
    return dumbbell(std::stod(parts[1]), std::stod(parts[2]));
  }
  if (head == "polygon") {
    std::vector<std::vector<Vec2>> rings;
    for (std::size_t r = 1; r < parts.size(); ++r) {
      std::vector<Vec2> ring;
      std::istringstream in(parts[r]);
      std::string pt;
      while (std::getline(in, pt, ';')) {
        const auto comma = pt.find(',');
        ring.emplace_back(std::stod(pt.substr(0, comma)), std::stod(pt.substr(comma + 1)));
      }
      rings.push_back(std::move(ring));
    }
    if (rings.empty()) throw std::invalid_argument("polygon descriptor has no rings");
    auto outer = std::move(rings.front());
    rings.erase(rings.begin());
    return polygon(std::move(outer), std::move(rings));
  }
  throw std::invalid_argument("unknown shape descriptor: " + text);
}

double Shape::dumbbell_radius(double theta) const {
  return base_ + amplitude_ * std::cos(2.0 * theta);
}

double Shape::signed_distance(const Vec2& p) const {
  switch (kind_) {
    case DomainKind::disk:
      return r_out_ - p.norm();
    case DomainKind::annulus: {
      const double r = p.norm();
      return std::min(r_out_ - r, r - r_in_);
    }
    case DomainKind::dumbbell: {
      const double rho = p.norm();
      if (rho == 0.0) return base_ - amplitude_;
      const double theta = polar_angle(p);
      const double r = dumbbell_radius(theta);
      const double dr = -2.0 * amplitude_ * std::sin(2.0 * theta);
      return (r - rho) / std::sqrt(1.0 + (dr * dr) / (r * r));
    }
    case DomainKind::polygon: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ring : rings_) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
          best = std::min(best, distance_to_segment(p, ring[i], ring[(i + 1) % ring.size()]));
        }
      }
      bool inside = point_in_ring(p, rings_.front());
      for (std::size_t r = 1; inside && r < rings_.size(); ++r) {
        if (point_in_ring(p, rings_[r])) inside = false;
      }
      return inside ? best : -best;
    }
  }
  return 0.0;
}

bool Shape::segment_inside(const Vec2& a, const Vec2& b, double tol) const {
  if (!contains(a, tol) || !contains(b, tol)) return false;
  switch (kind_) {
    case DomainKind::disk:
      return true;  // convex
    case DomainKind::annulus:
      return distance_to_segment(Vec2::Zero(), a, b) >= r_in_ - tol;
    case DomainKind::dumbbell: {
      const double len = (b - a).norm();
      // The approximate signed distance is 2-Lipschitz at worst on this curve.
      if (std::min(signed_distance(a), signed_distance(b)) > len) return true;
      const int samples = 32;
      for (int k = 1; k < samples; ++k) {
        const double t = static_cast<double>(k) / samples;
        if (!contains(a + t * (b - a), tol)) return false;
      }
      return true;
    }
    case DomainKind::polygon: {
      for (const auto& ring : rings_) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
          if (segments_cross(a, b, ring[i], ring[(i + 1) % ring.size()], 1e-12)) return false;
        }
      }
      return contains(0.5 * (a + b), tol);
    }
  }
  return false;
}

Vec2 Shape::project_inside(const Vec2& p) const {
  if (contains(p)) return p;
  switch (kind_) {
    case DomainKind::disk:
      return p * (r_out_ / p.norm());
    case DomainKind::annulus: {
      const double r = p.norm();
      if (r > r_out_) return p * (r_out_ / r);
      if (r == 0.0) return Vec2(r_in_, 0.0);
      return p * (r_in_ / r);
    }
    case DomainKind::dumbbell:
      return p * (dumbbell_radius(polar_angle(p)) / p.norm());
    case DomainKind::polygon: {
      Vec2 best = p;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& ring : rings_) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
          const Vec2 c = closest_on_segment(p, ring[i], ring[(i + 1) % ring.size()]);
          const double d = (c - p).norm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
      }
      return best;
    }
  }
  return p;
}

std::vector<BoundaryCurve> Shape::boundary_curves() const {
  std::vector<BoundaryCurve> curves;
  switch (kind_) {
    case DomainKind::disk: {
      const double r = r_out_;
      curves.push_back({[r](double s) {
                          return Vec2(r * std::cos(kTwoPi * s), r * std::sin(kTwoPi * s));
                        },
                        false});
      break;
    }
    case DomainKind::annulus: {
      const double ro = r_out_;
      const double ri = r_in_;
      curves.push_back({[ro](double s) {
                          return Vec2(ro * std::cos(kTwoPi * s), ro * std::sin(kTwoPi * s));
                        },
                        false});
      curves.push_back({[ri](double s) {
                          return Vec2(ri * std::cos(-kTwoPi * s), ri * std::sin(-kTwoPi * s));
                        },
                        true});
      break;
    }
    case DomainKind::dumbbell: {
      const double base = base_;
      const double amp = amplitude_;
      curves.push_back({[base, amp](double s) {
                          const double t = kTwoPi * s;
                          const double r = base + amp * std::cos(2.0 * t);
                          return Vec2(r * std::cos(t), r * std::sin(t));
                        },
                        false});
      break;
    }
    case DomainKind::polygon: {
      for (std::size_t r = 0; r < rings_.size(); ++r) {
        const auto ring = rings_[r];
        std::vector<double> cum(ring.size() + 1, 0.0);
        for (std::size_t i = 0; i < ring.size(); ++i) {
          cum[i + 1] = cum[i] + (ring[(i + 1) % ring.size()] - ring[i]).norm();
        }
        curves.push_back({[ring, cum](double s) {
                            const double total = cum.back();
                            double t = std::fmod(s, 1.0);
                            if (t < 0) t += 1.0;
                            t *= total;
                            auto it = std::upper_bound(cum.begin(), cum.end(), t);
                            std::size_t i = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
                            i = std::min(i, ring.size() - 1);
                            const double seg = cum[i + 1] - cum[i];
                            const double u = seg > 0 ? (t - cum[i]) / seg : 0.0;
                            return Vec2(ring[i] + u * (ring[(i + 1) % ring.size()] - ring[i]));
                          },
                          r > 0});
      }
      break;
    }
  }
  return curves;
}

void Shape::bounding_box(Vec2& lo, Vec2& hi) const {
  if (kind_ == DomainKind::polygon) {
    lo = hi = rings_.front().front();
    for (const Vec2& p : rings_.front()) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return;
  }
  lo = Vec2(-r_out_, -r_out_);
  hi = Vec2(r_out_, r_out_);
}

}  // namespace ddrlab
