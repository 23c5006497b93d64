#include "ddrlab/metric_domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace ddrlab {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 perp90() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Bump placement for the "+bump" control, kept inside each base shape.
std::pair<Vec2, double> control_bump(const std::string& base) {
  if (base == "annulus") return {Vec2(0.0, 0.65), 0.3};
  if (base == "dumbbell") return {Vec2(-0.55, 0.0), 0.35};
  if (base == "disk") return {Vec2::Zero(), 0.7};
  return {Vec2(0.3, 0.3), 0.4};
}

}  // namespace

Vec2 GaugeMap::apply_inverse(const Vec2& p) const {
  if (inverse) return inverse(p);
  Vec2 x = p;
  for (int it = 0; it < 50; ++it) {
    const Vec2 r = forward(x) - p;
    if (r.norm() < 1e-14) break;
    x -= jacobian(x).lu().solve(r);
  }
  return x;
}

GaugeMap radial_twist_gauge(std::function<double(double)> alpha,
                            std::function<double(double)> dalpha, std::string name) {
  GaugeMap g;
  g.name = std::move(name);
  g.forward = [alpha](const Vec2& p) -> Vec2 { return rotation(alpha(p.norm())) * p; };
  g.inverse = [alpha](const Vec2& p) -> Vec2 { return rotation(-alpha(p.norm())) * p; };
  g.jacobian = [alpha, dalpha](const Vec2& p) -> Mat2 {
    const double r = p.norm();
    const Mat2 rot = rotation(alpha(r));
    if (r == 0.0) return rot;
    const Mat2 shear = Mat2::Identity() + (dalpha(r) / r) * (perp90() * p) * p.transpose();
    return rot * shear;
  };
  return g;
}

GaugeMap local_twist_gauge(const Vec2& center, double radius, double amplitude) {
  std::ostringstream name;
  name << "local-twist(" << amplitude << ", r<" << radius << ")";
  const double rho2 = radius * radius;
  auto alpha = [amplitude, rho2](double r) {
    const double s = 1.0 - r * r / rho2;
    return s > 0.0 ? amplitude * s * s * s : 0.0;
  };
  auto dalpha = [amplitude, rho2](double r) {
    const double s = 1.0 - r * r / rho2;
    return s > 0.0 ? -6.0 * amplitude * s * s * r / rho2 : 0.0;
  };
  GaugeMap base = radial_twist_gauge(alpha, dalpha, name.str());
  GaugeMap g;
  g.name = base.name;
  g.forward = [center, f = base.forward](const Vec2& p) -> Vec2 { return center + f(p - center); };
  g.inverse = [center, f = base.inverse](const Vec2& p) -> Vec2 { return center + f(p - center); };
  g.jacobian = [center, j = base.jacobian](const Vec2& p) -> Mat2 { return j(p - center); };
  return g;
}

GaugeMap disk_twist_gauge(double amplitude) {
  std::ostringstream name;
  name << "twist(" << amplitude << "*(1-r^2))";
  return radial_twist_gauge([amplitude](double r) { return amplitude * (1.0 - r * r); },
                            [amplitude](double r) { return -2.0 * amplitude * r; },
                            name.str());
}

GaugeMap annulus_twist_gauge(double inner_radius, double amplitude) {
  const double scale = 4.0 * amplitude / ((1.0 - inner_radius) * (1.0 - inner_radius));
  std::ostringstream name;
  name << "twist(" << amplitude << ",annulus)";
  return radial_twist_gauge(
      [scale, inner_radius](double r) { return scale * (r - inner_radius) * (1.0 - r); },
      [scale, inner_radius](double r) { return scale * (1.0 + inner_radius - 2.0 * r); },
      name.str());
}

GaugeMap rigid_rotation_gauge(double angle) {
  std::ostringstream name;
  name << "rotate(" << angle << ")";
  return radial_twist_gauge([angle](double) { return angle; }, [](double) { return 0.0; },
                            name.str());
}

GaugeMap identity_gauge() {
  GaugeMap g;
  g.name = "identity";
  g.forward = [](const Vec2& p) { return p; };
  g.inverse = [](const Vec2& p) { return p; };
  g.jacobian = [](const Vec2&) -> Mat2 { return Mat2::Identity(); };
  return g;
}

GaugeMap with_numeric_jacobian(GaugeMap gauge, double step) {
  auto fwd = gauge.forward;
  gauge.jacobian = [fwd, step](const Vec2& p) -> Mat2 {
    Mat2 j;
    for (int c = 0; c < 2; ++c) {
      Vec2 e = Vec2::Zero();
      e[c] = step;
      j.col(c) = (fwd(p + e) - fwd(p - e)) / (2.0 * step);
    }
    return j;
  };
  gauge.name += "[fd]";
  return gauge;
}

MetricDomain pullback_domain(const MetricDomain& domain, const GaugeMap& gauge) {
  Vec2 lo, hi;
  domain.shape.bounding_box(lo, hi);
  const int n = 21;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Vec2 p(lo.x() + (hi.x() - lo.x()) * a / (n - 1), lo.y() + (hi.y() - lo.y()) * b / (n - 1));
      if (!domain.shape.contains(p)) continue;
      const double det = gauge.jacobian(p).determinant();
      if (!(std::abs(det) > 1e-12)) {
        std::ostringstream msg;
        msg << "gauge " << gauge.name << " has singular jacobian at (" << p.x() << ", " << p.y() << ")";
        throw std::invalid_argument(msg.str());
      }
    }
  }
  MetricDomain out;
  out.shape = domain.shape;
  out.name = domain.name;
  out.metric_name = gauge.name + " o " + domain.metric_name;
  auto base = domain.metric;
  auto fwd = gauge.forward;
  auto jac = gauge.jacobian;
  out.metric = [base, fwd, jac](const Vec2& p) -> Mat2 {
    const Mat2 j = jac(p);
    const Mat2 g = j.transpose() * base(fwd(p)) * j;
    return 0.5 * (g + g.transpose());
  };
  return out;
}

double bump(const Vec2& p, const Vec2& center, double radius, double amplitude) {
  const double q = (p - center).squaredNorm() / (radius * radius);
  if (q >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - q));
}

MetricField euclidean_metric() {
  return [](const Vec2&) -> Mat2 { return Mat2::Identity(); };
}

MetricField conformal_bump_metric(Vec2 center, double radius, double amplitude) {
  return [center, radius, amplitude](const Vec2& p) -> Mat2 {
    return std::exp(2.0 * bump(p, center, radius, amplitude)) * Mat2::Identity();
  };
}

std::string control_scenario(const std::string& name) {
  if (name == "conformal-disk") return "disk";
  if (name.find('+') != std::string::npos) throw std::invalid_argument("control_scenario: expects a base scenario, got " + name);
  make_scenario(name);
  return name + "+bump";
}

std::vector<std::string> scenario_catalog() {
  return {"disk", "annulus", "dumbbell", "conformal-disk"};
}

GaugeMap scenario_gauge(const std::string& name) {
  if (ends_with(name, "+rotate")) return rigid_rotation_gauge(0.3);
  if (ends_with(name, "+twist")) {
    const std::string base = name.substr(0, name.size() - 6);
    if (base == "disk" || base == "conformal-disk") return disk_twist_gauge(0.5);
    if (base == "annulus") return annulus_twist_gauge(0.3, 0.25);
    if (base == "dumbbell") return local_twist_gauge(Vec2(0.55, 0.0), 0.35, 0.5);
    throw std::invalid_argument("no boundary-fixing twist for scenario " + base);
  }
  if (name.find('+') != std::string::npos) throw std::invalid_argument("unknown scenario suffix: " + name);
  return identity_gauge();
}

MetricDomain make_scenario(const std::string& name) {
  if (ends_with(name, "+bump")) {
    const std::string base_name = name.substr(0, name.size() - 5);
    MetricDomain out = make_scenario(base_name);
    const auto [center, radius] = control_bump(base_name);
    MetricField inner = out.metric;
    MetricField factor = conformal_bump_metric(center, radius, 0.3);
    out.metric = [inner, factor](const Vec2& p) -> Mat2 { return factor(p)(0, 0) * inner(p); };
    out.name = name;
    out.metric_name = "exp(2u) times " + out.metric_name;
    return out;
  }
  const auto plus = name.find('+');
  if (plus != std::string::npos) {
    MetricDomain base = make_scenario(name.substr(0, plus));
    MetricDomain out = pullback_domain(base, scenario_gauge(name));
    out.name = name;
    return out;
  }
  MetricDomain d;
  d.name = name;
  if (name == "disk") {
    d.shape = Shape::disk();
    d.metric = euclidean_metric();
    d.metric_name = "euclidean";
  } else if (name == "annulus") {
    d.shape = Shape::annulus(0.3);
    d.metric = euclidean_metric();
    d.metric_name = "euclidean";
  } else if (name == "dumbbell") {
    d.shape = Shape::dumbbell(0.65, 0.35);
    d.metric = euclidean_metric();
    d.metric_name = "euclidean";
  } else if (name == "conformal-disk") {
    d.shape = Shape::disk();
    d.metric = conformal_bump_metric(Vec2::Zero(), 0.7, 0.3);
    d.metric_name = "exp(2u) Id, u = bump(0.3, r<0.7)";
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return d;
}

std::vector<std::pair<int, int>> stencil_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  for (int a = -radius; a <= radius; ++a) {
    for (int b = -radius; b <= radius; ++b) {
      if (a == 0 && b == 0) continue;
      if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
      out.emplace_back(a, b);
    }
  }
  return out;
}

double segment_metric_length(const MetricField& metric, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  static constexpr double w[5] = {1.0, 4.0, 2.0, 4.0, 1.0};
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) {
    sum += w[k] * metric_norm(metric(a + (k / 4.0) * d), d);
  }
  return sum / 12.0;
}

std::vector<StencilEdge> Mesh::stencil_edges() const {
  std::vector<StencilEdge> out;
  out.reserve(targets_.size() / 2);
  for (VertexId v = 0; v < static_cast<VertexId>(size()); ++v) {
    for (auto s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      if (targets_[s] > v) out.push_back({v, targets_[s], lengths_[s]});
    }
  }
  return out;
}

VertexId Mesh::lattice_vertex(long i, long j) const {
  const long a = i - lattice_i0_;
  const long b = j - lattice_j0_;
  if (a < 0 || b < 0 || a >= lattice_ni_ || b >= lattice_nj_) return kNoVertex;
  return lattice_index_[static_cast<std::size_t>(b * lattice_ni_ + a)];
}

void Mesh::vertices_near(const Vec2& p, double radius, std::vector<VertexId>& out) const {
  out.clear();
  const long ci0 = static_cast<long>(std::floor((p.x() - radius - bucket_origin_.x()) / h));
  const long ci1 = static_cast<long>(std::floor((p.x() + radius - bucket_origin_.x()) / h));
  const long cj0 = static_cast<long>(std::floor((p.y() - radius - bucket_origin_.y()) / h));
  const long cj1 = static_cast<long>(std::floor((p.y() + radius - bucket_origin_.y()) / h));
  const double r2 = radius * radius;
  for (long cj = std::max(0L, cj0); cj <= std::min(bucket_ny_ - 1, cj1); ++cj) {
    for (long ci = std::max(0L, ci0); ci <= std::min(bucket_nx_ - 1, ci1); ++ci) {
      const auto cell = static_cast<std::size_t>(cj * bucket_nx_ + ci);
      for (auto k = bucket_offsets_[cell]; k < bucket_offsets_[cell + 1]; ++k) {
        const VertexId v = bucket_items_[k];
        if ((vertices[v] - p).squaredNorm() <= r2) out.push_back(v);
      }
    }
  }
}

VertexId Mesh::nearest_vertex(const Vec2& p) const {
  std::vector<VertexId> near;
  for (double r = h; r < 1e3 * h; r *= 2.0) {
    vertices_near(p, r, near);
    if (!near.empty()) break;
  }
  if (near.empty()) {
    near.resize(size());
    std::iota(near.begin(), near.end(), 0);
  }
  VertexId best = kNoVertex;
  double best_d = std::numeric_limits<double>::infinity();
  for (VertexId v : near) {
    const double d = (vertices[v] - p).squaredNorm();
    if (d < best_d || (d == best_d && v < best)) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

void Mesh::finalize(const MetricDomain& domain, std::span<const StencilEdge> edges) {
  const auto n = static_cast<VertexId>(size());
  if (boundary_flags.size() != vertices.size()) {
    throw std::invalid_argument("boundary_flags size does not match vertex count");
  }

  // CSR adjacency sorted by angle around each vertex.
  std::vector<std::int64_t> degree(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j) {
      throw std::invalid_argument("stencil edge references an invalid vertex");
    }
    ++degree[e.i + 1];
    ++degree[e.j + 1];
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (VertexId v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + degree[v + 1];
  targets_.assign(static_cast<std::size_t>(offsets_[n]), kNoVertex);
  lengths_.assign(targets_.size(), 0.0);
  std::vector<std::int64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges) {
    targets_[fill[e.i]] = e.j;
    lengths_[fill[e.i]++] = e.length;
    targets_[fill[e.j]] = e.i;
    lengths_[fill[e.j]++] = e.length;
  }
  std::vector<std::pair<double, std::int64_t>> order;
  std::vector<VertexId> tmp_t;
  std::vector<double> tmp_l;
  for (VertexId v = 0; v < n; ++v) {
    order.clear();
    for (auto s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      order.emplace_back(polar_angle(vertices[targets_[s]] - vertices[v]), s);
    }
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return targets_[a.second] < targets_[b.second];
    });
    tmp_t.clear();
    tmp_l.clear();
    for (const auto& [angle, s] : order) {
      tmp_t.push_back(targets_[s]);
      tmp_l.push_back(lengths_[s]);
    }
    std::copy(tmp_t.begin(), tmp_t.end(), targets_.begin() + offsets_[v]);
    std::copy(tmp_l.begin(), tmp_l.end(), lengths_.begin() + offsets_[v]);
  }
  reverse_.assign(targets_.size(), -1);
  for (VertexId v = 0; v < n; ++v) {
    for (auto s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      const VertexId u = targets_[s];
      for (auto r = offsets_[u]; r < offsets_[u + 1]; ++r) {
        if (targets_[r] == v) {
          reverse_[s] = r;
          break;
        }
      }
      if (reverse_[s] < 0) throw std::logic_error("asymmetric adjacency");
    }
  }

  const double tol = 0.05 * h;
  fan_next_.assign(targets_.size(), 0);
  for (VertexId v = 0; v < n; ++v) {
    const auto deg = offsets_[v + 1] - offsets_[v];
    if (deg < 2) continue;
    for (auto s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      const auto t = next_slot(v, s);
      const Vec2 a = vertices[targets_[s]] - vertices[v];
      const Vec2 b = vertices[targets_[t]] - vertices[v];
      const double gap = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
      if (gap <= 1e-9 || gap > 0.5 * kPi) continue;
      if (!domain.shape.segment_inside(vertices[targets_[s]], vertices[targets_[t]], tol)) continue;
      fan_next_[s] = 1;
    }
  }

  metric_field_ = domain.metric;
  metric_.resize(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) metric_[v] = domain.metric(vertices[v]);

  // Quadratic forms of each fan triangle (x; a, b) under the averaged metric
  // gm = gx/2 + (ga + gb)/4, with e = a - b and w0 = b - x.
  fan_form_.assign(4 * targets_.size(), 0.0);
  for (VertexId x = 0; x < n; ++x) {
    for (auto s = offsets_[x]; s < offsets_[x + 1]; ++s) {
      if (!fan_next_[s]) continue;
      const VertexId a = targets_[s];
      const VertexId b = targets_[next_slot(x, s)];
      const Mat2 gm = 0.5 * metric_[x] + 0.25 * (metric_[a] + metric_[b]);
      const Vec2 e = vertices[a] - vertices[b];
      const Vec2 w0 = vertices[b] - vertices[x];
      double* f = fan_form_.data() + 4 * s;
      f[0] = e.dot(gm * e);
      f[1] = e.dot(gm * w0);
      f[2] = w0.dot(gm * w0);
      // metric distance from x to the segment [a, b]
      const double lam = std::clamp(-f[1] / f[0], 0.0, 1.0);
      f[3] = std::sqrt(std::max(0.0, f[2] + lam * (2.0 * f[1] + lam * f[0])));
    }
  }

  // Boundary arclength from chord metric lengths along each loop.
  boundary_arc_.assign(static_cast<std::size_t>(n), 0.0);
  boundary_loop_.assign(static_cast<std::size_t>(n), -1);
  boundary_position_.assign(static_cast<std::size_t>(n), -1);
  loop_length_.clear();
  for (std::size_t l = 0; l < boundary_order.size(); ++l) {
    const auto& loop = boundary_order[l];
    double acc = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      boundary_arc_[loop[k]] = acc;
      boundary_loop_[loop[k]] = static_cast<int>(l);
      boundary_position_[loop[k]] = static_cast<int>(k);
      acc += segment_metric_length(domain.metric, vertices[loop[k]], vertices[loop[(k + 1) % loop.size()]]);
    }
    loop_length_.push_back(acc);
  }

  // Lattice lookup.
  lattice_i0_ = lattice_j0_ = std::numeric_limits<long>::max();
  long i1 = std::numeric_limits<long>::min(), j1 = std::numeric_limits<long>::min();
  for (VertexId v = 0; v < n; ++v) {
    if (is_boundary(v)) continue;
    const long i = std::lround(vertices[v].x() / h);
    const long j = std::lround(vertices[v].y() / h);
    lattice_i0_ = std::min(lattice_i0_, i);
    lattice_j0_ = std::min(lattice_j0_, j);
    i1 = std::max(i1, i);
    j1 = std::max(j1, j);
  }
  if (i1 < lattice_i0_) {
    lattice_i0_ = lattice_j0_ = 0;
    i1 = j1 = -1;
  }
  lattice_ni_ = i1 - lattice_i0_ + 1;
  lattice_nj_ = j1 - lattice_j0_ + 1;
  lattice_index_.assign(static_cast<std::size_t>(std::max(0L, lattice_ni_ * lattice_nj_)), kNoVertex);
  for (VertexId v = 0; v < n; ++v) {
    if (is_boundary(v)) continue;
    const long i = std::lround(vertices[v].x() / h) - lattice_i0_;
    const long j = std::lround(vertices[v].y() / h) - lattice_j0_;
    lattice_index_[static_cast<std::size_t>(j * lattice_ni_ + i)] = v;
  }

  const auto offsets = stencil_offsets(stencil_radius);
  full_stencil_.assign(static_cast<std::size_t>(n), 0);
  for (VertexId v = 0; v < n; ++v) {
    if (is_boundary(v)) continue;
    std::size_t count = 0;
    for (auto s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      if (!is_boundary(targets_[s])) ++count;
    }
    full_stencil_[v] = count == offsets.size() ? 1 : 0;
  }

  // Spatial buckets of size h.
  Vec2 lo = vertices.empty() ? Vec2::Zero() : vertices.front();
  Vec2 hi = lo;
  for (const Vec2& p : vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bucket_origin_ = lo - Vec2(h, h);
  bucket_nx_ = static_cast<long>(std::floor((hi.x() - bucket_origin_.x()) / h)) + 2;
  bucket_ny_ = static_cast<long>(std::floor((hi.y() - bucket_origin_.y()) / h)) + 2;
  bucket_offsets_.assign(static_cast<std::size_t>(bucket_nx_ * bucket_ny_) + 1, 0);
  std::vector<std::size_t> cell_of(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) {
    const long ci = static_cast<long>(std::floor((vertices[v].x() - bucket_origin_.x()) / h));
    const long cj = static_cast<long>(std::floor((vertices[v].y() - bucket_origin_.y()) / h));
    cell_of[v] = static_cast<std::size_t>(cj * bucket_nx_ + ci);
    ++bucket_offsets_[cell_of[v] + 1];
  }
  for (std::size_t c = 1; c < bucket_offsets_.size(); ++c) bucket_offsets_[c] += bucket_offsets_[c - 1];
  bucket_items_.assign(static_cast<std::size_t>(n), kNoVertex);
  std::vector<std::int32_t> cursor(bucket_offsets_.begin(), bucket_offsets_.end() - 1);
  for (VertexId v = 0; v < n; ++v) bucket_items_[cursor[cell_of[v]]++] = v;
}

int connected_components(const Mesh& mesh) {
  const auto n = static_cast<VertexId>(mesh.size());
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
  int components = 0;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      for (VertexId u : mesh.neighbors(v)) {
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return components;
}

namespace {

// Resamples one boundary curve uniformly in metric arclength with Euclidean
// chord spacing at most h.
std::vector<Vec2> resample_curve(const BoundaryCurve& curve, const MetricField& metric, double h) {
  std::size_t fine = 4096;
  {
    double euclid = 0.0;
    Vec2 prev = curve.point(0.0);
    for (int k = 1; k <= 512; ++k) {
      const Vec2 p = curve.point(k / 512.0);
      euclid += (p - prev).norm();
      prev = p;
    }
    fine = std::max<std::size_t>(fine, static_cast<std::size_t>(std::ceil(32.0 * euclid / h)));
  }
  std::vector<double> cum(fine + 1, 0.0);
  Vec2 prev = curve.point(0.0);
  for (std::size_t k = 1; k <= fine; ++k) {
    const Vec2 p = curve.point(static_cast<double>(k) / fine);
    cum[k] = cum[k - 1] + metric_norm(metric(0.5 * (p + prev)), p - prev);
    prev = p;
  }
  const double total = cum.back();
  auto place = [&](std::size_t count) {
    std::vector<Vec2> pts;
    pts.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double target = total * static_cast<double>(j) / count;
      auto it = std::lower_bound(cum.begin(), cum.end(), target);
      std::size_t k = static_cast<std::size_t>(std::distance(cum.begin(), it));
      k = std::clamp<std::size_t>(k, 1, fine);
      const double span = cum[k] - cum[k - 1];
      const double u = span > 0 ? (target - cum[k - 1]) / span : 0.0;
      pts.push_back(curve.point((static_cast<double>(k - 1) + u) / fine));
    }
    return pts;
  };
  std::size_t count = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(total / h)));
  for (int iter = 0; iter < 20; ++iter) {
    auto pts = place(count);
    double worst = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      worst = std::max(worst, (pts[(j + 1) % pts.size()] - pts[j]).norm());
    }
    if (worst <= h) return pts;
    count = static_cast<std::size_t>(std::ceil(count * worst / h)) + 1;
  }
  throw std::runtime_error("boundary resampling did not reach the requested spacing");
}

}  // namespace

Mesh build_mesh(const MetricDomain& domain, double h, int stencil_radius) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh spacing h must be positive");
  if (stencil_radius < 1) throw std::invalid_argument("stencil_radius must be >= 1");

  Mesh mesh;
  mesh.h = h;
  mesh.stencil_radius = stencil_radius;
  mesh.domain_kind = domain.shape.kind();
  mesh.shape_descriptor = domain.shape.descriptor();
  mesh.shape = domain.shape;
  mesh.metric_name = domain.name;

  const Shape& shape = domain.shape;
  Vec2 lo, hi;
  shape.bounding_box(lo, hi);
  const long i0 = static_cast<long>(std::floor(lo.x() / h)) - 1;
  const long i1 = static_cast<long>(std::ceil(hi.x() / h)) + 1;
  const long j0 = static_cast<long>(std::floor(lo.y() / h)) - 1;
  const long j1 = static_cast<long>(std::ceil(hi.y() / h)) + 1;
  const double margin = 0.3 * h;
  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 p(static_cast<double>(i) * h, static_cast<double>(j) * h);
      if (shape.signed_distance(p) >= margin) {
        mesh.vertices.push_back(p);
        mesh.boundary_flags.push_back(0);
      }
    }
  }
  for (const auto& curve : shape.boundary_curves()) {
    std::vector<VertexId> loop;
    for (const Vec2& p : resample_curve(curve, domain.metric, h)) {
      loop.push_back(static_cast<VertexId>(mesh.vertices.size()));
      mesh.vertices.push_back(p);
      mesh.boundary_flags.push_back(1);
    }
    mesh.boundary_order.push_back(std::move(loop));
  }
  if (mesh.vertices.empty() || std::none_of(mesh.boundary_flags.begin(), mesh.boundary_flags.end(),
                                            [](std::uint8_t f) { return f == 0; })) {
    throw std::invalid_argument("empty domain: no interior lattice vertices at h");
  }

  // Provisional lookup for lattice neighbors and radius queries.
  mesh.finalize(domain, {});

  const double tol = 0.05 * h;
  const double reach = stencil_radius * h * (1.0 + 1e-12);
  std::vector<StencilEdge> edges;
  const auto offsets = stencil_offsets(stencil_radius);
  const auto n = static_cast<VertexId>(mesh.size());
  for (VertexId v = 0; v < n; ++v) {
    if (mesh.is_boundary(v)) continue;
    const long i = std::lround(mesh.vertices[v].x() / h);
    const long j = std::lround(mesh.vertices[v].y() / h);
    for (const auto& [a, b] : offsets) {
      if (a < 0 || (a == 0 && b < 0)) continue;
      const VertexId u = mesh.lattice_vertex(i + a, j + b);
      if (u == kNoVertex) continue;
      if (shape.segment_inside(mesh.vertices[v], mesh.vertices[u], tol)) {
        edges.push_back({v, u, 0.0});
      }
    }
  }
  std::vector<VertexId> near;
  for (VertexId v = 0; v < n; ++v) {
    if (!mesh.is_boundary(v)) continue;
    mesh.vertices_near(mesh.vertices[v], reach, near);
    std::sort(near.begin(), near.end());
    for (VertexId u : near) {
      if (u == v || (mesh.is_boundary(u) && u < v)) continue;
      if (shape.segment_inside(mesh.vertices[v], mesh.vertices[u], tol)) {
        edges.push_back({std::min(u, v), std::max(u, v), 0.0});
      }
    }
  }
  for (auto& e : edges) {
    e.length = quantize_length(segment_metric_length(domain.metric, mesh.vertices[e.i], mesh.vertices[e.j]));
  }
  std::sort(edges.begin(), edges.end(), [](const StencilEdge& x, const StencilEdge& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  mesh.finalize(domain, edges);

  const int components = connected_components(mesh);
  if (components != 1) {
    std::ostringstream msg;
    msg << "disconnected edge graph: " << components << " components";
    throw std::runtime_error(msg.str());
  }
  return mesh;
}

}  // namespace ddrlab
