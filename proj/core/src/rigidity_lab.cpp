#include "ddrlab/rigidity_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ddrlab {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

double g_angle(const Mat2& g, const Vec2& a, const Vec2& b) {
  const double c = metric_dot(g, a, b) / (metric_norm(g, a) * metric_norm(g, b));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Unit direction at q toward the source of `field`: -g^{-1} grad, g-normalized.
Vec2 descent_direction(const Mesh& mesh, const FieldView& field, const Vec2& q) {
  const Vec2 grad = field_gradient(mesh, field, q);
  const Mat2 g = mesh.metric_at_point(q);
  const Vec2 d = -g.ldlt().solve(grad);
  return d / metric_norm(g, d);
}

struct PairPlan {
  std::size_t a = 0;  // positions in the window sample list
  std::size_t b = 0;
};

// Anchors spread evenly over the window. Each anchor is paired with the
// sample whose angle is closest to a target cycling through 60..180 degrees
// (clipped below by min_angle), so the relation is exercised away from the
// antipodal case too.
std::vector<PairPlan> plan_pairs_at(const std::vector<Vec2>& dirs, const Mat2& g, std::size_t max_pairs,
                                    double min_angle) {
  static constexpr double kTargets[] = {90.0, 150.0, 60.0, 120.0, 180.0};
  const std::size_t m = dirs.size();
  std::vector<PairPlan> plan;
  if (m < 2) return plan;
  const std::size_t anchors = std::min(max_pairs, m);
  for (std::size_t k = 0; k < anchors; ++k) {
    const std::size_t a = anchors == 1 ? 0 : k * (m - 1) / (anchors - 1);
    const double target = std::max(min_angle, kTargets[k % 5]);
    std::size_t best = a;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      const double ang = g_angle(g, dirs[a], dirs[b]) * kDeg;
      if (ang < min_angle) continue;
      const double gap = std::abs(ang - target);
      if (gap < best_gap) {
        best_gap = gap;
        best = b;
      }
    }
    if (best == a) continue;
    const PairPlan pp{std::min(a, best), std::max(a, best)};
    if (std::none_of(plan.begin(), plan.end(), [&](const PairPlan& x) { return x.a == pp.a && x.b == pp.b; })) {
      plan.push_back(pp);
    }
  }
  return plan;
}

// Narrow windows (a short far loop) may hold no pair at min_angle_deg; the
// floor is then lowered step by step down to fallback_angle_deg.
std::vector<PairPlan> plan_pairs(const std::vector<Vec2>& dirs, const Mat2& g, const AngleOptions& options) {
  for (double angle = options.min_angle_deg;; angle -= 10.0) {
    angle = std::max(angle, options.fallback_angle_deg);
    auto plan = plan_pairs_at(dirs, g, options.max_pairs, angle);
    if (plan.size() >= std::min<std::size_t>(3, options.max_pairs) || angle <= options.fallback_angle_deg) return plan;
  }
}

void summarize(DphiReport& r) {
  std::vector<double> all;
  for (const auto& p : r.pairs) {
    all.push_back(p.lambda1);
    all.push_back(p.lambda2);
  }
  if (all.empty()) return;
  r.lambda_median = quantile(all, 0.5);
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  r.lambda_consistency = *hi - *lo;
  r.lambda_spread = quantile(all, 0.9) - quantile(all, 0.1);
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - t) + values[hi] * t;
}

bool nearest_point_criterion(const DDFMatrix& d, std::size_t y, double tol) {
  if (y >= d.k) throw std::out_of_range("nearest_point_criterion: sample index out of range");
  for (std::size_t z = 0; z < d.k; ++z) {
    if (d(y, z) > tol) return false;
  }
  return true;
}

std::vector<std::size_t> nearest_samples(const DDFMatrix& d, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t y = 0; y < d.k; ++y) {
    if (nearest_point_criterion(d, y, tol)) out.push_back(y);
  }
  return out;
}

PhiFunction phi_function(const DDFMatrix& dp, const DDFMatrix& dx, std::size_t z) {
  if (dp.k != dx.k || (dp.frame && dx.frame && dp.frame != dx.frame && !dp.frame->same_as(*dx.frame))) {
    throw std::invalid_argument("phi_function: frame mismatch");
  }
  if (z >= dp.k) throw std::out_of_range("phi_function: anchor out of range");
  PhiFunction phi;
  phi.frame = dp.frame;
  phi.z_index = z;
  phi.values.resize(dp.k);
  for (std::size_t y = 0; y < dp.k; ++y) phi.values[y] = dp(y, z) - dx(y, z);
  return phi;
}

PhiFunction phi_function(const FramePtr& frame, const double* dp, const double* dx, std::size_t z) {
  const std::size_t k = frame->size();
  if (z >= k) throw std::out_of_range("phi_function: anchor out of range");
  PhiFunction phi;
  phi.frame = frame;
  phi.z_index = z;
  phi.values.resize(k);
  for (std::size_t y = 0; y < k; ++y) phi.values[y] = (dp[y] - dp[z]) - (dx[y] - dx[z]);
  return phi;
}

MembershipResult geodesic_membership(const PhiFunction& phi, const RegularWindow& window,
                                     double delta_max, double tie_tol) {
  const BoundaryFrame& frame = *phi.frame;
  const std::size_t z = phi.z_index;
  if (std::find(window.boundary_samples.begin(), window.boundary_samples.end(), frame.samples[z]) ==
      window.boundary_samples.end()) {
    throw std::invalid_argument("geodesic_membership: anchor lies outside the regular window");
  }
  const double top = *std::max_element(phi.values.begin(), phi.values.end());
  MembershipResult r;
  r.arc_offset = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < phi.values.size(); ++y) {
    if (phi.values[y] < top - tie_tol) continue;
    const double off = frame.arc_distance(y, z);
    if (off < r.arc_offset) {
      r.arc_offset = off;
      r.argmax = y;
    }
  }
  r.member = r.arc_offset <= delta_max;
  return r;
}

bool geodesic_membership(const DDFMatrix& dp, const DDFMatrix& dx, std::size_t z,
                         const RegularWindow& window, double delta_max) {
  return geodesic_membership(phi_function(dp, dx, z), window, delta_max).member;
}

Vec2 path_tangent(const Mesh& mesh, const FieldView& field, const Vec2& q) {
  const double reach = 10.0 * mesh.h;
  const Polyline path = descent_path(mesh, field, q, reach);
  const Mat2 g = mesh.metric_at_point(q);
  // Fit P(s) - q = a s + b s^2 over the leading points, s = Euclidean arc.
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Matrix<double, 2, 2> atb = Eigen::Matrix<double, 2, 2>::Zero();  // columns x, y
  double s = 0.0;
  int used = 0;
  for (std::size_t k = 1; k < path.points.size(); ++k) {
    s += (path.points[k] - path.points[k - 1]).norm();
    if (s > reach) break;
    const Eigen::Vector2d row(s, s * s);
    const Vec2 d = path.points[k] - q;
    ata += row * row.transpose();
    atb.col(0) += row * d.x();
    atb.col(1) += row * d.y();
    ++used;
  }
  Vec2 t;
  if (used >= 3) {
    const Eigen::Matrix<double, 2, 2> coef = ata.ldlt().solve(atb);
    t = Vec2(coef(0, 0), coef(0, 1));
  } else if (path.points.size() >= 2) {
    t = path.points[1] - q;
  } else {
    t = descent_direction(mesh, field, q);
  }
  return t / metric_norm(g, t);
}

double dphi_derivative(const Mesh& mesh, const FrameTable& table, const Vec2& q, std::size_t z1,
                       std::size_t z2, double t_step) {
  if (z1 == z2) throw std::invalid_argument("dphi_derivative: z1 and z2 must differ");
  if (!(t_step > 0.0) || t_step > 5.0 * mesh.h * (1.0 + 1e-12)) {
    throw std::invalid_argument("dphi_derivative: t_step must lie in (0, 5h]");
  }
  const FieldView f1 = table.column(z1);
  const FieldView f2 = table.column(z2);
  if (sample_field(mesh, f1, q) < 2.0 * t_step) {
    throw std::runtime_error("dphi_derivative: path shorter than 2 t_step");
  }
  const Vec2 v = path_tangent(mesh, f1, q);
  // Least-squares slope over symmetric samples t = +-j t_step / 5, i.e. the
  // central differences at five step sizes, weighted by t^2.
  constexpr int m = 5;
  double num = 0.0, den = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double t = t_step * j / m;
    const Vec2 ahead = q + t * v;
    const Vec2 behind = q - t * v;
    const double d_ahead = sample_field(mesh, f1, ahead) - sample_field(mesh, f2, ahead);
    const double d_behind = sample_field(mesh, f1, behind) - sample_field(mesh, f2, behind);
    num += t * (d_ahead - d_behind);
    den += 2.0 * t * t;
  }
  return num / den;
}

double dphi_derivative(const Mesh& mesh, const FrameTable& table, VertexId p, std::size_t z1,
                       std::size_t z2, double t_step) {
  return dphi_derivative(mesh, table, mesh.vertices[p], z1, z2, t_step);
}

std::vector<std::size_t> window_sample_indices(const FrameTable& table, const RegularWindow& window) {
  const auto& samples = table.frame()->samples;
  std::vector<std::size_t> out;
  for (VertexId b : window.boundary_samples) {
    const auto it = std::find(samples.begin(), samples.end(), b);
    if (it == samples.end()) throw std::invalid_argument("window sample is not a frame sample");
    out.push_back(static_cast<std::size_t>(it - samples.begin()));
  }
  return out;
}

DphiReport angle_recovery(const Mesh& mesh, const FrameTable& table, VertexId p,
                          const RegularWindow& window, const AngleOptions& options) {
  if (window.boundary_samples.size() < 5) throw std::invalid_argument("angle_recovery: window has fewer than 5 samples");
  const double t = options.t_step > 0.0 ? options.t_step : 5.0 * mesh.h;
  const auto idx = window_sample_indices(table, window);
  std::vector<Vec2> dirs;
  for (std::size_t i : idx) dirs.push_back(direction_at(mesh, table.column(i), p).vector);
  const Mat2& g = mesh.metric_at(p);
  DphiReport r;
  r.p = p;
  r.p_prime = mesh.vertices[p];
  for (const auto& pp : plan_pairs(dirs, g, options)) {
    DphiPair pair;
    pair.z1 = idx[pp.a];
    pair.z2 = idx[pp.b];
    pair.angle_deg = g_angle(g, dirs[pp.a], dirs[pp.b]) * kDeg;
    pair.lhs = -1.0 + metric_dot(g, dirs[pp.a], dirs[pp.b]);
    if (std::abs(pair.lhs) < 1e-3) throw std::runtime_error("angle_recovery: degenerate direction pair");
    pair.rhs = dphi_derivative(mesh, table, p, pair.z1, pair.z2, t);
    const double rhs21 = dphi_derivative(mesh, table, p, pair.z2, pair.z1, t);
    pair.lambda1 = pair.rhs / pair.lhs;
    pair.lambda2 = rhs21 / pair.lhs;
    r.pairs.push_back(pair);
  }
  summarize(r);
  return r;
}

DphiReport angle_recovery_pair(const Mesh& mesh, const FrameTable& table, VertexId p,
                               const RegularWindow& window, const Mesh& mesh_b,
                               const FrameTable& table_b, const Vec2& p_prime,
                               const AngleOptions& options) {
  if (window.boundary_samples.size() < 5) throw std::invalid_argument("angle_recovery: window has fewer than 5 samples");
  if (table.k() != table_b.k()) throw std::invalid_argument("angle_recovery: frame mismatch");
  const double t = options.t_step > 0.0 ? options.t_step : 5.0 * mesh.h;
  const auto idx = window_sample_indices(table, window);
  std::vector<Vec2> dirs_b;
  for (std::size_t i : idx) dirs_b.push_back(descent_direction(mesh_b, table_b.column(i), p_prime));
  const Mat2 gb = mesh_b.metric_at_point(p_prime);
  DphiReport r;
  r.p = p;
  r.p_prime = p_prime;
  for (const auto& pp : plan_pairs(dirs_b, gb, options)) {
    DphiPair pair;
    pair.z1 = idx[pp.a];
    pair.z2 = idx[pp.b];
    pair.angle_deg = g_angle(gb, dirs_b[pp.a], dirs_b[pp.b]) * kDeg;
    if (std::abs(-1.0 + metric_dot(gb, dirs_b[pp.a], dirs_b[pp.b])) < 1e-3) {
      throw std::runtime_error("angle_recovery: degenerate direction pair");
    }
    pair.lhs = dphi_derivative(mesh, table, p, pair.z1, pair.z2, t);
    pair.rhs = dphi_derivative(mesh_b, table_b, p_prime, pair.z1, pair.z2, t);
    const double lhs21 = dphi_derivative(mesh, table, p, pair.z2, pair.z1, t);
    const double rhs21 = dphi_derivative(mesh_b, table_b, p_prime, pair.z2, pair.z1, t);
    pair.lambda1 = pair.lhs / pair.rhs;
    pair.lambda2 = lhs21 / rhs21;
    r.pairs.push_back(pair);
  }
  summarize(r);
  return r;
}

RegularWindow frame_window(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                           VertexId p, const WindowOptions& options) {
  const auto& samples = table.frame()->samples;
  const double* row = table.row(p);
  std::vector<double> dist(row, row + table.k());
  return regular_boundary_window(mesh, domain, p, samples, dist,
                                 [&](std::size_t i) { return table.column(i); }, options);
}

RegularWindow frame_window_at(const Mesh& mesh, const FrameTable& table, const Vec2& q,
                              const WindowOptions& options) {
  const VertexId p = mesh.nearest_vertex(q);
  MetricDomain unused;
  return frame_window(mesh, unused, table, p, options);
}

}  // namespace ddrlab
