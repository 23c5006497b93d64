#include "ddrlab/distance_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace ddrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Binary min-heap over vertex ids keyed by dist, with decrease-key. Ties go
// to the smaller vertex id.
class VertexHeap {
 public:
  VertexHeap(const double* key, std::size_t n) : key_(key), pos_(n, -1) {}

  bool empty() const { return heap_.empty(); }

  void push_or_decrease(VertexId v) {
    auto i = pos_[v];
    if (i < 0) {
      i = static_cast<std::int32_t>(heap_.size());
      heap_.push_back(v);
    }
    sift_up(i, v);
  }

  VertexId pop() {
    const VertexId top = heap_.front();
    pos_[top] = -2;
    const VertexId last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) sift_down(0, last);
    return top;
  }

 private:
  bool less(VertexId a, VertexId b) const {
    return key_[a] < key_[b] || (key_[a] == key_[b] && a < b);
  }
  void place(std::int32_t i, VertexId v) {
    heap_[i] = v;
    pos_[v] = i;
  }
  void sift_up(std::int32_t i, VertexId v) {
    while (i > 0) {
      const std::int32_t parent = (i - 1) / 2;
      if (!less(v, heap_[parent])) break;
      place(i, heap_[parent]);
      i = parent;
    }
    place(i, v);
  }
  void sift_down(std::int32_t i, VertexId v) {
    const auto n = static_cast<std::int32_t>(heap_.size());
    for (;;) {
      std::int32_t c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && less(heap_[c + 1], heap_[c])) ++c;
      if (!less(heap_[c], v)) break;
      place(i, heap_[c]);
      i = c;
    }
    place(i, v);
  }

  const double* key_;
  std::vector<std::int32_t> pos_;
  std::vector<VertexId> heap_;
};

// Minimizes u_a*l + u_b*(1-l) + |w0 + l e|_gm over l in (0,1), with the
// triangle's quadratic forms f = (e.gm.e, e.gm.w0, w0.gm.w0). Returns inf
// when the minimum sits on an endpoint (covered by the edge updates).
double triangle_update(const double* f, double ua, double ub) {
  const double aa = f[0], bb = f[1], cc = f[2];
  const double delta = ua - ub;
  const double denom = aa - delta * delta;
  if (denom <= 0.0) return kInf;
  const double disc = std::max(0.0, aa * cc - bb * bb);
  const double s = -delta * std::sqrt(disc / denom);
  const double lam = (s - bb) / aa;
  if (!(lam > 0.0 && lam < 1.0)) return kInf;
  const double len = std::sqrt(std::max(0.0, cc + lam * (2.0 * bb + lam * aa)));
  return lam * ua + (1.0 - lam) * ub + len;
}

void check_vertex(const Mesh& mesh, VertexId v, const char* what) {
  if (v < 0 || static_cast<std::size_t>(v) >= mesh.size()) {
    std::ostringstream msg;
    msg << what << " " << v << " is not a mesh vertex";
    throw std::invalid_argument(msg.str());
  }
}

template <int N>
LocalFit fit_fixed(const Mesh& mesh, const FieldView& field, const Vec2& center,
                   const std::vector<VertexId>& pts) {
  using MatN = Eigen::Matrix<double, N, N>;
  using VecN = Eigen::Matrix<double, N, 1>;
  LocalFit fit;
  fit.samples = static_cast<int>(pts.size());
  if (static_cast<int>(pts.size()) < N) return fit;
  const double scale = mesh.h;
  MatN ata = MatN::Zero();
  VecN atb = VecN::Zero();
  double btb = 0.0;
  const double base = field[pts.front()];
  VecN row;
  for (VertexId v : pts) {
    const Vec2 d = (mesh.vertices[v] - center) / scale;
    row(0) = 1.0;
    row(1) = d.x();
    row(2) = d.y();
    if constexpr (N == 6) {
      row(3) = d.x() * d.x();
      row(4) = d.x() * d.y();
      row(5) = d.y() * d.y();
    }
    const double b = field[v] - base;
    ata.noalias() += row * row.transpose();
    atb += b * row;
    btb += b * b;
  }
  Eigen::SelfAdjointEigenSolver<MatN> eig(ata);
  if (eig.eigenvalues()(0) <= 1e-9 * eig.eigenvalues()(N - 1)) return fit;
  const VecN coef = eig.eigenvectors() * ((eig.eigenvectors().transpose() * atb).array() / eig.eigenvalues().array()).matrix();
  const double sse = std::max(0.0, btb - coef.dot(atb));
  fit.full_rank = true;
  fit.value = coef(0) + base;
  fit.gradient = Vec2(coef(1), coef(2)) / scale;
  fit.residual_rms = std::sqrt(sse / static_cast<double>(pts.size()));
  return fit;
}

LocalFit fit_points(const Mesh& mesh, const FieldView& field, const Vec2& center,
                    const std::vector<VertexId>& pts, bool quadratic) {
  return quadratic ? fit_fixed<6>(mesh, field, center, pts) : fit_fixed<3>(mesh, field, center, pts);
}

std::vector<VertexId> stencil_points(const Mesh& mesh, VertexId at) {
  std::vector<VertexId> pts(mesh.neighbors(at).begin(), mesh.neighbors(at).end());
  pts.push_back(at);
  return pts;
}

void require_full_interior(const Mesh& mesh, const FieldView& field, VertexId at, const char* op) {
  check_vertex(mesh, at, op);
  if (mesh.is_boundary(at)) throw std::invalid_argument(std::string(op) + ": vertex is on the boundary");
  if (!mesh.has_full_stencil(at)) throw std::invalid_argument(std::string(op) + ": vertex lacks a full stencil");
  if (at == field.source) throw std::invalid_argument(std::string(op) + ": vertex is the source");
}

void gather(const Mesh& mesh, const Vec2& p, std::vector<VertexId>& pts) {
  double r = 2.0 * mesh.h;
  for (int k = 0; k < 6; ++k, r *= 1.5) {
    mesh.vertices_near(p, r, pts);
    if (pts.size() >= 8) break;
  }
  std::sort(pts.begin(), pts.end());
}

Polyline graph_backtrace(const Mesh& mesh, const FieldView& field, VertexId target) {
  Polyline out;
  VertexId v = target;
  out.vertices.push_back(v);
  out.points.push_back(mesh.vertices[v]);
  std::size_t guard = 0;
  while (v != field.source) {
    VertexId next = kNoVertex;
    double len = 0.0;
    const double dv = field[v];
    for (auto s = mesh.slot_begin(v); s < mesh.slot_end(v); ++s) {
      const VertexId u = mesh.slot_target(s);
      if (field[u] + mesh.slot_length(s) == dv && field[u] < dv && (next == kNoVertex || u < next)) {
        next = u;
        len = mesh.slot_length(s);
      }
    }
    if (next == kNoVertex || ++guard > mesh.size()) {
      throw std::runtime_error("graph backtrace found no exact predecessor");
    }
    out.length += len;
    v = next;
    out.vertices.push_back(v);
    out.points.push_back(mesh.vertices[v]);
  }
  return out;
}

}  // namespace

std::string to_string(Scheme scheme) { return scheme == Scheme::graph ? "graph" : "upwind"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "graph") return Scheme::graph;
  if (name == "upwind") return Scheme::upwind;
  throw std::invalid_argument("unknown distance scheme: " + name);
}

FieldView view(const DistanceField& field) {
  return FieldView{field.dist.data(), 1, field.source, field.scheme};
}

namespace {

void run_engine(const Mesh& mesh, const std::vector<std::pair<VertexId, double>>& seeds, Scheme scheme,
                double* dist_out, std::size_t stride, VertexId* parent_out) {
  const auto n = mesh.size();
  std::vector<double> dist(n, kInf);
  std::vector<VertexId> parent(n, kNoVertex);
  std::vector<std::uint8_t> done(n, 0);
  VertexHeap queue(dist.data(), n);
  for (const auto& [v, d0] : seeds) {
    if (d0 < dist[v]) {
      dist[v] = d0;
      queue.push_or_decrease(v);
    }
  }
  while (!queue.empty()) {
    const VertexId a = queue.pop();
    const double d = dist[a];
    done[a] = 1;
    for (auto s = mesh.slot_begin(a); s < mesh.slot_end(a); ++s) {
      const VertexId x = mesh.slot_target(s);
      if (done[x]) continue;
      double cand = d + mesh.slot_length(s);
      if (scheme == Scheme::upwind) {
        const auto r = mesh.reverse_slot(s);
        // a triangle value is at least min(ua, ub) plus the distance from x to [a, b]
        const double bound = std::min(cand, dist[x]);
        if (mesh.fan_triangle(r)) {
          const VertexId b = mesh.slot_target(mesh.next_slot(x, r));
          const double* f = mesh.fan_form(r);
          if (done[b] && std::min(d, dist[b]) + f[3] < bound) cand = std::min(cand, triangle_update(f, d, dist[b]));
        }
        const auto pr = mesh.prev_slot(x, r);
        if (mesh.fan_triangle(pr)) {
          const VertexId b = mesh.slot_target(pr);
          const double* f = mesh.fan_form(pr);
          if (done[b] && std::min(d, dist[b]) + f[3] < bound) cand = std::min(cand, triangle_update(f, dist[b], d));
        }
      }
      if (cand < dist[x]) cand = quantize_length(cand);
      if (cand < dist[x]) {
        dist[x] = cand;
        parent[x] = a;
        queue.push_or_decrease(x);
      }
    }
  }
  std::size_t unreachable = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!done[v]) ++unreachable;
    dist_out[v * stride] = dist[v];
    if (parent_out) parent_out[v] = parent[v];
  }
  if (unreachable > 0) {
    std::ostringstream msg;
    msg << unreachable << " vertices unreachable from source " << seeds.front().first;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

void distance_field_into(const Mesh& mesh, VertexId source, Scheme scheme, double* dist_out,
                         std::size_t stride, VertexId* parent_out) {
  check_vertex(mesh, source, "source");
  run_engine(mesh, {{source, 0.0}}, scheme, dist_out, stride, parent_out);
}

DistanceField distance_field_from_point(const Mesh& mesh, const Vec2& q, Scheme scheme) {
  const Vec2 p = mesh.shape.project_inside(q);
  std::vector<VertexId> near;
  mesh.vertices_near(p, 1.5 * mesh.h, near);
  std::sort(near.begin(), near.end());
  std::vector<std::pair<VertexId, double>> seeds;
  const double tol = 0.05 * mesh.h;
  for (VertexId v : near) {
    if (!mesh.shape.segment_inside(p, mesh.vertices[v], tol)) continue;
    seeds.emplace_back(v, quantize_length(segment_metric_length(
                              [&](const Vec2& x) { return mesh.metric_at_point(x); }, p, mesh.vertices[v])));
  }
  DistanceField f;
  f.source = mesh.nearest_vertex(p);
  if (seeds.empty()) seeds.emplace_back(f.source, 0.0);
  f.scheme = scheme;
  f.dist.resize(mesh.size());
  f.parent.resize(mesh.size());
  run_engine(mesh, seeds, scheme, f.dist.data(), 1, f.parent.data());
  return f;
}

DistanceField distance_field(const Mesh& mesh, VertexId source, Scheme scheme) {
  DistanceField f;
  f.source = source;
  f.scheme = scheme;
  f.dist.resize(mesh.size());
  f.parent.resize(mesh.size());
  distance_field_into(mesh, source, scheme, f.dist.data(), 1, f.parent.data());
  return f;
}

Polyline shortest_path(const Mesh& mesh, const DistanceField& field, VertexId target) {
  check_vertex(mesh, target, "target");
  if (field.scheme == Scheme::upwind) return shortest_path(mesh, view(field), target);
  if (!std::isfinite(field.dist[target])) throw std::runtime_error("target unreachable");
  Polyline out;
  VertexId v = target;
  out.vertices.push_back(v);
  out.points.push_back(mesh.vertices[v]);
  while (v != field.source) {
    const VertexId u = field.parent[v];
    if (u == kNoVertex) throw std::runtime_error("target unreachable");
    for (auto s = mesh.slot_begin(v); s < mesh.slot_end(v); ++s) {
      if (mesh.slot_target(s) == u) {
        out.length += mesh.slot_length(s);
        break;
      }
    }
    v = u;
    out.vertices.push_back(v);
    out.points.push_back(mesh.vertices[v]);
  }
  return out;
}

Polyline shortest_path(const Mesh& mesh, const FieldView& field, VertexId target) {
  check_vertex(mesh, target, "target");
  if (!std::isfinite(field[target])) throw std::runtime_error("target unreachable");
  if (field.scheme == Scheme::graph) return graph_backtrace(mesh, field, target);
  Polyline out = descent_path(mesh, field, mesh.vertices[target]);
  if (!out.vertices.empty()) out.vertices.front() = target;
  out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  return out;
}

Polyline descent_path(const Mesh& mesh, const FieldView& field, const Vec2& start, double max_length) {
  Polyline out;
  const Vec2 src = mesh.vertices[field.source];
  const double h = mesh.h;
  const double step = 0.5 * h;
  Vec2 p = mesh.shape.project_inside(start);
  out.points.push_back(p);
  out.vertices.push_back(mesh.nearest_vertex(p));
  const double d0 = sample_field(mesh, field, p);
  const std::size_t max_steps = static_cast<std::size_t>(8.0 * d0 / step) + 200;
  std::vector<VertexId> pts;
  std::size_t stalled = 0;
  double best = d0;
  for (std::size_t it = 0; it < max_steps; ++it) {
    if ((p - src).norm() <= 2.0 * h) break;
    if (out.length >= max_length) return out;
    gather(mesh, p, pts);
    const LocalFit fit = fit_points(mesh, field, p, pts, false);
    if (!fit.full_rank) break;
    const Mat2 g = mesh.metric_at_point(p);
    Vec2 dir = -g.ldlt().solve(fit.gradient);
    const double norm = metric_norm(g, dir);
    if (!(norm > 1e-12)) break;
    dir /= norm;
    const Vec2 q = mesh.shape.project_inside(p + step * dir);
    out.length += metric_norm(g, q - p);
    p = q;
    out.points.push_back(p);
    const VertexId nv = mesh.nearest_vertex(p);
    if (nv != out.vertices.back()) out.vertices.push_back(nv);
    const double val = sample_field(mesh, field, p);
    if (val < best - 1e-12) {
      best = val;
      stalled = 0;
    } else if (++stalled > 8) {
      break;
    }
  }
  const Mat2& gs = mesh.metric_at(field.source);
  out.length += metric_norm(gs, src - p);
  out.points.push_back(src);
  if (out.vertices.back() != field.source) out.vertices.push_back(field.source);
  return out;
}

LocalFit linear_fit(const Mesh& mesh, const FieldView& field, VertexId at) {
  return fit_points(mesh, field, mesh.vertices[at], stencil_points(mesh, at), false);
}

LocalFit quadratic_fit(const Mesh& mesh, const FieldView& field, VertexId at) {
  return fit_points(mesh, field, mesh.vertices[at], stencil_points(mesh, at), true);
}

Direction direction_at(const Mesh& mesh, const FieldView& field, VertexId at) {
  require_full_interior(mesh, field, at, "direction_at");
  const LocalFit fit = linear_fit(mesh, field, at);
  if (!fit.full_rank) throw std::runtime_error("direction_at: rank-deficient stencil");
  const Mat2& g = mesh.metric_at(at);
  const Vec2 raised = g.ldlt().solve(fit.gradient);
  const double dual = std::sqrt(std::max(0.0, fit.gradient.dot(raised)));
  if (dual < 0.5) {
    std::ostringstream msg;
    msg << "direction_at: gradient norm " << dual << " below 0.5 (near cut locus)";
    throw std::runtime_error(msg.str());
  }
  Direction d;
  d.base = at;
  d.vector = -raised / metric_norm(g, raised);
  return d;
}

Direction direction_at(const Mesh& mesh, const DistanceField& field, VertexId at) {
  return direction_at(mesh, view(field), at);
}

double eikonal_defect(const Mesh& mesh, const FieldView& field, VertexId at) {
  const LocalFit fit = linear_fit(mesh, field, at);
  if (!fit.full_rank) return 1.0;
  const Vec2 raised = mesh.metric_at(at).ldlt().solve(fit.gradient);
  return 1.0 - std::sqrt(std::max(0.0, fit.gradient.dot(raised)));
}

bool detect_cut(const Mesh& mesh, const FieldView& field, VertexId at, double tau,
                double eikonal_gate) {
  require_full_interior(mesh, field, at, "detect_cut");
  for (VertexId u : mesh.neighbors(at)) {
    if (u == field.source) throw std::invalid_argument("detect_cut: vertex is adjacent to the source");
  }
  const LocalFit fit = linear_fit(mesh, field, at);
  if (!fit.full_rank) return true;
  if (fit.residual_rms <= tau * mesh.h) return false;
  const Vec2 raised = mesh.metric_at(at).ldlt().solve(fit.gradient);
  return 1.0 - std::sqrt(std::max(0.0, fit.gradient.dot(raised))) > eikonal_gate;
}

bool detect_cut(const Mesh& mesh, const DistanceField& field, VertexId at, double tau,
                double eikonal_gate) {
  return detect_cut(mesh, view(field), at, tau, eikonal_gate);
}

double sample_field(const Mesh& mesh, const FieldView& field, const Vec2& p) {
  const double h = mesh.h;
  const double fx = p.x() / h;
  const double fy = p.y() / h;
  const long i = static_cast<long>(std::floor(fx));
  const long j = static_cast<long>(std::floor(fy));
  const VertexId v00 = mesh.lattice_vertex(i, j);
  const VertexId v10 = mesh.lattice_vertex(i + 1, j);
  const VertexId v01 = mesh.lattice_vertex(i, j + 1);
  const VertexId v11 = mesh.lattice_vertex(i + 1, j + 1);
  if (v00 != kNoVertex && v10 != kNoVertex && v01 != kNoVertex && v11 != kNoVertex) {
    const double s = fx - static_cast<double>(i);
    const double t = fy - static_cast<double>(j);
    return (1 - s) * (1 - t) * field[v00] + s * (1 - t) * field[v10] + (1 - s) * t * field[v01] +
           s * t * field[v11];
  }
  std::vector<VertexId> pts;
  gather(mesh, p, pts);
  const LocalFit fit = fit_points(mesh, field, p, pts, false);
  if (!fit.full_rank) return field[mesh.nearest_vertex(p)];
  return fit.value;
}

Interpolant interpolant_at(const Mesh& mesh, const Vec2& p) {
  Interpolant out;
  const double fx = p.x() / mesh.h;
  const double fy = p.y() / mesh.h;
  const long i = static_cast<long>(std::floor(fx));
  const long j = static_cast<long>(std::floor(fy));
  const VertexId c[4] = {mesh.lattice_vertex(i, j), mesh.lattice_vertex(i + 1, j),
                         mesh.lattice_vertex(i, j + 1), mesh.lattice_vertex(i + 1, j + 1)};
  if (std::none_of(c, c + 4, [](VertexId v) { return v == kNoVertex; })) {
    const double s = fx - static_cast<double>(i);
    const double t = fy - static_cast<double>(j);
    out.vertices.assign(c, c + 4);
    out.weights = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
    return out;
  }
  gather(mesh, p, out.vertices);
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  for (VertexId v : out.vertices) {
    const Vec2 d = (mesh.vertices[v] - p) / mesh.h;
    const Eigen::Vector3d row(1.0, d.x(), d.y());
    ata += row * row.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata);
  if (out.vertices.size() < 3 || eig.eigenvalues()(0) <= 1e-9 * eig.eigenvalues()(2)) {
    out.vertices = {mesh.nearest_vertex(p)};
    out.weights = {1.0};
    return out;
  }
  // value at p is the constant coefficient: e0^T (A^T A)^-1 A^T b
  const Eigen::Vector3d e = eig.eigenvectors() *
                            ((eig.eigenvectors().transpose() * Eigen::Vector3d::UnitX()).array() /
                             eig.eigenvalues().array()).matrix();
  for (VertexId v : out.vertices) {
    const Vec2 d = (mesh.vertices[v] - p) / mesh.h;
    out.weights.push_back(e(0) + e(1) * d.x() + e(2) * d.y());
  }
  return out;
}

Vec2 field_gradient(const Mesh& mesh, const FieldView& field, const Vec2& p) {
  std::vector<VertexId> pts;
  gather(mesh, p, pts);
  const LocalFit fit = fit_points(mesh, field, p, pts, false);
  if (!fit.full_rank) throw std::runtime_error("field_gradient: rank-deficient neighborhood");
  return fit.gradient;
}

Vec2 boundary_tangent(const Mesh& mesh, VertexId b) {
  if (!mesh.is_boundary(b)) throw std::invalid_argument("boundary_tangent: not a boundary vertex");
  const auto& loop = mesh.boundary_order[mesh.boundary_loop(b)];
  const auto k = static_cast<std::size_t>(mesh.boundary_position(b));
  const Vec2 next = mesh.vertices[loop[(k + 1) % loop.size()]];
  const Vec2 prev = mesh.vertices[loop[(k + loop.size() - 1) % loop.size()]];
  return (next - prev).normalized();
}

RegularWindow regular_boundary_window(const Mesh& mesh, const MetricDomain& domain, VertexId p,
                                      const std::vector<VertexId>& candidates,
                                      const std::vector<double>& dist_from_p,
                                      const FieldProvider& fields, const WindowOptions& options) {
  (void)domain;
  check_vertex(mesh, p, "window center");
  if (mesh.is_boundary(p)) throw std::invalid_argument("regular_boundary_window: p must be interior");
  if (candidates.empty() || candidates.size() != dist_from_p.size()) {
    throw std::invalid_argument("regular_boundary_window: candidate/distance size mismatch");
  }
  std::size_t qi = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (dist_from_p[i] < dist_from_p[qi] ||
        (dist_from_p[i] == dist_from_p[qi] && candidates[i] < candidates[qi])) {
      qi = i;
    }
  }
  RegularWindow window;
  window.center_point = p;
  window.nearest = candidates[qi];

  const int loop = mesh.boundary_loop(candidates[qi]);
  std::vector<std::size_t> on_loop;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (mesh.boundary_loop(candidates[i]) == loop) on_loop.push_back(i);
  }
  std::stable_sort(on_loop.begin(), on_loop.end(), [&](std::size_t a, std::size_t b) {
    return mesh.boundary_position(candidates[a]) < mesh.boundary_position(candidates[b]);
  });
  const auto m = on_loop.size();
  const auto start = static_cast<std::size_t>(
      std::find(on_loop.begin(), on_loop.end(), qi) - on_loop.begin());

  const double h = mesh.h;
  const double min_sin = std::sin(options.theta_min_deg * std::numbers::pi / 180.0);
  std::vector<int> memo(m, -1);
  auto regular = [&](std::size_t li) -> bool {
    if (memo[li] >= 0) return memo[li] == 1;
    const std::size_t ci = on_loop[li];
    const VertexId z = candidates[ci];
    const FieldView f = fields(ci);
    bool ok = true;
    try {
      if (detect_cut(mesh, f, p, options.tau_cut, options.eikonal_gate)) ok = false;
    } catch (const std::invalid_argument&) {
      ok = false;
    }
    if (ok) {
      const Polyline path = shortest_path(mesh, f, p);
      const Vec2 zp = mesh.vertices[z];
      for (std::size_t k = 0; ok && k < path.points.size(); ++k) {
        const Vec2& q = path.points[k];
        if ((q - zp).norm() <= 2.0 * h) continue;
        if (mesh.shape.signed_distance(q) < 0.25 * h) ok = false;
      }
      if (ok) {
        // Chord from z to the first path point at least 3h away.
        Vec2 w = Vec2::Zero();
        for (auto it = path.points.rbegin(); it != path.points.rend(); ++it) {
          if ((*it - zp).norm() >= 3.0 * h) {
            w = *it - zp;
            break;
          }
        }
        if (w.isZero()) w = path.points.front() - zp;
        const Mat2& g = mesh.metric_at(z);
        const Vec2 t = boundary_tangent(mesh, z);
        const double c = metric_dot(g, t, w) / (metric_norm(g, t) * metric_norm(g, w));
        if (std::sqrt(std::max(0.0, 1.0 - c * c)) < min_sin) ok = false;
      }
    }
    memo[li] = ok ? 1 : 0;
    return ok;
  };

  if (!regular(start)) {
    throw std::runtime_error("regular_boundary_window: nearest boundary sample is not regular");
  }
  std::size_t left = 0, right = 0;
  while (left + right + 1 < m && regular((start + m - left - 1) % m)) ++left;
  while (left + right + 1 < m && regular((start + right + 1) % m)) ++right;
  window.whole_loop = left + right + 1 == m;
  for (std::size_t k = 0; k < left + right + 1; ++k) {
    window.boundary_samples.push_back(candidates[on_loop[(start + m - left + k) % m]]);
  }
  if (window.boundary_samples.size() < options.min_size) {
    std::ostringstream msg;
    msg << "regular_boundary_window: only " << window.boundary_samples.size()
        << " regular samples around the nearest boundary point";
    throw std::runtime_error(msg.str());
  }
  return window;
}

RegularWindow regular_boundary_window(const Mesh& mesh, const MetricDomain& domain, VertexId p,
                                      Scheme scheme, const WindowOptions& options) {
  const DistanceField from_p = distance_field(mesh, p, scheme);
  std::vector<VertexId> candidates;
  std::vector<double> dist;
  for (const auto& loop : mesh.boundary_order) {
    for (VertexId b : loop) {
      candidates.push_back(b);
      dist.push_back(from_p.dist[b]);
    }
  }
  std::map<std::size_t, DistanceField> cache;
  auto provider = [&](std::size_t i) -> FieldView {
    auto it = cache.find(i);
    if (it == cache.end()) it = cache.emplace(i, distance_field(mesh, candidates[i], scheme)).first;
    return view(it->second);
  };
  return regular_boundary_window(mesh, domain, p, candidates, dist, provider, options);
}

void write_field(std::ostream& out, const DistanceField& field) {
  out.write("DDF0", 4);
  detail::put_u64(out, field.dist.size());
  for (double d : field.dist) detail::put_f64(out, d);
  for (std::size_t v = 0; v < field.dist.size(); ++v) {
    detail::put_i64(out, v < field.parent.size() ? field.parent[v] : -1);
  }
  if (!out) throw std::runtime_error("failed to write distance field");
}

DistanceField read_field(std::istream& in) {
  detail::expect_magic(in, "DDF0");
  const auto n = detail::get_u64(in);
  if (n > (1ull << 31)) throw std::runtime_error("implausible vertex count in DDF0 header");
  DistanceField f;
  f.dist.resize(n);
  f.parent.resize(n);
  for (auto& d : f.dist) d = detail::get_f64(in);
  for (std::size_t v = 0; v < n; ++v) {
    const auto p = detail::get_i64(in);
    f.parent[v] = static_cast<VertexId>(p);
    if (p == -1) {
      if (f.source != kNoVertex && f.dist[v] == 0.0) throw std::runtime_error("multiple sources in DDF0");
      if (f.dist[v] == 0.0) f.source = static_cast<VertexId>(v);
    }
  }
  return f;
}

}  // namespace ddrlab
