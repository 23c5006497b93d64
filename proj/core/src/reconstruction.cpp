#include "ddrlab/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ddrlab/parallel.hpp"

namespace ddrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) { return v.empty() ? 0.0 : quantile(std::move(v), 0.5); }

double cyclic(double a, double b, double length) {
  double d = std::fmod(std::abs(a - b), length);
  return std::min(d, length - d);
}

VertexId nearest_boundary_vertex(const Mesh& mesh, const Vec2& q) {
  std::vector<VertexId> near;
  for (double r = 3.0 * mesh.h; r < 64.0 * mesh.h; r *= 2.0) {
    mesh.vertices_near(q, r, near);
    VertexId best = kNoVertex;
    double bd = kInf;
    for (VertexId v : near) {
      if (!mesh.is_boundary(v)) continue;
      const double d = (mesh.vertices[v] - q).norm();
      if (d < bd || (d == bd && v < best)) {
        bd = d;
        best = v;
      }
    }
    if (best != kNoVertex) return best;
  }
  VertexId best = kNoVertex;
  double bd = kInf;
  for (const auto& loop : mesh.boundary_order) {
    for (VertexId v : loop) {
      const double d = (mesh.vertices[v] - q).norm();
      if (d < bd) {
        bd = d;
        best = v;
      }
    }
  }
  return best;
}

// Arc displacement between a boundary vertex of M and the projection of q
// onto the boundary polygon of M', plus the metric length of q's offset from
// that projection. The projection is taken on the two edges at the boundary
// vertex nearest q, with the arc coordinate interpolated along the edge.
double boundary_offset(const Mesh& mesh_a, VertexId x, const Mesh& mesh_b, const Vec2& q) {
  const VertexId b = nearest_boundary_vertex(mesh_b, q);
  if (b == kNoVertex) return kInf;
  const int loop = mesh_a.boundary_loop(x);
  if (loop != mesh_b.boundary_loop(b)) return kInf;
  const auto& order = mesh_b.boundary_order[loop];
  const double length = mesh_b.loop_length(loop);
  const std::size_t n = order.size();
  const std::size_t pos = static_cast<std::size_t>(mesh_b.boundary_position(b));
  Vec2 foot = mesh_b.vertices[b];
  double foot_arc = mesh_b.boundary_arc(b);
  for (std::size_t nb : {(pos + 1) % n, (pos + n - 1) % n}) {
    const VertexId c = order[nb];
    const Vec2 seg = mesh_b.vertices[c] - mesh_b.vertices[b];
    const double len2 = seg.squaredNorm();
    if (len2 == 0.0) continue;
    const double t = std::clamp((q - mesh_b.vertices[b]).dot(seg) / len2, 0.0, 1.0);
    const Vec2 p = mesh_b.vertices[b] + t * seg;
    if ((q - p).norm() < (q - foot).norm()) {
      foot = p;
      const double gap = cyclic(mesh_b.boundary_arc(b), mesh_b.boundary_arc(c), length);
      const double dir = nb == (pos + 1) % n ? 1.0 : -1.0;
      foot_arc = std::fmod(mesh_b.boundary_arc(b) + dir * t * gap + length, length);
    }
  }
  const double arc = cyclic(mesh_a.boundary_arc(x), foot_arc, length);
  return arc + metric_norm(mesh_b.metric_at_point(q), q - foot);
}

double distance_to_polyline(const Vec2& q, const std::vector<Vec2>& pts) {
  if (pts.empty()) return kInf;
  double best = (q - pts.front()).norm();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1];
    const Vec2 d = pts[i] - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((q - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (q - (a + t * d)).norm());
  }
  return best;
}

// Unit normal of the polyline at its point closest to q.
Vec2 polyline_normal(const Vec2& q, const std::vector<Vec2>& pts) {
  double best = kInf;
  Vec2 dir(1.0, 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1];
    const Vec2 d = pts[i] - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) continue;
    const double t = std::clamp((q - a).dot(d) / len2, 0.0, 1.0);
    const double dist = (q - (a + t * d)).norm();
    if (dist < best) {
      best = dist;
      dir = d.normalized();
    }
  }
  return Vec2(-dir.y(), dir.x());
}

Mat2 inverse_sqrt(const Mat2& g) {
  Eigen::SelfAdjointEigenSolver<Mat2> eig(g);
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

void summarize(Correspondence& c) {
  std::vector<double> defects;
  double bmax = -kInf;
  for (const auto& p : c.pairs) {
    defects.push_back(p.sup_defect);
    if (p.ambiguous) ++c.ambiguous;
    if (!p.mutual) ++c.non_mutual;
    if (p.boundary && !std::isnan(p.boundary_offset)) bmax = std::max(bmax, p.boundary_offset);
  }
  c.median_sup_defect = median_of(defects);
  if (bmax > -kInf) c.boundary_defect = bmax;
}

}  // namespace

DenseMatcher::DenseMatcher(const Mesh& mesh, const FrameTable& table, const MatchOptions& options)
    : mesh_(mesh), table_(table), options_(options) {
  if (table.vertex_count() != mesh.size()) throw std::invalid_argument("DenseMatcher: table does not belong to mesh");
  if (!(options.coarse_spacing > 0.0)) throw std::invalid_argument("DenseMatcher: coarse spacing must be positive");
  const long stride = std::max(1L, std::lround(options.coarse_spacing / mesh.h));
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.size()); ++v) {
    if (mesh.is_boundary(v)) {
      if (mesh.boundary_position(v) % stride == 0) coarse_.push_back(v);
      continue;
    }
    const long i = std::lround(mesh.vertices[v].x() / mesh.h);
    const long j = std::lround(mesh.vertices[v].y() / mesh.h);
    if (i % stride == 0 && j % stride == 0) coarse_.push_back(v);
  }
  local_radius_ = 1.5 * static_cast<double>(stride) * mesh.h;
}

double DenseMatcher::cost_at(const double* query, const Vec2& q, std::vector<double>& scratch) const {
  table_.row_at(mesh_, q, scratch.data());
  return compact_sup(query, scratch.data(), table_.k());
}

DenseMatcher::Result DenseMatcher::match(const double* query) const {
  const std::size_t k = table_.k();
  auto cost = [&](VertexId v) { return compact_sup(query, table_.row(v), k); };

  // coarse winner and the best coarse point well away from it
  VertexId c1 = kNoVertex, c2 = kNoVertex;
  double b1 = kInf, b2 = kInf;
  std::vector<double> coarse_cost(coarse_.size());
  for (std::size_t i = 0; i < coarse_.size(); ++i) {
    coarse_cost[i] = cost(coarse_[i]);
    if (coarse_cost[i] < b1) {
      b1 = coarse_cost[i];
      c1 = coarse_[i];
    }
  }
  for (std::size_t i = 0; i < coarse_.size(); ++i) {
    if ((mesh_.vertices[coarse_[i]] - mesh_.vertices[c1]).norm() < 2.0 * local_radius_) continue;
    if (coarse_cost[i] < b2) {
      b2 = coarse_cost[i];
      c2 = coarse_[i];
    }
  }

  VertexId best = kNoVertex;
  double best_cost = kInf;
  std::vector<VertexId> near;
  for (VertexId c : {c1, c2}) {
    if (c == kNoVertex) continue;
    mesh_.vertices_near(mesh_.vertices[c], local_radius_, near);
    std::sort(near.begin(), near.end());
    for (VertexId v : near) {
      const double cv = cost(v);
      if (cv < best_cost) {
        best_cost = cv;
        best = v;
      }
    }
  }
  for (bool moved = true; moved;) {
    moved = false;
    for (VertexId u : mesh_.neighbors(best)) {
      const double cu = cost(u);
      if (cu < best_cost) {
        best_cost = cu;
        best = u;
        moved = true;
      }
    }
  }

  Result r;
  r.vertex = best;
  r.point = mesh_.vertices[best];
  r.defect = best_cost;
  std::vector<double> scratch(k);
  if (options_.refine) {
    double step = 0.5 * mesh_.h;
    const double stop = mesh_.h / 64.0;
    static const Vec2 dirs[8] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int iter = 0; iter < 400 && step >= stop; ++iter) {
      bool improved = false;
      for (const Vec2& d : dirs) {
        const Vec2 q = r.point + step * d;
        if (!mesh_.shape.contains(q)) continue;
        const double cq = cost_at(query, q, scratch);
        if (cq < r.defect) {
          r.defect = cq;
          r.point = q;
          improved = true;
          break;
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  table_.row_at(mesh_, r.point, scratch.data());
  for (std::size_t i = 0; i < coarse_.size(); ++i) {
    if (coarse_cost[i] >= r.second_best) continue;
    if (compact_sup(table_.row(coarse_[i]), scratch.data(), k) < options_.separation) continue;
    r.second_best = coarse_cost[i];
  }
  r.ambiguous = std::isfinite(r.second_best) && r.defect >= options_.ratio_level * r.second_best;
  return r;
}

std::vector<VertexId> source_grid(const Mesh& mesh, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("source grid spacing must be positive");
  const long stride = std::max(1L, std::lround(spacing / mesh.h));
  std::vector<VertexId> out;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.size()); ++v) {
    if (mesh.is_boundary(v)) continue;
    const long i = std::lround(mesh.vertices[v].x() / mesh.h);
    const long j = std::lround(mesh.vertices[v].y() / mesh.h);
    if (i % stride == 0 && j % stride == 0) out.push_back(v);
  }
  for (std::size_t l = 0; l < mesh.boundary_order.size(); ++l) {
    const auto& loop = mesh.boundary_order[l];
    const double length = mesh.loop_length(static_cast<int>(l));
    const std::size_t count = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(length / spacing)));
    for (std::size_t j = 0; j < std::min(count, loop.size()); ++j) out.push_back(loop[j * loop.size() / count]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DDFArchive archive_from_table(const FrameTable& table, const std::vector<VertexId>& sources) {
  DDFArchive a;
  a.frame = table.frame();
  for (VertexId v : sources) {
    a.sources.push_back(v);
    a.matrices.push_back(table.ddf(v));
  }
  return a;
}

Correspondence build_phi(const DDFArchive& a, const DDFArchive& b, const MatchOptions& options,
                         const Mesh* mesh_a, const Mesh* mesh_b) {
  if (a.matrices.empty() || b.matrices.empty()) throw std::invalid_argument("build_phi: empty archive");
  if (!a.frame || !b.frame || a.frame->size() != b.frame->size() ||
      a.frame->samples != b.frame->samples) {
    throw std::invalid_argument("build_phi: frame mismatch");
  }
  const std::size_t k = a.frame->size();
  bool compact = true;
  for (const auto* arch : {&a, &b}) {
    for (const auto& m : arch->matrices) {
      if (m.k != k) throw std::invalid_argument("build_phi: matrix size mismatch");
      if (compact && !check_cocycle(m).cocycle) compact = false;
    }
  }
  // For exact cocycles column 0 determines the matrix, and the compact sup
  // over those columns equals the full sup over all pairs.
  auto column0 = [&](const DDFMatrix& m) {
    std::vector<double> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = m(i, 0);
    return c;
  };
  std::vector<std::vector<double>> ca, cb;
  if (compact) {
    for (const auto& m : a.matrices) ca.push_back(column0(m));
    for (const auto& m : b.matrices) cb.push_back(column0(m));
  }
  auto dist_ab = [&](std::size_t i, std::size_t j) {
    return compact ? compact_sup(ca[i].data(), cb[j].data(), k) : sup_dist(a.matrices[i], b.matrices[j]);
  };
  auto dist_bb = [&](std::size_t i, std::size_t j) {
    return compact ? compact_sup(cb[i].data(), cb[j].data(), k) : sup_dist(b.matrices[i], b.matrices[j]);
  };
  auto vertex_point = [](const Mesh* mesh, std::int64_t s) {
    if (!mesh || s < 0 || static_cast<std::size_t>(s) >= mesh->size()) return Vec2(Vec2::Zero());
    return mesh->vertices[static_cast<std::size_t>(s)];
  };

  Correspondence c;
  c.frame = a.frame;
  c.pairs.resize(a.matrices.size());
  std::vector<std::size_t> forward(a.matrices.size());
  parallel_for(a.matrices.size(), [&](std::size_t i) {
    std::size_t best = 0;
    double bd = kInf;
    for (std::size_t j = 0; j < b.matrices.size(); ++j) {
      const double d = dist_ab(i, j);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    forward[i] = best;
    PhiPair& p = c.pairs[i];
    p.source = a.sources[i];
    p.match = b.sources[best];
    p.sup_defect = bd;
    for (std::size_t j = 0; j < b.matrices.size(); ++j) {
      if (j == best) continue;
      const double d = dist_ab(i, j);
      if (d < p.second_best && dist_bb(j, best) >= options.separation) p.second_best = d;
    }
    p.ambiguous = std::isfinite(p.second_best) && bd >= options.ratio_level * p.second_best;
    p.x = vertex_point(mesh_a, p.source);
    p.x_prime = vertex_point(mesh_b, p.match);
  });
  parallel_for(a.matrices.size(), [&](std::size_t i) {
    const std::size_t j = forward[i];
    std::size_t back = 0;
    double bd = kInf;
    for (std::size_t l = 0; l < a.matrices.size(); ++l) {
      const double d = dist_ab(l, j);
      if (d < bd) {
        bd = d;
        back = l;
      }
    }
    c.pairs[i].mutual = back == i;
  });
  if (mesh_a && mesh_b) {
    for (auto& p : c.pairs) {
      if (p.source < 0 || static_cast<std::size_t>(p.source) >= mesh_a->size()) continue;
      const auto x = static_cast<VertexId>(p.source);
      if (!mesh_a->is_boundary(x)) continue;
      p.boundary = true;
      p.boundary_offset = boundary_offset(*mesh_a, x, *mesh_b, p.x_prime);
    }
  }
  summarize(c);
  return c;
}

Correspondence build_phi(const Mesh& mesh_a, const FrameTable& table_a,
                         const std::vector<VertexId>& sources, const DenseMatcher& matcher) {
  if (sources.empty()) throw std::invalid_argument("build_phi: empty source set");
  const FrameTable& table_b = matcher.table();
  if (table_a.k() != table_b.k() || table_a.frame()->samples != table_b.frame()->samples) {
    throw std::invalid_argument("build_phi: frame mismatch");
  }
  const Mesh& mesh_b = matcher.mesh();
  const std::size_t k = table_a.k();
  Correspondence c;
  c.frame = table_a.frame();
  c.pairs.resize(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) {
    const VertexId x = sources[i];
    const auto r = matcher.match(table_a.row(x));
    PhiPair& p = c.pairs[i];
    p.source = x;
    p.x = mesh_a.vertices[x];
    p.match = r.vertex;
    p.x_prime = r.point;
    p.sup_defect = r.defect;
    p.second_best = r.second_best;
    p.ambiguous = r.ambiguous;
    // reverse match of the image against the source set
    const std::vector<double> back_row = table_b.row_at(mesh_b, r.point);
    std::size_t back = 0;
    double bd = kInf;
    for (std::size_t l = 0; l < sources.size(); ++l) {
      const double d = compact_sup(table_a.row(sources[l]), back_row.data(), k);
      if (d < bd) {
        bd = d;
        back = l;
      }
    }
    p.mutual = back == i;
    if (mesh_a.is_boundary(x)) {
      p.boundary = true;
      p.boundary_offset = boundary_offset(mesh_a, x, mesh_b, r.point);
    }
  });
  summarize(c);
  return c;
}

double boundary_identity_check(const Correspondence& corr) {
  double worst = -kInf;
  for (const auto& p : corr.pairs) {
    if (p.boundary) worst = std::max(worst, p.boundary_offset);
  }
  if (worst == -kInf) throw std::invalid_argument("boundary_identity_check: no boundary sources");
  return worst;
}

RegularWindow common_window(const RegularWindow& window_a, const RegularWindow& window_b) {
  RegularWindow w = window_a;
  w.boundary_samples.clear();
  for (VertexId b : window_a.boundary_samples) {
    if (std::find(window_b.boundary_samples.begin(), window_b.boundary_samples.end(), b) !=
        window_b.boundary_samples.end()) {
      w.boundary_samples.push_back(b);
    }
  }
  w.whole_loop = window_a.whole_loop && window_b.whole_loop;
  return w;
}

GeodesicImageResult geodesic_image_check(const Mesh& mesh_a, const FrameTable& table_a,
                                         const DenseMatcher& matcher, VertexId p,
                                         const Vec2& p_prime, std::size_t z,
                                         const RegularWindow& window,
                                         const GeodesicImageOptions& options) {
  const auto& frame = *table_a.frame();
  if (z >= frame.size()) throw std::out_of_range("geodesic_image_check: sample index out of range");
  if (std::find(window.boundary_samples.begin(), window.boundary_samples.end(), frame.samples[z]) ==
      window.boundary_samples.end()) {
    throw std::invalid_argument("geodesic_image_check: z lies outside the regular window");
  }
  const Mesh& mesh_b = matcher.mesh();
  const double tol = options.tolerance > 0.0 ? options.tolerance : 2.0 * mesh_b.h;
  const double offset = options.probe_offset > 0.0 ? options.probe_offset : 6.0 * mesh_a.h;
  const Polyline path_a = shortest_path(mesh_a, table_a.column(z), p);
  const Polyline path_b = descent_path(mesh_b, matcher.table().column(z), p_prime);

  GeodesicImageResult r;
  std::vector<VertexId> interior;
  for (VertexId v : path_a.vertices) {
    if (!mesh_a.is_boundary(v)) interior.push_back(v);
  }
  std::vector<VertexId> on_path;
  const std::size_t keep = std::min(interior.size(), std::max<std::size_t>(options.max_samples, 1));
  for (std::size_t i = 0; i < keep; ++i) on_path.push_back(interior[i * interior.size() / keep]);
  for (VertexId v : on_path) {
    const auto m = matcher.match(table_a.row(v));
    const double off = distance_to_polyline(m.point, path_b.points);
    ++r.samples;
    if (off <= tol) ++r.hits;
    r.max_offset = std::max(r.max_offset, off);
  }
  r.fraction = r.samples ? static_cast<double>(r.hits) / static_cast<double>(r.samples) : 0.0;

  if (options.specificity) {
    for (std::size_t i = 0; i < on_path.size(); i += 2) {
      const Vec2 x = mesh_a.vertices[on_path[i]];
      const Vec2 n = polyline_normal(x, path_a.points);
      const Vec2 q = x + ((i / 2) % 2 == 0 ? offset : -offset) * n;
      if (mesh_a.shape.signed_distance(q) < mesh_a.h) continue;
      const VertexId u = mesh_a.nearest_vertex(q);
      if (mesh_a.is_boundary(u) || distance_to_polyline(mesh_a.vertices[u], path_a.points) < 0.75 * offset) continue;
      const auto m = matcher.match(table_a.row(u));
      ++r.probes;
      if (distance_to_polyline(m.point, path_b.points) > tol) ++r.rejected;
    }
    r.specificity = r.probes ? static_cast<double>(r.rejected) / static_cast<double>(r.probes) : 0.0;
  }
  return r;
}

CertificateReport isometry_certificate(Correspondence& corr, const Mesh& mesh_a,
                                       const FrameTable& table_a, const DenseMatcher& matcher,
                                       const CertificateOptions& options) {
  const Mesh& mesh_b = matcher.mesh();
  const FrameTable& table_b = matcher.table();
  CertificateReport rep;
  rep.options = options;
  rep.distance_tolerance = options.distance_tolerance > 0.0 ? options.distance_tolerance : 3.0 * mesh_a.h;
  const double jstep = options.jacobian_step > 0.0 ? options.jacobian_step : 4.0 * mesh_a.h;

  const double margin = std::max(options.probe_margin, options.probe_margin_h * mesh_a.h);
  std::vector<VertexId> candidates;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh_a.size()); ++v) {
    if (!mesh_a.is_boundary(v) && mesh_a.has_full_stencil(v) &&
        mesh_a.shape.signed_distance(mesh_a.vertices[v]) >= margin) {
      candidates.push_back(v);
    }
  }
  if (candidates.empty()) throw std::invalid_argument("isometry_certificate: no interior probe candidates");
  std::mt19937_64 rng(options.seed);
  std::vector<VertexId> probes;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  for (std::size_t tries = 0; probes.size() < options.probes && tries < 100 * options.probes; ++tries) {
    const VertexId v = candidates[pick(rng)];
    if (std::find(probes.begin(), probes.end(), v) == probes.end()) probes.push_back(v);
  }

  // distance partners at fixed Euclidean radii around each probe
  static constexpr double kRadii[] = {0.1, 0.2, 0.3};
  std::vector<std::vector<VertexId>> partners(probes.size());
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (double rad : kRadii) {
      const double a = angle(rng);
      const Vec2 q = mesh_a.vertices[probes[i]] + rad * Vec2(std::cos(a), std::sin(a));
      if (mesh_a.shape.signed_distance(q) < 2.0 * mesh_a.h) continue;
      const VertexId u = mesh_a.nearest_vertex(q);
      if (!mesh_a.is_boundary(u)) partners[i].push_back(u);
    }
  }

  rep.probes.resize(probes.size());
  std::vector<std::vector<double>> pair_lambdas(probes.size());
  std::vector<std::vector<double>> distance_defects(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    ProbeResult& pr = rep.probes[i];
    pr.p = probes[i];
    const auto m = matcher.match(table_a.row(pr.p));
    pr.p_prime = m.point;

    // zeroth order: d_M(p, u) against d_M'(p', u')
    const DistanceField fa = distance_field(mesh_a, pr.p, table_a.scheme());
    const DistanceField fb = distance_field_from_point(mesh_b, pr.p_prime, table_b.scheme());
    for (VertexId u : partners[i]) {
      const double da = fa.dist[u];
      if (da > options.distance_scale) continue;
      const auto mu = matcher.match(table_a.row(u));
      distance_defects[i].push_back(std::abs(da - sample_field(mesh_b, view(fb), mu.point)));
    }

    try {
      const RegularWindow wa = frame_window(mesh_a, MetricDomain{}, table_a, pr.p, options.window);
      const RegularWindow wb = frame_window_at(mesh_b, table_b, pr.p_prime, options.window);
      const RegularWindow w = common_window(wa, wb);
      pr.window_size = w.boundary_samples.size();
      if (pr.window_size < options.window.min_size) {
        std::ostringstream msg;
        msg << "common window has " << pr.window_size << " samples";
        throw std::runtime_error(msg.str());
      }
      const DphiReport d = angle_recovery_pair(mesh_a, table_a, pr.p, w, mesh_b, table_b, pr.p_prime, options.angles);
      if (d.pairs.empty()) throw std::runtime_error("no admissible direction pairs");
      pr.lambda = PointLambda{pr.p, pr.p_prime, d.lambda_median, d.lambda_spread, d.lambda_consistency, d.pairs.size()};
      for (const auto& pp : d.pairs) {
        pair_lambdas[i].push_back(pp.lambda1);
        pair_lambdas[i].push_back(pp.lambda2);
      }
      pr.covered = true;
      pr.lambda_ok = std::abs(d.lambda_median - 1.0) <= options.lambda_tolerance &&
                     d.lambda_spread <= options.spread_tolerance;
    } catch (const std::exception& e) {
      pr.failure = e.what();
    }

    // differential of the correspondence from matches at p +- step
    Mat2 jac;
    const Vec2 c = mesh_a.vertices[pr.p];
    for (int axis = 0; axis < 2; ++axis) {
      Vec2 e = Vec2::Zero();
      e(axis) = jstep;
      const auto plus = matcher.match(table_a.row_at(mesh_a, c + e).data());
      const auto minus = matcher.match(table_a.row_at(mesh_a, c - e).data());
      jac.col(axis) = (plus.point - minus.point) / (2.0 * jstep);
    }
    const Mat2 s = inverse_sqrt(mesh_a.metric_at(pr.p));
    const Mat2 pulled = s * jac.transpose() * mesh_b.metric_at_point(pr.p_prime) * jac * s;
    Eigen::SelfAdjointEigenSolver<Mat2> eig(pulled - Mat2::Identity());
    pr.isometry_defect = eig.eigenvalues().cwiseAbs().maxCoeff();
  });

  std::vector<double> spreads, pooled, iso;
  std::size_t lambda_pass = 0;
  corr.lambda_summary.clear();
  corr.isometry_defect.clear();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const ProbeResult& pr = rep.probes[i];
    iso.push_back(pr.isometry_defect);
    corr.isometry_defect.push_back(pr.isometry_defect);
    for (double d : distance_defects[i]) {
      ++rep.distance_pairs;
      rep.max_distance_defect = std::max(rep.max_distance_defect, d);
    }
    if (!pr.covered) continue;
    ++rep.covered;
    if (pr.lambda_ok) ++lambda_pass;
    spreads.push_back(pr.lambda.lambda_spread);
    pooled.insert(pooled.end(), pair_lambdas[i].begin(), pair_lambdas[i].end());
    corr.lambda_summary.push_back(pr.lambda);
  }
  rep.coverage = probes.empty() ? 0.0 : static_cast<double>(rep.covered) / static_cast<double>(probes.size());
  rep.lambda_pass_fraction = rep.covered ? static_cast<double>(lambda_pass) / static_cast<double>(rep.covered) : 0.0;
  rep.median_spread = median_of(spreads);
  rep.max_spread = spreads.empty() ? 0.0 : *std::max_element(spreads.begin(), spreads.end());
  rep.lambda_pooled_spread = pooled.empty() ? 0.0 : quantile(pooled, 0.9) - quantile(pooled, 0.1);
  rep.median_isometry_defect = median_of(iso);
  rep.coverage_ok = rep.coverage >= options.min_coverage;
  rep.lambda_ok = rep.covered > 0 && rep.lambda_pass_fraction >= options.lambda_fraction;
  rep.distance_ok = rep.distance_pairs > 0 && rep.max_distance_defect <= rep.distance_tolerance;
  rep.passed = rep.coverage_ok && rep.lambda_ok && rep.distance_ok;
  return rep;
}

}  // namespace ddrlab
