#include "ddrlab/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ddrlab/parallel.hpp"

namespace ddrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PolylinePoint {
  Vec2 point = Vec2::Zero();
  Vec2 normal = Vec2::Zero();
};

// Point at arclength fraction t of a polyline, with the unit normal of its segment.
PolylinePoint point_at_fraction(const std::vector<Vec2>& pts, double t) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  double target = t * total;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - pts[i - 1];
    const double len = d.norm();
    if (len == 0.0) continue;
    if (target <= len || i + 1 == pts.size()) {
      const Vec2 u = d / len;
      return {pts[i - 1] + std::min(target, len) * u, Vec2(-u.y(), u.x())};
    }
    target -= len;
  }
  return {pts.front(), Vec2(0.0, 1.0)};
}

double distance_to_polyline(const Vec2& q, const std::vector<Vec2>& pts) {
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

// Ids of the argmin set of a distance row, exact comparison.
std::vector<std::size_t> argmin_set(const double* row, std::size_t k) {
  const double m = *std::min_element(row, row + k);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (row[i] == m) out.push_back(i);
  }
  return out;
}

bool covered_within(const BoundaryFrame& frame, const std::vector<std::size_t>& a,
                    const std::vector<std::size_t>& b, double tol) {
  for (std::size_t i : a) {
    bool ok = false;
    for (std::size_t j : b) {
      if (frame.arc_distance(i, j) <= tol) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

double annulus_geodesic_length(const Vec2& a, const Vec2& b, double r) {
  const double ra = a.norm();
  const double rb = b.norm();
  if (ra < r || rb < r) throw std::invalid_argument("annulus_geodesic_length: point inside the hole");
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp(-a.dot(d) / len2, 0.0, 1.0) : 0.0;
  if ((a + t * d).norm() >= r) return std::sqrt(len2);
  const double theta = std::acos(std::clamp(a.dot(b) / (ra * rb), -1.0, 1.0));
  const double arc = theta - std::acos(r / ra) - std::acos(r / rb);
  return std::sqrt(ra * ra - r * r) + std::sqrt(rb * rb - r * r) + r * std::max(arc, 0.0);
}

OracleComparison annulus_oracle(const Mesh& mesh, const Vec2& a, const Vec2& b, Scheme scheme) {
  if (mesh.shape.kind() != DomainKind::annulus) throw std::invalid_argument("annulus_oracle: mesh is not an annulus");
  OracleComparison out;
  const VertexId va = mesh.nearest_vertex(a);
  const VertexId vb = mesh.nearest_vertex(b);
  out.a = mesh.vertices[va];
  out.b = mesh.vertices[vb];
  const auto t0 = std::chrono::steady_clock::now();
  const DistanceField f = distance_field(mesh, va, scheme);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.computed = f.dist[vb];
  out.analytic = annulus_geodesic_length(out.a, out.b, mesh.shape.inner_radius());
  out.relative_error = std::abs(out.computed - out.analytic) / out.analytic;
  return out;
}

std::vector<VertexId> sample_interior(const Mesh& mesh, std::size_t count, double margin,
                                      std::uint64_t seed) {
  Vec2 lo, hi;
  mesh.shape.bounding_box(lo, hi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  std::vector<VertexId> out;
  for (std::size_t tries = 0; out.size() < count && tries < 200 * count + 1000; ++tries) {
    const Vec2 q(ux(rng), uy(rng));
    if (mesh.shape.signed_distance(q) < margin) continue;
    const VertexId v = mesh.nearest_vertex(q);
    if (v == kNoVertex || mesh.is_boundary(v) || !mesh.has_full_stencil(v)) continue;
    if (std::find(out.begin(), out.end(), v) != out.end()) continue;
    out.push_back(v);
  }
  return out;
}

MetricSuiteReport metric_suite(const Mesh& mesh, const FrameTable& table,
                               const std::vector<VertexId>& sources, std::size_t triples,
                               std::size_t pairs, std::size_t fields, std::uint64_t seed) {
  MetricSuiteReport r;
  r.matrices = sources.size();
  std::vector<CocycleReport> reports(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) { reports[i] = check_cocycle(table.ddf(sources[i]), 16, seed + i); });
  for (const auto& c : reports) {
    r.diagonal_failures += !c.zero_diagonal;
    r.antisymmetry_failures += !c.antisymmetric;
    r.cocycle_failures += !c.cocycle;
  }

  const auto bases = sample_interior(mesh, fields, 0.0, seed);
  if (bases.size() < 2) throw std::runtime_error("metric_suite: too few interior vertices");
  std::vector<DistanceField> f(bases.size());
  parallel_for(bases.size(), [&](std::size_t i) { f[i] = distance_field(mesh, bases[i], table.scheme()); });

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
  std::uniform_int_distribution<VertexId> any(0, static_cast<VertexId>(mesh.size()) - 1);
  for (std::size_t t = 0; t < triples; ++t) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) j = (j + 1) % bases.size();
    const VertexId z = any(rng);
    // d(x, z) <= d(x, y) + d(y, z) with x, y field sources
    ++r.triples;
    if (f[i].dist[z] > f[i].dist[bases[j]] + f[j].dist[z]) ++r.triangle_violations;
  }
  for (std::size_t t = 0; t < pairs; ++t) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) j = (j + 1) % bases.size();
    ++r.symmetry_pairs;
    if (f[i].dist[bases[j]] != f[j].dist[bases[i]]) ++r.symmetry_violations;
    // 2-Lipschitz between x and an arbitrary vertex y
    const VertexId x = bases[i];
    const VertexId y = any(rng);
    const double d = f[i].dist[y];
    if (d <= 0.0) continue;
    ++r.lipschitz_pairs;
    const double s = table.sup_between(x, y);
    if (s > 2.0 * d) ++r.lipschitz_violations;
    r.max_lipschitz_ratio = std::max(r.max_lipschitz_ratio, s / d);
  }
  return r;
}

NearestReport verify_nearest(const Mesh& mesh, const FrameTable& table, std::size_t points,
                             std::uint64_t seed) {
  const auto xs = sample_interior(mesh, points, 0.0, seed);
  const auto& frame = *table.frame();
  std::vector<int> verdict(xs.size(), 0);
  parallel_for(xs.size(), [&](std::size_t i) {
    const DDFMatrix d = ddf(mesh, table.frame(), xs[i], table.scheme());
    const auto criterion = nearest_samples(d);
    const auto brute = argmin_set(table.row(xs[i]), table.k());
    if (criterion == brute) {
      verdict[i] = 0;
    } else if (!criterion.empty() && covered_within(frame, criterion, brute, frame.max_spacing) &&
               covered_within(frame, brute, criterion, frame.max_spacing)) {
      verdict[i] = 1;
    } else {
      verdict[i] = 2;
    }
  });
  NearestReport r;
  r.points = xs.size();
  for (int v : verdict) {
    if (v == 0) ++r.exact;
    else if (v == 1) ++r.ties;
    else ++r.disagree;
  }
  return r;
}

MembershipReport verify_membership(const Mesh& mesh, const MetricDomain& domain,
                                   const FrameTable& table, const MembershipOptions& options) {
  const auto& frame = *table.frame();
  MembershipReport r;
  r.delta_max = options.delta_max > 0.0 ? options.delta_max : 2.0 * frame.max_spacing;
  r.off_min = options.off_min > 0.0 ? options.off_min : 2.0 * r.delta_max;
  if (r.off_min >= options.off_max) throw std::invalid_argument("verify_membership: off_min must be below off_max");

  const auto ps = sample_interior(mesh, options.points, options.probe_margin, options.seed);
  std::vector<RegularWindow> windows(ps.size());
  std::vector<int> usable(ps.size(), 0);
  parallel_for(ps.size(), [&](std::size_t i) {
    try {
      windows[i] = frame_window(mesh, domain, table, ps[i], options.window);
      usable[i] = windows[i].boundary_samples.size() >= options.window.min_size;
    } catch (const std::exception&) {
      usable[i] = 0;
    }
  });
  std::vector<std::size_t> good;
  std::vector<double> sizes;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (usable[i]) {
      good.push_back(i);
      sizes.push_back(static_cast<double>(windows[i].boundary_samples.size()));
    }
  }
  r.points = good.size();
  r.skipped_points = ps.size() - good.size();
  if (good.empty()) return r;
  r.median_window = quantile(sizes, 0.5);

  struct Triple {
    std::size_t point;
    std::size_t z;
    double t;
    bool on;
    double offset;
  };
  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Triple> triples;
  for (std::size_t n = 0; n < options.triples; ++n) {
    const std::size_t pi = good[n % good.size()];
    const auto idx = window_sample_indices(table, windows[pi]);
    const std::size_t z = idx[static_cast<std::size_t>(unit(rng) * idx.size()) % idx.size()];
    const double t = 0.1 + 0.8 * unit(rng);
    const bool on = unit(rng) < 0.5;
    double offset = r.off_min + (options.off_max - r.off_min) * unit(rng);
    if (unit(rng) < 0.5) offset = -offset;
    triples.push_back({pi, z, t, on, offset});
  }

  // 0 skipped, 1 tp, 2 fp, 3 tn, 4 fn
  std::vector<int> outcome(triples.size(), 0);
  const std::size_t k = table.k();
  parallel_for(triples.size(), [&](std::size_t n) {
    const Triple& tr = triples[n];
    const VertexId p = ps[tr.point];
    const Polyline path = descent_path(mesh, table.column(tr.z), mesh.vertices[p]);
    if (path.points.size() < 2) return;
    const auto at = point_at_fraction(path.points, tr.t);
    Vec2 x = at.point;
    if (!tr.on) {
      x += tr.offset * at.normal;
      if (mesh.shape.signed_distance(x) < 2.0 * mesh.h) return;
      if (distance_to_polyline(x, path.points) < r.off_min) return;
    }
    std::vector<double> dx(k);
    table.row_at(mesh, x, dx.data());
    const PhiFunction phi = phi_function(table.frame(), table.row(p), dx.data(), tr.z);
    const bool member = geodesic_membership(phi, windows[tr.point], r.delta_max).member;
    outcome[n] = tr.on ? (member ? 1 : 4) : (member ? 2 : 3);
  });
  for (int o : outcome) {
    if (o == 0) continue;
    ++r.triples;
    if (o == 1) ++r.true_positive;
    if (o == 2) ++r.false_positive;
    if (o == 3) ++r.true_negative;
    if (o == 4) ++r.false_negative;
  }
  const double tp = static_cast<double>(r.true_positive);
  r.precision = r.true_positive + r.false_positive ? tp / double(r.true_positive + r.false_positive) : 0.0;
  r.recall = r.true_positive + r.false_negative ? tp / double(r.true_positive + r.false_negative) : 0.0;
  return r;
}

DphiCheckReport verify_dphi(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                            const DphiCheckOptions& options) {
  const auto ps = sample_interior(mesh, options.points, options.probe_margin, options.seed);
  std::vector<std::vector<double>> errors(ps.size());
  std::vector<int> ok(ps.size(), 0);
  parallel_for(ps.size(), [&](std::size_t i) {
    try {
      const RegularWindow w = frame_window(mesh, domain, table, ps[i], options.window);
      if (w.boundary_samples.size() < options.window.min_size) return;
      const DphiReport d = angle_recovery(mesh, table, ps[i], w, options.angles);
      for (const auto& pair : d.pairs) {
        errors[i].push_back(std::abs(pair.lambda1 * pair.lhs - pair.lhs));
        errors[i].push_back(std::abs(pair.lambda2 * pair.lhs - pair.lhs));
      }
      ok[i] = 1;
    } catch (const std::exception&) {
      ok[i] = 0;
    }
  });
  DphiCheckReport r;
  r.tolerance = options.tolerance;
  std::vector<double> all;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!ok[i]) {
      ++r.skipped_points;
      continue;
    }
    ++r.points;
    all.insert(all.end(), errors[i].begin(), errors[i].end());
  }
  r.pairs = all.size();
  for (double e : all) r.passed += e <= options.tolerance;
  if (!all.empty()) {
    r.fraction = static_cast<double>(r.passed) / static_cast<double>(r.pairs);
    r.median_error = quantile(all, 0.5);
    r.p90_error = quantile(all, 0.9);
    r.max_error = *std::max_element(all.begin(), all.end());
  }
  return r;
}

PipelineReport run_pipeline(const Mesh& mesh_a, const FrameTable& table_a, const Mesh& mesh_b,
                            const FrameTable& table_b, const GaugeMap* gauge,
                            const PipelineOptions& options, Correspondence* corr_out) {
  PipelineReport r;
  const DenseMatcher matcher(mesh_b, table_b, options.match);
  const auto sources = source_grid(mesh_a, options.source_spacing);
  Correspondence corr = build_phi(mesh_a, table_a, sources, matcher);
  r.sources = corr.pairs.size();
  r.median_sup_defect = corr.median_sup_defect;
  r.ambiguous = corr.ambiguous;
  r.non_mutual = corr.non_mutual;
  r.boundary_defect = boundary_identity_check(corr);
  r.boundary_tolerance = 2.0 * table_a.frame()->max_spacing;
  r.gauge_tolerance = options.gauge_tolerance > 0.0 ? options.gauge_tolerance : 2.0 * mesh_a.h;
  if (gauge) {
    double worst = 0.0;
    for (const auto& p : corr.pairs) {
      if (p.boundary) continue;
      ++r.interior;
      const double e = (p.x_prime - gauge->apply_inverse(p.x)).norm();
      worst = std::max(worst, e);
      if (e <= r.gauge_tolerance) ++r.within_tolerance;
    }
    r.worst_offset = worst;
    r.within_fraction = r.interior ? double(r.within_tolerance) / double(r.interior) : 0.0;
  } else {
    for (const auto& p : corr.pairs) r.interior += !p.boundary;
  }

  r.certificate = isometry_certificate(corr, mesh_a, table_a, matcher, options.certificate);

  // geodesic images: up to two window samples per covered probe
  struct PathJob {
    VertexId p;
    Vec2 p_prime;
    std::size_t z;
    RegularWindow window;
  };
  std::vector<PathJob> jobs;
  for (const auto& pr : r.certificate.probes) {
    if (!pr.covered || jobs.size() >= options.geodesic_paths) continue;
    const RegularWindow wa = frame_window(mesh_a, MetricDomain{}, table_a, pr.p, options.certificate.window);
    const RegularWindow wb = frame_window_at(mesh_b, table_b, pr.p_prime, options.certificate.window);
    const RegularWindow w = common_window(wa, wb);
    const auto idx = window_sample_indices(table_a, w);
    if (idx.empty()) continue;
    const std::size_t step = std::max<std::size_t>(1, idx.size() / 2);
    for (std::size_t j = step / 2; j < idx.size() && jobs.size() < options.geodesic_paths; j += step) {
      jobs.push_back({pr.p, pr.p_prime, idx[j], w});
    }
  }
  std::vector<GeodesicImageResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    results[i] = geodesic_image_check(mesh_a, table_a, matcher, jobs[i].p, jobs[i].p_prime, jobs[i].z,
                                      jobs[i].window, options.geodesic);
  });
  r.paths = jobs.size();
  for (const auto& g : results) {
    r.geodesic.samples += g.samples;
    r.geodesic.hits += g.hits;
    r.geodesic.probes += g.probes;
    r.geodesic.rejected += g.rejected;
    r.geodesic.max_offset = std::max(r.geodesic.max_offset, g.max_offset);
  }
  if (r.geodesic.samples) r.geodesic.fraction = double(r.geodesic.hits) / double(r.geodesic.samples);
  if (r.geodesic.probes) r.geodesic.specificity = double(r.geodesic.rejected) / double(r.geodesic.probes);
  if (corr_out) *corr_out = std::move(corr);
  return r;
}

}  // namespace ddrlab
