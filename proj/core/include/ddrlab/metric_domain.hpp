#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ddrlab/geometry.hpp"

namespace ddrlab {

using MetricField = std::function<Mat2(const Vec2&)>;

/// Ground-truth geometry: a planar region with a smooth SPD metric tensor.
struct MetricDomain {
  Shape shape = Shape::disk();
  MetricField metric;
  std::string name;         // scenario id, resolvable by make_scenario
  std::string metric_name;  // human-readable description of the metric
};

/// Diffeomorphism of the closed domain onto itself. Boundary-fixing gauges
/// manufacture isometric copies via pullback_domain.
struct GaugeMap {
  std::function<Vec2(const Vec2&)> forward;
  std::function<Mat2(const Vec2&)> jacobian;
  std::function<Vec2(const Vec2&)> inverse;  // may be empty
  std::string name;

  Vec2 apply_inverse(const Vec2& p) const;
};

/// p -> R(alpha(|p|)) p, with alpha'(r) supplied for the analytic jacobian.
GaugeMap radial_twist_gauge(std::function<double(double)> alpha,
                            std::function<double(double)> dalpha, std::string name);
/// Twist alpha(r) = amplitude * (1 - r^2); fixes the unit circle.
GaugeMap disk_twist_gauge(double amplitude = 0.5);
/// Twist alpha(r) = 4 amplitude (r - r_in)(1 - r) / (1 - r_in)^2; fixes both circles.
GaugeMap annulus_twist_gauge(double inner_radius, double amplitude = 0.5);
/// Twist alpha(r) = amplitude * (1 - r^2/radius^2)^3 about center, the
/// identity outside the disk of the given radius.
GaugeMap local_twist_gauge(const Vec2& center, double radius, double amplitude = 0.5);
/// Rigid rotation; moves the boundary, only useful as an invalid gauge.
GaugeMap rigid_rotation_gauge(double angle);
GaugeMap identity_gauge();
/// Replaces the jacobian with a central difference of forward.
GaugeMap with_numeric_jacobian(GaugeMap gauge, double step = 1e-6);

/// g'(p) = J(p)^T g(forward(p)) J(p). Throws if J is singular at a probe point.
MetricDomain pullback_domain(const MetricDomain& domain, const GaugeMap& gauge);

/// Smooth compactly supported bump u(p) = A exp(1 - 1/(1 - |p-c|^2/rho^2)).
double bump(const Vec2& p, const Vec2& center, double radius, double amplitude);

MetricField euclidean_metric();
MetricField conformal_bump_metric(Vec2 center, double radius, double amplitude);

/// Catalog: "disk", "annulus", "dumbbell", "conformal-disk", optionally
/// suffixed with "+twist" (boundary-fixing twist pullback), "+rotate"
/// (boundary-moving rotation pullback) or "+bump" (conformal factor
/// exp(2u), u a bump of amplitude 0.3; not isometric to the base). Throws
/// on unknown names.
MetricDomain make_scenario(const std::string& name);
/// Non-isometric partner of a base scenario: "disk" for "conformal-disk",
/// otherwise the "+bump" variant.
std::string control_scenario(const std::string& name);
std::vector<std::string> scenario_catalog();
/// Ground-truth gauge behind a "+twist"/"+rotate" scenario id.
GaugeMap scenario_gauge(const std::string& name);

struct StencilEdge {
  VertexId i;
  VertexId j;
  double length;
};

/// Wide-stencil discretization of a MetricDomain. Immutable once built.
///
/// Adjacency is kept in CSR form with every vertex's neighbors sorted by
/// angle, so consecutive slots bound the triangle fans used by the upwind
/// distance scheme.
class Mesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::uint8_t> boundary_flags;
  std::vector<std::vector<VertexId>> boundary_order;
  double h = 0.0;
  int stencil_radius = 3;
  DomainKind domain_kind = DomainKind::disk;
  std::string shape_descriptor;
  Shape shape = Shape::disk();
  std::string metric_name;  // scenario id

  std::size_t size() const { return vertices.size(); }
  bool is_boundary(VertexId v) const { return boundary_flags[v] != 0; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::span<const double> neighbor_lengths(VertexId v) const {
    return {lengths_.data() + offsets_[v], lengths_.data() + offsets_[v + 1]};
  }
  std::int64_t slot_begin(VertexId v) const { return offsets_[v]; }
  std::int64_t slot_end(VertexId v) const { return offsets_[v + 1]; }
  VertexId slot_target(std::int64_t s) const { return targets_[s]; }
  double slot_length(std::int64_t s) const { return lengths_[s]; }
  std::int64_t reverse_slot(std::int64_t s) const { return reverse_[s]; }
  bool fan_triangle(std::int64_t s) const { return fan_next_[s] != 0; }
  /// (e.gm.e, e.gm.w0, w0.gm.w0) of the fan triangle at slot s of x, where
  /// a = target(s), b = target(next(s)), e = a - b, w0 = b - x and gm is the
  /// averaged metric of the three corners; the fourth entry is the distance
  /// from x to the segment [a, b] in that metric.
  const double* fan_form(std::int64_t s) const { return fan_form_.data() + 4 * s; }
  std::int64_t next_slot(VertexId v, std::int64_t s) const {
    return s + 1 == offsets_[v + 1] ? offsets_[v] : s + 1;
  }
  std::int64_t prev_slot(VertexId v, std::int64_t s) const {
    return s == offsets_[v] ? offsets_[v + 1] - 1 : s - 1;
  }
  std::size_t edge_slot_count() const { return targets_.size(); }

  /// Undirected edge list (i < j).
  std::vector<StencilEdge> stencil_edges() const;

  const Mat2& metric_at(VertexId v) const { return metric_[v]; }
  /// Metric of the source domain at an arbitrary point.
  Mat2 metric_at_point(const Vec2& p) const { return metric_field_(p); }
  /// Metric arclength coordinate of a boundary vertex along its loop.
  double boundary_arc(VertexId v) const { return boundary_arc_[v]; }
  int boundary_loop(VertexId v) const { return boundary_loop_[v]; }
  /// Index of a boundary vertex within boundary_order[boundary_loop(v)].
  int boundary_position(VertexId v) const { return boundary_position_[v]; }
  double loop_length(int loop) const { return loop_length_[loop]; }
  /// Lattice vertex all of whose stencil offsets are present.
  bool has_full_stencil(VertexId v) const { return full_stencil_[v] != 0; }
  /// Lattice vertex at integer coordinates (i, j), or kNoVertex.
  VertexId lattice_vertex(long i, long j) const;
  bool is_lattice(VertexId v) const { return !is_boundary(v); }

  /// Vertices within Euclidean radius of p (unordered).
  void vertices_near(const Vec2& p, double radius, std::vector<VertexId>& out) const;
  VertexId nearest_vertex(const Vec2& p) const;

  /// Builds adjacency, fans, lookup tables and per-vertex metric from the raw
  /// vertex/edge data. Called by build_mesh and after loading from JSON.
  void finalize(const MetricDomain& domain, std::span<const StencilEdge> edges);

 private:
  std::vector<std::int64_t> offsets_;
  std::vector<VertexId> targets_;
  std::vector<double> lengths_;
  std::vector<std::int64_t> reverse_;
  std::vector<std::uint8_t> fan_next_;
  std::vector<double> fan_form_;
  std::vector<Mat2> metric_;
  MetricField metric_field_;
  std::vector<double> boundary_arc_;
  std::vector<int> boundary_loop_;
  std::vector<int> boundary_position_;
  std::vector<double> loop_length_;
  std::vector<std::uint8_t> full_stencil_;
  long lattice_i0_ = 0, lattice_j0_ = 0, lattice_ni_ = 0, lattice_nj_ = 0;
  std::vector<VertexId> lattice_index_;
  Vec2 bucket_origin_ = Vec2::Zero();
  long bucket_nx_ = 0, bucket_ny_ = 0;
  std::vector<std::int32_t> bucket_offsets_;
  std::vector<VertexId> bucket_items_;
};

/// Primitive lattice offsets (gcd 1) with Chebyshev norm <= radius.
std::vector<std::pair<int, int>> stencil_offsets(int radius);

/// Metric length of the straight segment a->b by 5-point composite Simpson.
double segment_metric_length(const MetricField& metric, const Vec2& a, const Vec2& b);

Mesh build_mesh(const MetricDomain& domain, double h, int stencil_radius = 3);

/// Number of connected components of the stencil graph.
int connected_components(const Mesh& mesh);

}  // namespace ddrlab
