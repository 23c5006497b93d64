#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ddrlab/metric_domain.hpp"

namespace ddrlab {

/// graph: exact shortest paths on the stencil graph (a polygonal-norm metric).
/// upwind: Dijkstra-ordered semi-Lagrangian updates over the stencil's
/// triangle fans, which approximate the smooth Riemannian distance and keep
/// gradients free of stencil-direction bias.
enum class Scheme { graph, upwind };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct DistanceField {
  VertexId source = kNoVertex;
  Scheme scheme = Scheme::graph;
  std::vector<double> dist;
  std::vector<VertexId> parent;  // kNoVertex at the source
};

/// Strided read-only view of per-vertex distances from one source. Lets the
/// local operations below run on a standalone field or on a column of a
/// batched distance table alike.
struct FieldView {
  const double* data = nullptr;
  std::size_t stride = 1;
  VertexId source = kNoVertex;
  Scheme scheme = Scheme::graph;

  double operator[](VertexId v) const { return data[static_cast<std::size_t>(v) * stride]; }
};

FieldView view(const DistanceField& field);

/// Single-source distances. Ties in the queue are broken by smallest vertex
/// index, so results are deterministic and independent of thread count.
DistanceField distance_field(const Mesh& mesh, VertexId source, Scheme scheme = Scheme::graph);

/// Same, writing into caller storage (dist_out[v * stride]). parent_out may be null.
void distance_field_into(const Mesh& mesh, VertexId source, Scheme scheme, double* dist_out,
                         std::size_t stride, VertexId* parent_out);

/// Distances from an arbitrary domain point: vertices within 1.5h are seeded
/// with their straight-segment metric length. `source` is the nearest vertex.
DistanceField distance_field_from_point(const Mesh& mesh, const Vec2& q, Scheme scheme);

struct Polyline {
  std::vector<Vec2> points;       // from the query point to the source
  std::vector<VertexId> vertices;  // mesh vertices visited, consecutive duplicates removed
  double length = 0.0;            // metric length
};

/// Path from target back to the field's source. Graph fields backtrace
/// exact predecessors (length equals dist[target] exactly); upwind fields
/// descend the interpolated distance along -g^{-1} grad.
Polyline shortest_path(const Mesh& mesh, const DistanceField& field, VertexId target);
Polyline shortest_path(const Mesh& mesh, const FieldView& field, VertexId target);
/// Descent path from an arbitrary domain point (upwind semantics), stopped
/// early once its metric length reaches max_length.
Polyline descent_path(const Mesh& mesh, const FieldView& field, const Vec2& start,
                      double max_length = std::numeric_limits<double>::infinity());

struct Direction {
  VertexId base = kNoVertex;
  Vec2 vector = Vec2::Zero();  // unit in the metric at base
};

/// Least-squares fit of a local model of dist around a vertex.
struct LocalFit {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  double residual_rms = 0.0;
  int samples = 0;
  bool full_rank = false;
};

/// Linear fit dist(p) ~ c + <grad, p - at> over the stencil neighbors of at.
LocalFit linear_fit(const Mesh& mesh, const FieldView& field, VertexId at);
/// Quadratic fit over the stencil neighbors.
LocalFit quadratic_fit(const Mesh& mesh, const FieldView& field, VertexId at);

/// g-unit direction of the shortest path from `at` toward the source:
/// v = -g^{-1} grad normalized in g. Throws std::invalid_argument when `at`
/// is a boundary vertex, the source, or lacks a full stencil;
/// std::runtime_error when the fit is rank deficient or the gradient's dual
/// norm is below 0.5 (cut-locus proximity).
Direction direction_at(const Mesh& mesh, const FieldView& field, VertexId at);
Direction direction_at(const Mesh& mesh, const DistanceField& field, VertexId at);

inline constexpr double kDefaultCutThreshold = 0.15;
inline constexpr double kDefaultEikonalGate = 0.02;

/// 1 - |grad|_{g^-1} of the linear fit. Near zero where dist is smooth;
/// averaging two competing unit gradients across a kink shortens it.
double eikonal_defect(const Mesh& mesh, const FieldView& field, VertexId at);

/// True when the linear fit residual of dist around `at` exceeds tau*h and
/// the eikonal defect exceeds eikonal_gate. The gate keeps smooth but
/// strongly curved fields (close to the source) from reading as kinks.
/// Throws std::invalid_argument for boundary vertices, vertices without a
/// full stencil, and stencil neighbors of the source.
bool detect_cut(const Mesh& mesh, const FieldView& field, VertexId at,
                double tau = kDefaultCutThreshold, double eikonal_gate = kDefaultEikonalGate);
bool detect_cut(const Mesh& mesh, const DistanceField& field, VertexId at,
                double tau = kDefaultCutThreshold, double eikonal_gate = kDefaultEikonalGate);

/// Distance at an arbitrary domain point: bilinear on complete lattice
/// cells, local linear least squares elsewhere.
double sample_field(const Mesh& mesh, const FieldView& field, const Vec2& p);
/// Weights w with sample_field(p) = sum w_i field[v_i], valid for any field
/// on the mesh. Bilinear on complete lattice cells, local linear least
/// squares elsewhere, nearest vertex when that fit is rank deficient.
struct Interpolant {
  std::vector<VertexId> vertices;
  std::vector<double> weights;
};
Interpolant interpolant_at(const Mesh& mesh, const Vec2& p);

/// Gradient at an arbitrary point from a local linear least-squares fit.
Vec2 field_gradient(const Mesh& mesh, const FieldView& field, const Vec2& p);

struct RegularWindow {
  VertexId center_point = kNoVertex;
  VertexId nearest = kNoVertex;          // q
  std::vector<VertexId> boundary_samples;  // contiguous along q's loop, in loop order
  bool whole_loop = false;
};

struct WindowOptions {
  double tau_cut = kDefaultCutThreshold;
  double eikonal_gate = kDefaultEikonalGate;
  double theta_min_deg = 10.0;
  std::size_t min_size = 5;
};

/// Supplies the distance field sourced at the i-th candidate.
using FieldProvider = std::function<FieldView(std::size_t candidate)>;

/// Window search over candidate boundary vertices (e.g. a boundary frame).
/// dist_from_p[i] is d(p, candidates[i]); fields(i) is the field sourced at
/// candidates[i]. Candidates on one loop must appear in loop order.
RegularWindow regular_boundary_window(const Mesh& mesh, const MetricDomain& domain, VertexId p,
                                      const std::vector<VertexId>& candidates,
                                      const std::vector<double>& dist_from_p,
                                      const FieldProvider& fields,
                                      const WindowOptions& options = {});

/// Convenience form over every boundary vertex, computing fields on demand.
RegularWindow regular_boundary_window(const Mesh& mesh, const MetricDomain& domain, VertexId p,
                                      Scheme scheme = Scheme::upwind,
                                      const WindowOptions& options = {});

/// Unit tangent of the boundary loop at a boundary vertex (loop direction).
Vec2 boundary_tangent(const Mesh& mesh, VertexId b);

void write_field(std::ostream& out, const DistanceField& field);
DistanceField read_field(std::istream& in);

}  // namespace ddrlab
