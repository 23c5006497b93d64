#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ddrlab/reconstruction.hpp"

namespace ddrlab {

/// Shortest Euclidean length between a and b around the disk of radius r
/// centered at the origin: straight when the segment misses the disk,
/// tangent, arc, tangent otherwise. Both points must lie outside the disk.
double annulus_geodesic_length(const Vec2& a, const Vec2& b, double r);

struct OracleComparison {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double computed = 0.0;
  double analytic = 0.0;
  double relative_error = 0.0;
  double seconds = 0.0;
};

/// Distance between the vertices nearest a and b against the analytic
/// length around the hole. The mesh must be a Euclidean annulus.
OracleComparison annulus_oracle(const Mesh& mesh, const Vec2& a, const Vec2& b, Scheme scheme);

/// Random interior vertices at least `margin` inside the boundary. Points
/// are drawn in the bounding box and snapped, so the same seed gives the
/// same physical locations at every h.
std::vector<VertexId> sample_interior(const Mesh& mesh, std::size_t count, double margin,
                                      std::uint64_t seed);

struct MetricSuiteReport {
  std::size_t matrices = 0;
  std::size_t diagonal_failures = 0;
  std::size_t antisymmetry_failures = 0;
  std::size_t cocycle_failures = 0;
  std::size_t triples = 0;
  std::size_t triangle_violations = 0;
  std::size_t symmetry_pairs = 0;
  std::size_t symmetry_violations = 0;
  std::size_t lipschitz_pairs = 0;
  std::size_t lipschitz_violations = 0;
  double max_lipschitz_ratio = 0.0;
  bool passed() const {
    return diagonal_failures == 0 && antisymmetry_failures == 0 && cocycle_failures == 0 &&
           triangle_violations == 0 && symmetry_violations == 0 && lipschitz_violations == 0;
  }
};

/// Exact checks on graph data: every DDF matrix of the given sources, the
/// triangle inequality on random triples, symmetry and the 2-Lipschitz bound
/// on random pairs. Pair distances come from `fields` single-source fields.
MetricSuiteReport metric_suite(const Mesh& mesh, const FrameTable& table,
                               const std::vector<VertexId>& sources, std::size_t triples,
                               std::size_t pairs, std::size_t fields, std::uint64_t seed);

struct NearestReport {
  std::size_t points = 0;
  std::size_t exact = 0;  // criterion set equals the brute-force argmin set
  std::size_t ties = 0;   // sets differ only by samples within one frame spacing
  std::size_t disagree = 0;
  double agreement() const { return points ? double(exact + ties) / double(points) : 0.0; }
};

/// Nearest-point criterion on a DDF computed from a fresh field at x,
/// against the argmin of d(x, y_.) read from the boundary-sourced table.
NearestReport verify_nearest(const Mesh& mesh, const FrameTable& table, std::size_t points,
                             std::uint64_t seed);

struct MembershipOptions {
  std::size_t triples = 600;
  std::size_t points = 30;           // distinct p
  double delta_max = 0.0;            // 0 means 2 frame spacings
  double off_min = 0.0;              // off-path offsets start here; 0 means 2 delta_max
  double off_max = 0.2;
  double probe_margin = 0.1;
  std::uint64_t seed = 11;
  WindowOptions window;
};

struct MembershipReport {
  std::size_t triples = 0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
  std::size_t points = 0;
  std::size_t skipped_points = 0;  // p without a usable window
  double median_window = 0.0;      // samples
  double precision = 0.0;
  double recall = 0.0;
  double delta_max = 0.0;
  double off_min = 0.0;
};

/// Argmax membership against the descent-path oracle. On-path x lie on the
/// path [p z] of the field sourced at z; off-path x are displaced normally
/// from it by off_min to off_max.
MembershipReport verify_membership(const Mesh& mesh, const MetricDomain& domain,
                                   const FrameTable& table, const MembershipOptions& options = {});

struct DphiCheckOptions {
  std::size_t points = 30;
  double tolerance = 0.05;
  double probe_margin = 0.15;
  std::uint64_t seed = 13;
  AngleOptions angles;
  WindowOptions window;
};

struct DphiCheckReport {
  std::size_t points = 0;
  std::size_t skipped_points = 0;
  std::size_t pairs = 0;
  std::size_t passed = 0;
  double fraction = 0.0;
  double median_error = 0.0;
  double p90_error = 0.0;
  double max_error = 0.0;
  double tolerance = 0.0;
};

/// Finite-difference derivative against -1 + <v1, v2>_g on window pairs.
DphiCheckReport verify_dphi(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                            const DphiCheckOptions& options = {});

struct PipelineOptions {
  double source_spacing = 0.05;
  double gauge_tolerance = 0.0;  // 0 means 2h
  std::size_t geodesic_paths = 20;
  MatchOptions match;
  CertificateOptions certificate;
  GeodesicImageOptions geodesic;
};

struct PipelineReport {
  std::size_t sources = 0;
  std::size_t interior = 0;
  std::size_t within_tolerance = 0;  // against the gauge, when given
  double within_fraction = std::numeric_limits<double>::quiet_NaN();
  double worst_offset = std::numeric_limits<double>::quiet_NaN();
  double gauge_tolerance = 0.0;
  double median_sup_defect = 0.0;
  double boundary_defect = 0.0;
  double boundary_tolerance = 0.0;  // 2 frame spacings
  std::size_t ambiguous = 0;
  std::size_t non_mutual = 0;
  std::size_t paths = 0;
  GeodesicImageResult geodesic;
  CertificateReport certificate;
};

/// Dense correspondence from M into M', the gauge comparison when a gauge
/// is given (x' against gauge.inverse(x)), boundary identity, geodesic
/// images along paths from covered probes, and the isometry certificate.
PipelineReport run_pipeline(const Mesh& mesh_a, const FrameTable& table_a, const Mesh& mesh_b,
                            const FrameTable& table_b, const GaugeMap* gauge,
                            const PipelineOptions& options = {}, Correspondence* corr_out = nullptr);

}  // namespace ddrlab
