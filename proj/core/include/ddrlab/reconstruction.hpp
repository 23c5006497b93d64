#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ddrlab/rigidity_lab.hpp"

namespace ddrlab {

struct MatchOptions {
  double ratio_level = 0.9;      // best / second >= this flags the match as ambiguous
  double separation = 0.2;       // sup distance between rival and best for the ratio test
  double coarse_spacing = 0.04;  // dense matcher: coarse pass lattice spacing
  bool refine = true;            // dense matcher: continuous refinement below h
};

struct PhiPair {
  std::int64_t source = kExternalSource;  // source id in M
  Vec2 x = Vec2::Zero();
  std::int64_t match = kExternalSource;  // source id in M' (dense mode: nearest vertex)
  Vec2 x_prime = Vec2::Zero();
  double sup_defect = 0.0;
  double second_best = std::numeric_limits<double>::infinity();
  bool ambiguous = false;
  bool mutual = true;
  bool boundary = false;  // x is a boundary vertex of M
  double boundary_offset = std::numeric_limits<double>::quiet_NaN();  // boundary pairs only
};

/// Per-probe first-order evidence, filled by isometry_certificate.
struct PointLambda {
  VertexId p = kNoVertex;
  Vec2 p_prime = Vec2::Zero();
  double lambda_median = 0.0;
  double lambda_spread = 0.0;
  double lambda_consistency = 0.0;
  std::size_t pairs = 0;
};

struct Correspondence {
  FramePtr frame;
  std::vector<PhiPair> pairs;
  double median_sup_defect = 0.0;
  double boundary_defect = std::numeric_limits<double>::quiet_NaN();
  std::size_t ambiguous = 0;
  std::size_t non_mutual = 0;
  std::vector<PointLambda> lambda_summary;
  std::vector<double> isometry_defect;
};

/// Nearest neighbor search for DDF rows against every point of a manifold:
/// a coarse lattice pass, exhaustive search around the coarse winner, greedy
/// descent over stencil neighbors, then pattern search over continuous
/// points with interpolated rows.
class DenseMatcher {
 public:
  struct Result {
    Vec2 point = Vec2::Zero();
    VertexId vertex = kNoVertex;
    double defect = 0.0;
    double second_best = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
  };

  DenseMatcher(const Mesh& mesh, const FrameTable& table, const MatchOptions& options = {});

  /// query: distances d(x, y_i) over the shared frame.
  Result match(const double* query) const;
  const Mesh& mesh() const { return mesh_; }
  const FrameTable& table() const { return table_; }

 private:
  double cost_at(const double* query, const Vec2& q, std::vector<double>& scratch) const;

  const Mesh& mesh_;
  const FrameTable& table_;
  MatchOptions options_;
  std::vector<VertexId> coarse_;
  double local_radius_ = 0.0;
};

/// Lattice vertices on a grid of the given spacing plus boundary vertices at
/// about that arc spacing, sorted by id.
std::vector<VertexId> source_grid(const Mesh& mesh, double spacing);

/// Full matrices for the given sources, read from a frame table.
DDFArchive archive_from_table(const FrameTable& table, const std::vector<VertexId>& sources);

/// Archive mode: each source of a matched against the sources of b. Uses the
/// compact row form when every matrix is an exact cocycle, the full sup
/// otherwise. Meshes, when given, supply coordinates and boundary offsets.
/// Throws on frame mismatch or an empty archive.
Correspondence build_phi(const DDFArchive& a, const DDFArchive& b, const MatchOptions& options = {},
                         const Mesh* mesh_a = nullptr, const Mesh* mesh_b = nullptr);

/// Dense mode: each source of M matched against all of M'.
Correspondence build_phi(const Mesh& mesh_a, const FrameTable& table_a,
                         const std::vector<VertexId>& sources, const DenseMatcher& matcher);

/// Max boundary offset over boundary sources. Throws when there are none.
double boundary_identity_check(const Correspondence& corr);

struct GeodesicImageOptions {
  double tolerance = 0.0;         // 0 means 2h of M'
  double probe_offset = 0.0;      // 0 means 6h; lateral offset of the specificity probes
  bool specificity = true;
  std::size_t max_samples = 48;   // path vertices matched per path, evenly spaced
};

struct GeodesicImageResult {
  std::size_t samples = 0;
  std::size_t hits = 0;
  double fraction = 0.0;
  std::size_t probes = 0;
  std::size_t rejected = 0;  // off-path probes whose match stays away from the image path
  double specificity = 0.0;
  double max_offset = 0.0;
};

/// Path vertices of [p z] in M are matched into M' and their distance to the
/// descent path [p' z] in M' is measured. z must belong to the window.
GeodesicImageResult geodesic_image_check(const Mesh& mesh_a, const FrameTable& table_a,
                                         const DenseMatcher& matcher, VertexId p,
                                         const Vec2& p_prime, std::size_t z,
                                         const RegularWindow& window,
                                         const GeodesicImageOptions& options = {});

struct CertificateOptions {
  std::size_t probes = 24;
  double probe_margin = 0.15;      // probes keep max(probe_margin, probe_margin_h * h) from the boundary
  double probe_margin_h = 12.0;
  double lambda_tolerance = 0.02;
  double spread_tolerance = 0.03;
  double lambda_fraction = 0.9;
  double distance_scale = 0.3;
  double distance_tolerance = 0.0;  // 0 means 3h
  double min_coverage = 0.8;
  double jacobian_step = 0.0;       // 0 means 4h
  std::uint64_t seed = 7;
  AngleOptions angles;
  WindowOptions window;
};

struct ProbeResult {
  VertexId p = kNoVertex;
  Vec2 p_prime = Vec2::Zero();
  bool covered = false;
  std::string failure;  // why the probe has no window, if uncovered
  std::size_t window_size = 0;
  PointLambda lambda;
  bool lambda_ok = false;
  double isometry_defect = 0.0;
};

struct CertificateReport {
  std::vector<ProbeResult> probes;
  std::size_t covered = 0;
  double coverage = 0.0;
  double lambda_pass_fraction = 0.0;
  double median_spread = 0.0;
  double max_spread = 0.0;
  double lambda_pooled_spread = 0.0;  // 90th minus 10th percentile over all pair estimates
  std::size_t distance_pairs = 0;
  double max_distance_defect = 0.0;
  double median_isometry_defect = 0.0;
  bool coverage_ok = false;
  bool lambda_ok = false;
  bool distance_ok = false;
  bool passed = false;
  CertificateOptions options;
  double distance_tolerance = 0.0;
};

/// Pointwise first-order and zeroth-order isometry evidence at random probe
/// points of M, each mapped through the dense matcher. Fills the
/// correspondence's lambda_summary and isometry_defect.
CertificateReport isometry_certificate(Correspondence& corr, const Mesh& mesh_a,
                                       const FrameTable& table_a, const DenseMatcher& matcher,
                                       const CertificateOptions& options = {});

/// Samples of window in M that also pass the window tests at p' in M', in
/// M's loop order.
RegularWindow common_window(const RegularWindow& window_a, const RegularWindow& window_b);

}  // namespace ddrlab
