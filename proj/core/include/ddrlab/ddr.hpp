#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "ddrlab/distance_engine.hpp"

namespace ddrlab {

/// Boundary samples shared by every DDF matrix of one experiment.
struct BoundaryFrame {
  std::vector<VertexId> samples;
  std::vector<double> arc_positions;  // metric arclength along the sample's loop
  std::vector<int> loops;             // loop index per sample
  std::vector<double> loop_lengths;   // per loop
  std::vector<Vec2> points;           // sample coordinates, for compatibility checks
  double max_spacing = 0.0;           // largest consecutive arc gap

  std::size_t size() const { return samples.size(); }
  /// Shorter way around the loop; infinite across different loops.
  double arc_distance(std::size_t i, std::size_t j) const;
  /// Arc distance from sample i to an arbitrary boundary vertex of the mesh.
  double arc_distance_to(const Mesh& mesh, std::size_t i, VertexId b) const;
  /// Sample closest in arc distance to a boundary vertex.
  std::size_t nearest_sample(const Mesh& mesh, VertexId b) const;
  bool same_as(const BoundaryFrame& other, double tol = 1e-9) const;
};

using FramePtr = std::shared_ptr<const BoundaryFrame>;

/// Evenly spaced boundary vertices on every loop with consecutive arc gaps
/// at most `spacing`. Throws if spacing exceeds 2h or is not positive.
FramePtr make_frame(const Mesh& mesh, double spacing);

inline constexpr std::int64_t kExternalSource = -1;

/// values(i, j) = d(source, y_i) - d(source, y_j), stored as a full k x k array.
struct DDFMatrix {
  FramePtr frame;
  std::int64_t source = kExternalSource;
  std::size_t k = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * k + j]; }
};

/// Builds the matrix from distances d(source, y_i) over the frame.
DDFMatrix ddf_from_distances(const FramePtr& frame, std::int64_t source, const std::vector<double>& d);
/// One distance field from x, then all pairwise differences over the frame.
DDFMatrix ddf(const Mesh& mesh, const FramePtr& frame, VertexId x, Scheme scheme = Scheme::graph);

struct CocycleReport {
  bool zero_diagonal = true;
  bool antisymmetric = true;
  bool cocycle = true;  // values(i,j) + values(j,l) == values(i,l) for all triples
};
/// Exact checks. The cocycle test compares every entry against the vector
/// reconstructed from column 0, which for exact differences is equivalent to
/// the triple identity; `triples` additional random triples are checked directly.
CocycleReport check_cocycle(const DDFMatrix& m, std::size_t triples = 0, std::uint64_t seed = 1);

/// max_{i,j} |a(i,j) - b(i,j)|. Throws on frame mismatch.
double sup_dist(const DDFMatrix& a, const DDFMatrix& b);

struct MatchResult {
  std::size_t index = 0;
  double distance = 0.0;
};
/// Nearest data matrix in sup distance; ties by smallest index.
MatchResult match(const std::vector<DDFMatrix>& data, const DDFMatrix& query);

/// sup over pairs of ((a_i - a_j) - (b_i - b_j)) for distance vectors a, b,
/// which equals max_i(a_i - b_i) - min_i(a_i - b_i).
double compact_sup(const double* a, const double* b, std::size_t k);

/// Distances from every mesh vertex to every frame sample, computed from
/// one field per sample (the field sourced at y_i gives d(y_i, v)). Row v is
/// d(v, y_.) for v's DDF, column i is the field sourced at y_i.
class FrameTable {
 public:
  FrameTable() = default;
  static FrameTable compute(const Mesh& mesh, const FramePtr& frame, Scheme scheme);

  std::size_t vertex_count() const { return n_; }
  std::size_t k() const { return k_; }
  const FramePtr& frame() const { return frame_; }
  Scheme scheme() const { return scheme_; }
  const double* row(VertexId v) const { return data_.data() + static_cast<std::size_t>(v) * k_; }
  std::vector<double> row_vector(VertexId v) const { return {row(v), row(v) + k_}; }
  FieldView column(std::size_t i) const;
  DDFMatrix ddf(VertexId x) const;
  /// Distances from a continuous point to every sample, interpolated per column.
  void row_at(const Mesh& mesh, const Vec2& q, double* out) const;
  std::vector<double> row_at(const Mesh& mesh, const Vec2& q) const;
  double sup_between(VertexId x, VertexId y) const { return compact_sup(row(x), row(y), k_); }

 private:
  FramePtr frame_;
  Scheme scheme_ = Scheme::graph;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> data_;
};

struct BilipschitzSample {
  VertexId x = kNoVertex;
  VertexId y = kNoVertex;
  double distance = 0.0;  // d_M(x, y)
  double ratio = 0.0;     // sup_dist(D_x, D_y) / d_M(x, y)
};

/// Random vertex pairs with 0 < d(x, y) <= scale. Distances d(x, y) come
/// from a field sourced at x; DDFs from the frame table.
std::vector<BilipschitzSample> bilipschitz_profile(const Mesh& mesh, const FrameTable& table,
                                                   std::size_t sample_pairs, double scale,
                                                   std::uint64_t seed);

struct DDFArchive {
  FramePtr frame;
  std::vector<std::int64_t> sources;
  std::vector<DDFMatrix> matrices;
};

void write_archive(std::ostream& out, const DDFArchive& archive);
/// Frame sample ids are restored; arc positions are filled from `mesh` when given.
DDFArchive read_archive(std::istream& in, const Mesh* mesh = nullptr);

}  // namespace ddrlab
