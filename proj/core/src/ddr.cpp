#include "ddrlab/ddr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "ddrlab/parallel.hpp"

namespace ddrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cyclic(double a, double b, double length) {
  double d = std::abs(a - b);
  if (length > 0.0) d = std::fmod(d, length);
  return std::min(d, length - d);
}

void require_same_frame(const DDFMatrix& a, const DDFMatrix& b) {
  if (a.k != b.k) throw std::invalid_argument("frame mismatch: different sample counts");
  if (a.frame && b.frame && a.frame != b.frame && !a.frame->same_as(*b.frame)) {
    throw std::invalid_argument("frame mismatch: different boundary samples");
  }
}

void fill_frame_geometry(const Mesh& mesh, BoundaryFrame& f) {
  f.arc_positions.clear();
  f.loops.clear();
  f.points.clear();
  f.loop_lengths.clear();
  for (std::size_t l = 0; l < mesh.boundary_order.size(); ++l) f.loop_lengths.push_back(mesh.loop_length(static_cast<int>(l)));
  for (VertexId v : f.samples) {
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.size() || !mesh.is_boundary(v)) {
      throw std::invalid_argument("frame sample is not a boundary vertex of the mesh");
    }
    f.arc_positions.push_back(mesh.boundary_arc(v));
    f.loops.push_back(mesh.boundary_loop(v));
    f.points.push_back(mesh.vertices[v]);
  }
  f.max_spacing = 0.0;
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    // consecutive samples on the same loop, cyclically
    std::size_t j = i + 1;
    if (j == f.samples.size() || f.loops[j] != f.loops[i]) {
      j = i;
      while (j > 0 && f.loops[j - 1] == f.loops[i]) --j;
    }
    if (j == i) {
      f.max_spacing = std::max(f.max_spacing, f.loop_lengths[f.loops[i]]);
      continue;
    }
    double gap = f.arc_positions[j] - f.arc_positions[i];
    if (gap <= 0.0) gap += f.loop_lengths[f.loops[i]];
    f.max_spacing = std::max(f.max_spacing, gap);
  }
}

}  // namespace

double BoundaryFrame::arc_distance(std::size_t i, std::size_t j) const {
  if (loops[i] != loops[j]) return kInf;
  return cyclic(arc_positions[i], arc_positions[j], loop_lengths[loops[i]]);
}

double BoundaryFrame::arc_distance_to(const Mesh& mesh, std::size_t i, VertexId b) const {
  if (!mesh.is_boundary(b) || mesh.boundary_loop(b) != loops[i]) return kInf;
  return cyclic(arc_positions[i], mesh.boundary_arc(b), loop_lengths[loops[i]]);
}

std::size_t BoundaryFrame::nearest_sample(const Mesh& mesh, VertexId b) const {
  std::size_t best = 0;
  double bd = kInf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = arc_distance_to(mesh, i, b);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  if (!std::isfinite(bd)) throw std::invalid_argument("nearest_sample: vertex is not on a sampled loop");
  return best;
}

bool BoundaryFrame::same_as(const BoundaryFrame& other, double tol) const {
  if (samples != other.samples) return false;
  if (points.size() != other.points.size()) return points.empty() || other.points.empty();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if ((points[i] - other.points[i]).norm() > tol) return false;
  }
  return true;
}

FramePtr make_frame(const Mesh& mesh, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("frame spacing must be positive");
  if (spacing > 2.0 * mesh.h * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "frame spacing " << spacing << " exceeds 2h = " << 2.0 * mesh.h;
    throw std::invalid_argument(msg.str());
  }
  auto f = std::make_shared<BoundaryFrame>();
  for (std::size_t l = 0; l < mesh.boundary_order.size(); ++l) {
    const auto& loop = mesh.boundary_order[l];
    const double length = mesh.loop_length(static_cast<int>(l));
    const std::size_t n = loop.size();
    std::size_t count = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(length / spacing)));
    for (;;) {
      count = std::min(count, n);
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < count; ++j) idx.push_back(j * n / count);
      double worst = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        const double a = mesh.boundary_arc(loop[idx[j]]);
        double b = mesh.boundary_arc(loop[idx[(j + 1) % count]]);
        if (b <= a) b += length;
        worst = std::max(worst, b - a);
      }
      if (worst <= spacing * (1.0 + 1e-12) || count == n) {
        for (std::size_t j : idx) f->samples.push_back(loop[j]);
        break;
      }
      ++count;
    }
  }
  fill_frame_geometry(mesh, *f);
  return f;
}

DDFMatrix ddf_from_distances(const FramePtr& frame, std::int64_t source, const std::vector<double>& d) {
  if (!frame || d.size() != frame->size()) throw std::invalid_argument("distance vector does not match frame");
  DDFMatrix m;
  m.frame = frame;
  m.source = source;
  m.k = d.size();
  m.values.resize(m.k * m.k);
  for (std::size_t i = 0; i < m.k; ++i) {
    for (std::size_t j = 0; j < m.k; ++j) m.values[i * m.k + j] = d[i] - d[j];
  }
  return m;
}

DDFMatrix ddf(const Mesh& mesh, const FramePtr& frame, VertexId x, Scheme scheme) {
  const DistanceField f = distance_field(mesh, x, scheme);
  std::vector<double> d;
  d.reserve(frame->size());
  for (VertexId y : frame->samples) d.push_back(f.dist[y]);
  return ddf_from_distances(frame, x, d);
}

CocycleReport check_cocycle(const DDFMatrix& m, std::size_t triples, std::uint64_t seed) {
  CocycleReport r;
  const std::size_t k = m.k;
  for (std::size_t i = 0; i < k; ++i) {
    if (m(i, i) != 0.0) r.zero_diagonal = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (m(i, j) != -m(j, i)) r.antisymmetric = false;
      if (m(i, j) != m(i, 0) - m(j, 0)) r.cocycle = false;
    }
  }
  if (k > 0 && triples > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (std::size_t t = 0; t < triples; ++t) {
      const std::size_t i = pick(rng), j = pick(rng), l = pick(rng);
      if (m(i, j) + m(j, l) != m(i, l)) r.cocycle = false;
    }
  }
  return r;
}

double sup_dist(const DDFMatrix& a, const DDFMatrix& b) {
  require_same_frame(a, b);
  double best = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) best = std::max(best, std::abs(a.values[i] - b.values[i]));
  return best;
}

MatchResult match(const std::vector<DDFMatrix>& data, const DDFMatrix& query) {
  if (data.empty()) throw std::invalid_argument("match: empty data set");
  MatchResult r;
  r.distance = kInf;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = sup_dist(data[i], query);
    if (d < r.distance) {
      r.distance = d;
      r.index = i;
    }
  }
  return r;
}

double compact_sup(const double* a, const double* b, std::size_t k) {
  double hi = -kInf, lo = kInf;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = a[i] - b[i];
    hi = std::max(hi, c);
    lo = std::min(lo, c);
  }
  return k == 0 ? 0.0 : hi - lo;
}

FrameTable FrameTable::compute(const Mesh& mesh, const FramePtr& frame, Scheme scheme) {
  FrameTable t;
  t.frame_ = frame;
  t.scheme_ = scheme;
  t.n_ = mesh.size();
  t.k_ = frame->size();
  t.data_.assign(t.n_ * t.k_, 0.0);
  parallel_for(t.k_, [&](std::size_t i) {
    distance_field_into(mesh, frame->samples[i], scheme, t.data_.data() + i, t.k_, nullptr);
  });
  return t;
}

FieldView FrameTable::column(std::size_t i) const {
  return FieldView{data_.data() + i, k_, frame_->samples[i], scheme_};
}

DDFMatrix FrameTable::ddf(VertexId x) const {
  return ddf_from_distances(frame_, x, row_vector(x));
}

void FrameTable::row_at(const Mesh& mesh, const Vec2& q, double* out) const {
  const Interpolant ip = interpolant_at(mesh, q);
  std::fill(out, out + k_, 0.0);
  for (std::size_t a = 0; a < ip.vertices.size(); ++a) {
    const double* r = row(ip.vertices[a]);
    const double w = ip.weights[a];
    for (std::size_t i = 0; i < k_; ++i) out[i] += w * r[i];
  }
}

std::vector<double> FrameTable::row_at(const Mesh& mesh, const Vec2& q) const {
  std::vector<double> out(k_);
  row_at(mesh, q, out.data());
  return out;
}

std::vector<BilipschitzSample> bilipschitz_profile(const Mesh& mesh, const FrameTable& table,
                                                   std::size_t sample_pairs, double scale,
                                                   std::uint64_t seed) {
  if (sample_pairs == 0) throw std::invalid_argument("bilipschitz_profile: sample_pairs must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(mesh.size()) - 1);
  std::vector<BilipschitzSample> out;
  std::vector<VertexId> near;
  std::size_t attempts = 0;
  while (out.size() < sample_pairs && attempts < 50 * sample_pairs) {
    ++attempts;
    const VertexId x = pick(rng);
    mesh.vertices_near(mesh.vertices[x], scale, near);
    std::sort(near.begin(), near.end());
    if (near.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pn(0, near.size() - 1);
    const VertexId y = near[pn(rng)];
    if (y == x) continue;
    const DistanceField f = distance_field(mesh, x, table.scheme());
    const double d = f.dist[y];
    if (!(d > 0.0) || d > scale) continue;
    out.push_back({x, y, d, table.sup_between(x, y) / d});
  }
  return out;
}

void write_archive(std::ostream& out, const DDFArchive& archive) {
  if (!archive.frame) throw std::invalid_argument("archive without frame");
  const std::size_t k = archive.frame->size();
  if (archive.sources.size() != archive.matrices.size()) throw std::invalid_argument("archive source count mismatch");
  out.write("DDF1", 4);
  detail::put_u64(out, k);
  detail::put_u64(out, archive.matrices.size());
  for (VertexId s : archive.frame->samples) detail::put_u64(out, static_cast<std::uint64_t>(s));
  for (auto s : archive.sources) detail::put_i64(out, s);
  for (const auto& m : archive.matrices) {
    if (m.k != k) throw std::invalid_argument("archive matrix size mismatch");
    for (double v : m.values) detail::put_f64(out, v);
  }
  if (!out) throw std::runtime_error("failed to write DDF1 archive");
}

DDFArchive read_archive(std::istream& in, const Mesh* mesh) {
  detail::expect_magic(in, "DDF1");
  const auto k = detail::get_u64(in);
  const auto m = detail::get_u64(in);
  if (k > (1u << 20) || m > (1u << 26)) throw std::runtime_error("implausible DDF1 header");
  auto frame = std::make_shared<BoundaryFrame>();
  for (std::uint64_t i = 0; i < k; ++i) frame->samples.push_back(static_cast<VertexId>(detail::get_u64(in)));
  if (mesh) fill_frame_geometry(*mesh, *frame);
  DDFArchive a;
  a.frame = frame;
  for (std::uint64_t i = 0; i < m; ++i) a.sources.push_back(detail::get_i64(in));
  for (std::uint64_t s = 0; s < m; ++s) {
    DDFMatrix mat;
    mat.frame = frame;
    mat.source = a.sources[s];
    mat.k = k;
    mat.values.resize(k * k);
    for (auto& v : mat.values) v = detail::get_f64(in);
    a.matrices.push_back(std::move(mat));
  }
  return a;
}

}  // namespace ddrlab
