#include <doctest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "ddrlab/parallel.hpp"
#include "fixtures.hpp"

using namespace ddrlab;
using fixtures::at;

TEST_CASE("axis-aligned lattice distance is exact on the euclidean disk") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const VertexId a = at(m, -0.6, 0.0), b = at(m, 0.6, 0.0);
  const auto f = distance_field(m, a, Scheme::graph);
  CHECK(f.dist[b] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(f.dist[a] == 0.0);
  CHECK(f.parent[a] == kNoVertex);
}

TEST_CASE("graph distances dominate the euclidean chord and upwind stays close") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const VertexId s = at(m, -0.3, -0.5);
  const auto g = distance_field(m, s, Scheme::graph);
  const auto u = distance_field(m, s, Scheme::upwind);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const VertexId v = static_cast<VertexId>(rng() % m.size());
    const double chord = (m.vertices[v] - m.vertices[s]).norm();
    CHECK(g.dist[v] >= chord - 1e-11);
    // widest gap between radius-3 directions is atan(1/3), half of it bounds the excess
    CHECK(g.dist[v] <= chord / std::cos(0.5 * std::atan(1.0 / 3.0)) + 1e-11);
    CHECK(std::abs(u.dist[v] - chord) <= 0.005 + 0.01 * chord);
  }
}

TEST_CASE("graph distances are symmetric and satisfy the triangle inequality exactly") {
  const Mesh& m = fixtures::mesh("dumbbell", 25);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const VertexId a = static_cast<VertexId>(rng() % m.size());
    const VertexId b = static_cast<VertexId>(rng() % m.size());
    const VertexId c = static_cast<VertexId>(rng() % m.size());
    const auto fa = distance_field(m, a), fb = distance_field(m, b);
    CHECK(fa.dist[b] == fb.dist[a]);
    CHECK(fa.dist[c] <= fa.dist[b] + fb.dist[c]);
  }
}

TEST_CASE("graph path length equals the distance and ends at the source") {
  const Mesh& m = fixtures::mesh("annulus", 25);
  const VertexId s = at(m, 0.65, 0.0), t = at(m, -0.65, 0.05);
  const auto f = distance_field(m, s, Scheme::graph);
  const Polyline p = shortest_path(m, f, t);
  CHECK(p.length == f.dist[t]);
  CHECK(p.vertices.front() == t);
  CHECK(p.vertices.back() == s);
  for (const Vec2& q : p.points) CHECK(q.norm() >= 0.3 - 1e-9);
}

TEST_CASE("upwind descent path follows the straight segment") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const VertexId s = at(m, 0.5, 0.2);
  const auto f = distance_field(m, s, Scheme::upwind);
  const Vec2 start(-0.4, -0.3);
  const Polyline p = descent_path(m, view(f), start);
  const Vec2 d = (m.vertices[s] - start).normalized();
  for (const Vec2& q : p.points) {
    const Vec2 r = q - start;
    CHECK(std::abs(r.x() * d.y() - r.y() * d.x()) < 2.0 * m.h);
  }
  CHECK(p.length == doctest::Approx((m.vertices[s] - start).norm()).epsilon(0.02));
}

TEST_CASE("direction toward the source on the euclidean disk") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const VertexId s = at(m, 0.6, 0.0);
  const auto f = distance_field(m, s, Scheme::upwind);
  for (const Vec2 q : {Vec2(-0.4, 0.0), Vec2(0.0, 0.5), Vec2(-0.3, -0.4)}) {
    const VertexId p = at(m, q.x(), q.y());
    const Direction d = direction_at(m, f, p);
    const Vec2 expect = (m.vertices[s] - m.vertices[p]).normalized();
    CHECK(d.vector.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.vector.dot(expect) > std::cos(2.0 * M_PI / 180.0));
  }
  CHECK_THROWS_AS(direction_at(m, f, s), std::invalid_argument);
  CHECK_THROWS_AS(direction_at(m, f, m.boundary_order[0][0]), std::invalid_argument);
}

TEST_CASE("cut detection fires behind the hole and stays quiet elsewhere") {
  const Mesh& m = fixtures::mesh("annulus", 50);
  const VertexId s = at(m, 0.65, 0.0);
  const auto f = distance_field(m, s, Scheme::upwind);
  CHECK(detect_cut(m, f, at(m, -0.65, 0.0)));
  CHECK_FALSE(detect_cut(m, f, at(m, 0.0, 0.65)));
  CHECK_FALSE(detect_cut(m, f, at(m, -0.3, 0.6)));
}

TEST_CASE("upwind error shrinks with h against the annulus oracle") {
  const Vec2 a(-0.8, 0.0), b(0.8, 0.0);
  const double e25 = annulus_oracle(fixtures::mesh("annulus", 25), a, b, Scheme::upwind).relative_error;
  const double e50 = annulus_oracle(fixtures::mesh("annulus", 50), a, b, Scheme::upwind).relative_error;
  CHECK(annulus_geodesic_length(a, b, 0.3) ==
        doctest::Approx(2.0 * std::sqrt(0.55) + 0.3 * (M_PI - 2.0 * std::acos(0.375))).epsilon(1e-14));
  CHECK(annulus_geodesic_length(Vec2(0.5, 0.5), Vec2(0.5, -0.5), 0.3) == doctest::Approx(1.0));
  CHECK(e50 < e25);
  CHECK(e50 < 0.01);
}

TEST_CASE("sampling is consistent with interpolation at vertices") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto f = distance_field(m, at(m, 0.0, 0.0), Scheme::upwind);
  const VertexId v = at(m, 0.32, -0.16);
  CHECK(sample_field(m, view(f), m.vertices[v]) == doctest::Approx(f.dist[v]).epsilon(1e-12));
  const Interpolant w = interpolant_at(m, Vec2(0.31, -0.17));
  double sum = 0.0;
  for (double x : w.weights) sum += x;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("regular window on the euclidean disk is a contiguous arc around the nearest point") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const MetricDomain d = make_scenario("disk");
  const VertexId p = at(m, 0.6, 0.0);
  const RegularWindow w = regular_boundary_window(m, d, p, Scheme::upwind);
  REQUIRE(w.boundary_samples.size() >= 5);
  CHECK((m.vertices[w.nearest] - Vec2(1.0, 0.0)).norm() < 2.0 * m.h);
  bool contains = false;
  for (VertexId b : w.boundary_samples) contains |= b == w.nearest;
  CHECK(contains);
}

TEST_CASE("field round trip and bad magic") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto f = distance_field(m, at(m, 0.1, 0.1), Scheme::upwind);
  std::stringstream io;
  write_field(io, f);
  const auto back = read_field(io);
  CHECK(back.source == f.source);
  CHECK(back.dist == f.dist);
  CHECK(back.parent == f.parent);
  std::istringstream bad(std::string("XXXX") + std::string(64, '\0'));
  CHECK_THROWS_AS(read_field(bad), std::runtime_error);
}

TEST_CASE("results do not depend on the thread count") {
  const Mesh& m = fixtures::mesh("annulus", 25);
  const FramePtr frame = make_frame(m, 2.0 * m.h);
  setenv("DDF_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  const FrameTable one = FrameTable::compute(m, frame, Scheme::upwind);
  setenv("DDF_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  const FrameTable three = FrameTable::compute(m, frame, Scheme::upwind);
  unsetenv("DDF_THREADS");
  for (VertexId v = 0; v < static_cast<VertexId>(m.size()); v += 7) CHECK(one.row_vector(v) == three.row_vector(v));
}
