#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"

using namespace ddrlab;
using fixtures::at;

TEST_CASE("frame spacing is bounded by 2h") {
  const Mesh& m = fixtures::mesh("annulus", 25);
  CHECK_THROWS(make_frame(m, 2.5 * m.h));
  CHECK_THROWS(make_frame(m, 0.0));
  const FramePtr f = make_frame(m, 1.5 * m.h);
  CHECK(f->max_spacing <= 1.5 * m.h + 1e-12);
  CHECK(f->loop_lengths.size() == 2);
  CHECK(std::isinf(f->arc_distance(0, f->size() - 1)) == (f->loops.front() != f->loops.back()));
}

TEST_CASE("graph DDF matrices are exact cocycles") {
  const auto& t = fixtures::table("dumbbell", 25, Scheme::graph);
  for (VertexId x : {VertexId(0), VertexId(17), VertexId(301)}) {
    const DDFMatrix d = t.ddf(x);
    const CocycleReport r = check_cocycle(d, 500, 9);
    CHECK(r.zero_diagonal);
    CHECK(r.antisymmetric);
    CHECK(r.cocycle);
  }
}

TEST_CASE("ddf from a fresh field equals the table row") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto& t = fixtures::table("disk", 25, Scheme::graph);
  const VertexId x = at(m, 0.2, -0.3);
  const DDFMatrix a = ddf(m, t.frame(), x, Scheme::graph);
  const DDFMatrix b = t.ddf(x);
  CHECK(a.values == b.values);
  CHECK(sup_dist(a, b) == 0.0);
}

TEST_CASE("sup distance is 2-Lipschitz and separates points") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto& t = fixtures::table("disk", 25, Scheme::graph);
  std::mt19937_64 rng(21);
  for (int k = 0; k < 40; ++k) {
    const VertexId x = static_cast<VertexId>(rng() % m.size());
    const VertexId y = static_cast<VertexId>(rng() % m.size());
    const double dxy = distance_field(m, x).dist[y];
    const double s = sup_dist(t.ddf(x), t.ddf(y));
    CHECK(s <= 2.0 * dxy);
    CHECK(s == t.sup_between(x, y));
    if (x != y) CHECK(s > 0.0);
  }
}

TEST_CASE("compact sup agrees with the full matrix difference") {
  const std::vector<double> a{0.3, 1.1, 0.7, 0.2}, b{0.5, 0.9, 0.9, 0.1};
  // differences a - b: -0.2, 0.2, -0.2, 0.1
  CHECK(compact_sup(a.data(), b.data(), 4) == doctest::Approx(0.4));
  const FramePtr frame = std::make_shared<BoundaryFrame>(BoundaryFrame{{0, 1, 2, 3}, {}, {}, {}, {}, 0.0});
  CHECK(sup_dist(ddf_from_distances(frame, 0, a), ddf_from_distances(frame, 1, b)) == doctest::Approx(0.4));
}

TEST_CASE("match finds the exact matrix and breaks ties by index") {
  const auto& t = fixtures::table("annulus", 25, Scheme::graph);
  std::vector<DDFMatrix> data;
  for (VertexId v : {5, 40, 80, 40}) data.push_back(t.ddf(v));
  const MatchResult r = match(data, t.ddf(40));
  CHECK(r.index == 1);
  CHECK(r.distance == 0.0);
}

TEST_CASE("mismatched frames are rejected") {
  const auto& a = fixtures::table("disk", 25, Scheme::graph);
  const auto& b = fixtures::table("annulus", 25, Scheme::graph);
  CHECK_THROWS(sup_dist(a.ddf(0), b.ddf(0)));
}

TEST_CASE("bilipschitz ratios stay in (0, 2]") {
  const Mesh& m = fixtures::mesh("conformal-disk", 25);
  const auto& t = fixtures::table("conformal-disk", 25, Scheme::graph);
  const auto samples = bilipschitz_profile(m, t, 50, 0.3, 4);
  CHECK(samples.size() == 50);
  for (const auto& s : samples) {
    CHECK(s.distance > 0.0);
    CHECK(s.distance <= 0.3);
    CHECK(s.ratio > 0.0);
    CHECK(s.ratio <= 2.0);
  }
}

TEST_CASE("archive round trip and corrupt input") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto& t = fixtures::table("disk", 25, Scheme::graph);
  DDFArchive a;
  a.frame = t.frame();
  for (VertexId v : {3, 99, 250}) {
    a.sources.push_back(v);
    a.matrices.push_back(t.ddf(v));
  }
  std::stringstream io;
  write_archive(io, a);
  const std::string bytes = io.str();
  std::istringstream in(bytes);
  const DDFArchive b = read_archive(in, &m);
  REQUIRE(b.matrices.size() == 3);
  CHECK(b.sources == a.sources);
  CHECK(b.frame->samples == a.frame->samples);
  CHECK(b.frame->same_as(*a.frame));
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.matrices[i].values == a.matrices[i].values);

  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream bad_in(bad);
  CHECK_THROWS_WITH_AS(read_archive(bad_in), doctest::Contains("magic"), std::runtime_error);
  std::istringstream short_in(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_archive(short_in), std::runtime_error);
}
