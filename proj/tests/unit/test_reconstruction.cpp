#include <doctest.h>

#include "fixtures.hpp"

using namespace ddrlab;

TEST_CASE("identical archives match every source to itself") {
  const Mesh& m = fixtures::mesh("dumbbell", 25);
  const auto& t = fixtures::table("dumbbell", 25, Scheme::graph);
  const DDFArchive a = archive_from_table(t, source_grid(m, 0.1));
  const Correspondence c = build_phi(a, a, {}, &m, &m);
  REQUIRE(c.pairs.size() == a.sources.size());
  for (const auto& p : c.pairs) {
    CHECK(p.match == p.source);
    CHECK(p.sup_defect == 0.0);
    CHECK(p.mutual);
  }
  CHECK(c.median_sup_defect == 0.0);
  CHECK(boundary_identity_check(c) == 0.0);
}

TEST_CASE("empty archives and archives without boundary sources are rejected") {
  const Mesh& m = fixtures::mesh("disk", 25);
  const auto& t = fixtures::table("disk", 25, Scheme::graph);
  DDFArchive empty;
  empty.frame = t.frame();
  CHECK_THROWS(build_phi(empty, empty));
  std::vector<VertexId> interior;
  for (VertexId v = 0; v < static_cast<VertexId>(m.size()) && interior.size() < 5; ++v)
    if (!m.is_boundary(v)) interior.push_back(v);
  const DDFArchive a = archive_from_table(t, interior);
  CHECK_THROWS(boundary_identity_check(build_phi(a, a, {}, &m, &m)));
}

TEST_CASE("source grid covers interior and boundary") {
  const Mesh& m = fixtures::mesh("annulus", 25);
  const auto s = source_grid(m, 0.1);
  CHECK(std::is_sorted(s.begin(), s.end()));
  std::size_t boundary = 0;
  for (VertexId v : s) boundary += m.is_boundary(v);
  CHECK(boundary > 0);
  CHECK(boundary < s.size());
}

TEST_CASE("dense matching recovers a twisted copy and its boundary") {
  const Mesh& a = fixtures::mesh("disk", 50);
  const Mesh& b = fixtures::mesh("disk+twist", 50);
  const auto& ta = fixtures::table("disk", 50, Scheme::upwind);
  const auto& tb = fixtures::table("disk+twist", 50, Scheme::upwind);
  const GaugeMap gauge = scenario_gauge("disk+twist");
  PipelineOptions opts;
  opts.source_spacing = 0.1;
  opts.geodesic_paths = 4;
  opts.certificate.probes = 8;
  const PipelineReport r = run_pipeline(a, ta, b, tb, &gauge, opts);
  CHECK(r.within_fraction >= 0.95);
  CHECK(r.boundary_defect <= r.boundary_tolerance);
  CHECK(r.certificate.coverage >= 0.8);
}

TEST_CASE("symmetric matching between a manifold and itself is the identity") {
  const Mesh& m = fixtures::mesh("conformal-disk", 50);
  const auto& t = fixtures::table("conformal-disk", 50, Scheme::upwind);
  const DenseMatcher matcher(m, t);
  const auto sources = source_grid(m, 0.2);
  const Correspondence c = build_phi(m, t, sources, matcher);
  for (const auto& p : c.pairs) CHECK((p.x_prime - p.x).norm() <= 2.0 * m.h);
}

TEST_CASE("certificate accepts the identity and rejects a non-isometric partner") {
  const Mesh& a = fixtures::mesh("disk", 50);
  const auto& ta = fixtures::table("disk", 50, Scheme::upwind);
  const Mesh& c = fixtures::mesh("conformal-disk", 50);
  const auto& tc = fixtures::table("conformal-disk", 50, Scheme::upwind);
  CertificateOptions opts;
  opts.probes = 12;

  const DenseMatcher self(a, ta);
  Correspondence ident{ta.frame(), {}, 0.0};
  const CertificateReport good = isometry_certificate(ident, a, ta, self, opts);
  CHECK(good.coverage >= 0.8);
  CHECK(good.median_spread < 0.03);

  const DenseMatcher other(c, tc);
  Correspondence cross{ta.frame(), {}, 0.0};
  const CertificateReport bad = isometry_certificate(cross, a, ta, other, opts);
  CHECK_FALSE(bad.passed);
  CHECK(bad.median_spread > 0.1);
}

TEST_CASE("common window of a window with itself is itself") {
  RegularWindow w;
  w.nearest = 4;
  w.boundary_samples = {2, 3, 4, 5, 6};
  const RegularWindow c = common_window(w, w);
  CHECK(c.boundary_samples == w.boundary_samples);
}
