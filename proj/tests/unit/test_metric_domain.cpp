#include <doctest.h>

#include <numeric>
#include <sstream>

#include "ddrlab/distance_engine.hpp"
#include "ddrlab/io.hpp"
#include "fixtures.hpp"

using namespace ddrlab;

TEST_CASE("stencil offsets are primitive and counted per radius") {
  CHECK(stencil_offsets(1).size() == 8);
  CHECK(stencil_offsets(2).size() == 16);
  CHECK(stencil_offsets(3).size() == 32);
  for (auto [i, j] : stencil_offsets(3)) CHECK(std::gcd(std::abs(i), std::abs(j)) == 1);
}

TEST_CASE("segment length under the euclidean metric is the chord") {
  const auto g = euclidean_metric();
  CHECK(segment_metric_length(g, Vec2(0.1, -0.2), Vec2(0.4, 0.2)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("catalog meshes are connected with the expected loop counts") {
  for (const std::string name : {"disk", "annulus", "dumbbell", "conformal-disk"}) {
    CAPTURE(name);
    const Mesh& m = fixtures::mesh(name, 25);
    CHECK(connected_components(m) == 1);
    CHECK(m.boundary_order.size() == (name == "annulus" ? 2u : 1u));
    for (const auto& e : m.stencil_edges()) CHECK(e.length > 0.0);
  }
}

TEST_CASE("unknown scenario names are rejected") {
  CHECK_THROWS(make_scenario("torus"));
  CHECK_THROWS(make_scenario("disk+shear"));
  CHECK(control_scenario("conformal-disk") == "disk");
  CHECK(control_scenario("annulus") == "annulus+bump");
  CHECK_THROWS(control_scenario("disk+twist"));
}

TEST_CASE("boundary-fixing twists fix the boundary and preserve orientation") {
  const GaugeMap disk = disk_twist_gauge();
  const GaugeMap ring = annulus_twist_gauge(0.3);
  const GaugeMap local = local_twist_gauge(Vec2(0.55, 0.0), 0.35);
  for (int k = 0; k < 16; ++k) {
    const double t = 2.0 * M_PI * k / 16.0;
    const Vec2 u(std::cos(t), std::sin(t));
    CHECK((disk.forward(u) - u).norm() < 1e-14);
    CHECK((ring.forward(u) - u).norm() < 1e-14);
    CHECK((ring.forward(0.3 * u) - 0.3 * u).norm() < 1e-14);
    CHECK((local.forward(u) - u).norm() < 1e-14);
    const Vec2 p = 0.6 * u;
    for (const GaugeMap* gm : {&disk, &ring, &local}) {
      CHECK(gm->jacobian(p).determinant() > 0.0);
      const Mat2 numeric = with_numeric_jacobian(*gm).jacobian(p);
      CHECK((numeric - gm->jacobian(p)).norm() < 1e-6);
      CHECK((gm->apply_inverse(gm->forward(p)) - p).norm() < 1e-9);
    }
  }
}

TEST_CASE("pullback by the identity keeps the metric, twisted pullbacks stay SPD") {
  const MetricDomain base = make_scenario("conformal-disk");
  const MetricDomain same = pullback_domain(base, identity_gauge());
  const MetricDomain twisted = make_scenario("conformal-disk+twist");
  for (double x : {-0.7, -0.2, 0.0, 0.35, 0.8}) {
    const Vec2 p(x, 0.4 * x + 0.1);
    CHECK((same.metric(p) - base.metric(p)).norm() < 1e-15);
    const Mat2 g = twisted.metric(p);
    CHECK(g(0, 1) == doctest::Approx(g(1, 0)));
    CHECK(g(0, 0) > 0.0);
    CHECK(g.determinant() > 0.0);
  }
}

TEST_CASE("twisted copies have the same distances up to discretization") {
  const Mesh& a = fixtures::mesh("disk", 50);
  const Mesh& b = fixtures::mesh("disk+twist", 50);
  const GaugeMap gauge = scenario_gauge("disk+twist");
  const Vec2 pa(-0.5, 0.1), qa(0.4, 0.45);
  const double da = distance_field(a, a.nearest_vertex(pa), Scheme::upwind).dist[a.nearest_vertex(qa)];
  // b is the pullback, so gauge.forward carries b isometrically onto a.
  const Vec2 pb = gauge.apply_inverse(a.vertices[a.nearest_vertex(pa)]);
  const Vec2 qb = gauge.apply_inverse(a.vertices[a.nearest_vertex(qa)]);
  const double db = distance_field(b, b.nearest_vertex(pb), Scheme::upwind).dist[b.nearest_vertex(qb)];
  CHECK(std::abs(da - db) < 3.0 * a.h);
}

TEST_CASE("mesh json round trip is exact") {
  const Mesh& m = fixtures::mesh("annulus", 25);
  const std::string text = mesh_to_json(m);
  std::istringstream in(text);
  const Mesh back = read_mesh(in);
  CHECK(back.size() == m.size());
  CHECK(back.h == m.h);
  CHECK(back.boundary_order == m.boundary_order);
  CHECK(mesh_to_json(back) == text);
  for (VertexId v = 0; v < static_cast<VertexId>(m.size()); ++v) {
    REQUIRE(back.neighbors(v).size() == m.neighbors(v).size());
  }
}

TEST_CASE("malformed mesh json is rejected") {
  std::istringstream bad("{\"vertices\": 3}");
  CHECK_THROWS_AS(read_mesh(bad), std::runtime_error);
  std::istringstream garbage("not json");
  CHECK_THROWS_AS(read_mesh(garbage), std::runtime_error);
}
