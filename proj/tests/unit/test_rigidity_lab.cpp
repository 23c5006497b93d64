#include <doctest.h>

#include "fixtures.hpp"

using namespace ddrlab;
using fixtures::at;

TEST_CASE("nearest-point criterion picks the closest boundary sample") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const auto& t = fixtures::table("disk", 50, Scheme::graph);
  const VertexId x = at(m, 0.0, -0.8);
  const auto hits = nearest_samples(t.ddf(x));
  REQUIRE_FALSE(hits.empty());
  for (std::size_t y : hits) CHECK((t.frame()->points[y] - Vec2(0.0, -1.0)).norm() < 3.0 * m.h);
  const std::size_t far = t.frame()->nearest_sample(m, at(m, 0.0, 1.0));
  CHECK_FALSE(nearest_point_criterion(t.ddf(x), far));
}

TEST_CASE("phi of a point against itself vanishes") {
  const auto& t = fixtures::table("disk", 25, Scheme::graph);
  const DDFMatrix d = t.ddf(40);
  const PhiFunction phi = phi_function(d, d, 3);
  for (double v : phi.values) CHECK(v == 0.0);
}

TEST_CASE("membership holds on the geodesic and fails off it") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const MetricDomain domain = make_scenario("disk");
  const auto& t = fixtures::table("disk", 50, Scheme::upwind);
  const VertexId p = at(m, 0.4, 0.1);
  const RegularWindow w = frame_window(m, domain, t, p);
  const auto idx = window_sample_indices(t, w);
  REQUIRE(idx.size() >= 5);
  const std::size_t z = idx[idx.size() / 2];
  const Vec2 zp = t.frame()->points[z];
  const double delta = 2.0 * t.frame()->max_spacing;
  const auto rp = t.row_vector(p);

  const Vec2 on = m.vertices[p] + 0.5 * (zp - m.vertices[p]);
  const auto ron = t.row_at(m, on);
  const PhiFunction phi_on = phi_function(t.frame(), rp.data(), ron.data(), z);
  CHECK(geodesic_membership(phi_on, w, delta).member);

  const Vec2 dir = (zp - m.vertices[p]).normalized();
  const Vec2 off = on + 0.15 * Vec2(-dir.y(), dir.x());
  const auto roff = t.row_at(m, off);
  const PhiFunction phi_off = phi_function(t.frame(), rp.data(), roff.data(), z);
  CHECK_FALSE(geodesic_membership(phi_off, w, delta).member);

  RegularWindow empty = w;
  empty.boundary_samples.clear();
  CHECK_THROWS_AS(geodesic_membership(phi_on, empty, delta), std::invalid_argument);
}

TEST_CASE("derivative of the distance difference matches the angle on the euclidean disk") {
  const Mesh& m = fixtures::mesh("disk", 50);
  const auto& t = fixtures::table("disk", 50, Scheme::upwind);
  const VertexId p = at(m, 0.0, 0.0);
  const std::size_t k = t.k();
  const std::size_t z1 = 0, z2 = k / 4;  // roughly a quarter turn apart
  const Vec2 u1 = (t.frame()->points[z1] - m.vertices[p]).normalized();
  const Vec2 u2 = (t.frame()->points[z2] - m.vertices[p]).normalized();
  const double expect = -1.0 + u1.dot(u2);
  CHECK(dphi_derivative(m, t, p, z1, z2, 5.0 * m.h) == doctest::Approx(expect).epsilon(0.03));
  CHECK_THROWS_AS(dphi_derivative(m, t, p, z1, z1, 5.0 * m.h), std::invalid_argument);
  CHECK_THROWS_AS(dphi_derivative(m, t, p, z1, z2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dphi_derivative(m, t, p, z1, z2, 6.0 * m.h), std::invalid_argument);
}

TEST_CASE("angle recovery on one manifold gives lambda near 1") {
  const Mesh& m = fixtures::mesh("conformal-disk", 50);
  const MetricDomain domain = make_scenario("conformal-disk");
  const auto& t = fixtures::table("conformal-disk", 50, Scheme::upwind);
  const VertexId p = at(m, 0.1, 0.2);
  const RegularWindow w = frame_window(m, domain, t, p);
  const DphiReport r = angle_recovery(m, t, p, w);
  REQUIRE(r.pairs.size() >= 3);
  for (const auto& pr : r.pairs) CHECK(pr.angle_deg >= 40.0 - 1e-9);
  CHECK(r.lambda_median == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("quantile interpolates order statistics") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({4.0, 1.0}, 0.0) == 1.0);
  CHECK(quantile({4.0, 1.0}, 1.0) == 4.0);
}
