#pragma once

#include <cstddef>
#include <vector>

#include "ddrlab/ddr.hpp"

namespace ddrlab {

/// Row y of D_x is <= tol everywhere: y is a nearest boundary sample of x.
bool nearest_point_criterion(const DDFMatrix& d, std::size_t y, double tol = 0.0);
/// Every sample accepted by the criterion.
std::vector<std::size_t> nearest_samples(const DDFMatrix& d, double tol = 0.0);

/// values[y] = D_p(y, z) - D_x(y, z).
struct PhiFunction {
  FramePtr frame;
  std::size_t z_index = 0;
  std::vector<double> values;
};

PhiFunction phi_function(const DDFMatrix& dp, const DDFMatrix& dx, std::size_t z);
/// Same from distance vectors d(p, y_.) and d(x, y_.).
PhiFunction phi_function(const FramePtr& frame, const double* dp, const double* dx, std::size_t z);

struct MembershipResult {
  bool member = false;
  std::size_t argmax = 0;
  double arc_offset = 0.0;  // arc distance from argmax to z
};

/// Argmax of phi within arc distance delta_max of z. Values within tie_tol
/// of the maximum count as ties and resolve toward z. Throws
/// std::invalid_argument when z is not a sample of the window.
MembershipResult geodesic_membership(const PhiFunction& phi, const RegularWindow& window,
                                     double delta_max, double tie_tol = 1e-12);
bool geodesic_membership(const DDFMatrix& dp, const DDFMatrix& dx, std::size_t z,
                         const RegularWindow& window, double delta_max);

/// g-unit initial tangent at q of the descent path toward the field's source,
/// from a quadratic fit of the first few path points.
Vec2 path_tangent(const Mesh& mesh, const FieldView& field, const Vec2& q);

/// Central difference of t -> D_{gamma(t)}(z1, z2) at t = 0, gamma the
/// arclength-parametrized shortest path from q toward frame sample z1.
/// D is read from the frame table, interpolated at continuous points.
/// Throws std::invalid_argument for z1 == z2 or t_step outside (0, 5h], and
/// std::runtime_error when the path is shorter than 2 t_step.
double dphi_derivative(const Mesh& mesh, const FrameTable& table, const Vec2& q, std::size_t z1,
                       std::size_t z2, double t_step);
double dphi_derivative(const Mesh& mesh, const FrameTable& table, VertexId p, std::size_t z1,
                       std::size_t z2, double t_step);

struct DphiPair {
  std::size_t z1 = 0;  // frame sample indices
  std::size_t z2 = 0;
  double angle_deg = 0.0;  // angle between the two directions at p
  // Single manifold: lhs = -1 + <v1, v2>_g from direction_at, rhs = the
  // finite-difference derivative along [p z1], lambda = rhs / lhs for both
  // orientations. Across a pair (M, M'): lhs = derivative in M at p, rhs =
  // derivative in M' at p', lambda = lhs / rhs.
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct DphiReport {
  VertexId p = kNoVertex;
  Vec2 p_prime = Vec2::Zero();
  std::vector<DphiPair> pairs;
  double lambda_median = 0.0;
  double lambda_consistency = 0.0;  // max |lambda_i - lambda_j|
  double lambda_spread = 0.0;       // 90th minus 10th percentile
};

struct AngleOptions {
  std::size_t max_pairs = 12;
  double min_angle_deg = 90.0;
  double fallback_angle_deg = 40.0;  // lowest floor tried when a window is narrow
  double t_step = 0.0;  // 0 means 5h
};

/// Both the geometric and the finite-difference side at p in one manifold.
DphiReport angle_recovery(const Mesh& mesh, const FrameTable& table, VertexId p,
                          const RegularWindow& window, const AngleOptions& options = {});

/// lambda estimates at p in M against its correspondent p' in M'.
DphiReport angle_recovery_pair(const Mesh& mesh, const FrameTable& table, VertexId p,
                               const RegularWindow& window, const Mesh& mesh_b,
                               const FrameTable& table_b, const Vec2& p_prime,
                               const AngleOptions& options = {});

/// Window search at p using the frame table's columns as the fields.
RegularWindow frame_window(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                           VertexId p, const WindowOptions& options = {});

/// Window search at a continuous point q (distances sampled from the table).
RegularWindow frame_window_at(const Mesh& mesh, const FrameTable& table, const Vec2& q,
                              const WindowOptions& options = {});

/// Frame sample index of each window sample.
std::vector<std::size_t> window_sample_indices(const FrameTable& table, const RegularWindow& window);

double quantile(std::vector<double> values, double q);

}  // namespace ddrlab
