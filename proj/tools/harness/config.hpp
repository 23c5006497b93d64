#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace ddrlab::harness {

/// Invalid experiment settings. The CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string scenario = "disk";
  double h = 0.02;
  int stencil_radius = 3;
  double frame_spacing = 0.0;   // 0 means 2h
  double source_spacing = 0.05;
  double tau_cut = 0.15;
  double eikonal_gate = 0.02;
  double theta_min_deg = 10.0;
  double delta_max = 0.0;       // 0 means 2 frame spacings
  double lambda_tolerance = 0.02;
  double spread_tolerance = 0.03;
  double ratio_level = 0.9;
  double dphi_tolerance = 0.05;
  double control_spread = 0.1;  // negative control must exceed this median lambda spread
  double control_defect_factor = 10.0;
  std::uint64_t seed = 7;
  int probes = 24;
  int membership_triples = 600;
  int nearest_points = 500;
  int metric_pairs = 1000;
  double archive_limit_mb = 16.0;

  double effective_frame_spacing() const { return frame_spacing > 0.0 ? frame_spacing : 2.0 * h; }

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Keys absent from j keep the values already in `base`. Unknown keys and
/// wrong types raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

}  // namespace ddrlab::harness
