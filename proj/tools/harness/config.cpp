#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ddrlab/metric_domain.hpp"

namespace ddrlab::harness {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto catalog = scenario_catalog();
  if (std::find(catalog.begin(), catalog.end(), scenario) == catalog.end()) {
    std::string names;
    for (const auto& n : catalog) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + scenario + "' (expected one of " + names + ")");
  }
  require(std::isfinite(h) && h > 0.0, "h must be positive");
  require(h <= 0.25, "h must be at most 0.25");
  require(stencil_radius >= 1 && stencil_radius <= 8, "stencil_radius must be in [1, 8]");
  require(frame_spacing >= 0.0 && effective_frame_spacing() <= 2.0 * h + 1e-15,
          "frame_spacing must be positive and at most 2h (0 selects 2h)");
  require(std::isfinite(source_spacing) && source_spacing > 0.0, "source_spacing must be positive");
  require(tau_cut > 0.0 && tau_cut <= 1.0, "tau_cut must be in (0, 1]");
  require(eikonal_gate >= 0.0 && eikonal_gate < 1.0, "eikonal_gate must be in [0, 1)");
  require(theta_min_deg > 0.0 && theta_min_deg < 90.0, "theta_min_deg must be in (0, 90)");
  require(delta_max >= 0.0, "delta_max must be nonnegative (0 selects 2 frame spacings)");
  require(lambda_tolerance > 0.0 && lambda_tolerance < 1.0, "lambda_tolerance must be in (0, 1)");
  require(spread_tolerance > 0.0 && spread_tolerance < 1.0, "spread_tolerance must be in (0, 1)");
  require(ratio_level > 0.0 && ratio_level <= 1.0, "ratio_level must be in (0, 1]");
  require(dphi_tolerance > 0.0, "dphi_tolerance must be positive");
  require(control_spread > 0.0, "control_spread must be positive");
  require(control_defect_factor >= 1.0, "control_defect_factor must be at least 1");
  require(probes >= 1, "probes must be at least 1");
  require(membership_triples >= 1, "membership_triples must be at least 1");
  require(nearest_points >= 1, "nearest_points must be at least 1");
  require(metric_pairs >= 1, "metric_pairs must be at least 1");
  require(archive_limit_mb > 0.0, "archive_limit_mb must be positive");
}

json to_json(const ExperimentConfig& c) {
  return json{{"scenario", c.scenario},
              {"h", c.h},
              {"stencil_radius", c.stencil_radius},
              {"frame_spacing", c.frame_spacing},
              {"source_spacing", c.source_spacing},
              {"tau_cut", c.tau_cut},
              {"eikonal_gate", c.eikonal_gate},
              {"theta_min_deg", c.theta_min_deg},
              {"delta_max", c.delta_max},
              {"lambda_tolerance", c.lambda_tolerance},
              {"spread_tolerance", c.spread_tolerance},
              {"ratio_level", c.ratio_level},
              {"dphi_tolerance", c.dphi_tolerance},
              {"control_spread", c.control_spread},
              {"control_defect_factor", c.control_defect_factor},
              {"seed", c.seed},
              {"probes", c.probes},
              {"membership_triples", c.membership_triples},
              {"nearest_points", c.nearest_points},
              {"metric_pairs", c.metric_pairs},
              {"archive_limit_mb", c.archive_limit_mb}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const json defaults = to_json(ExperimentConfig{});
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
  }();
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown config field '" + k + "'");
  }
  read_field(j, "scenario", c.scenario);
  read_field(j, "h", c.h);
  read_field(j, "stencil_radius", c.stencil_radius);
  read_field(j, "frame_spacing", c.frame_spacing);
  read_field(j, "source_spacing", c.source_spacing);
  read_field(j, "tau_cut", c.tau_cut);
  read_field(j, "eikonal_gate", c.eikonal_gate);
  read_field(j, "theta_min_deg", c.theta_min_deg);
  read_field(j, "delta_max", c.delta_max);
  read_field(j, "lambda_tolerance", c.lambda_tolerance);
  read_field(j, "spread_tolerance", c.spread_tolerance);
  read_field(j, "ratio_level", c.ratio_level);
  read_field(j, "dphi_tolerance", c.dphi_tolerance);
  read_field(j, "control_spread", c.control_spread);
  read_field(j, "control_defect_factor", c.control_defect_factor);
  read_field(j, "seed", c.seed);
  read_field(j, "probes", c.probes);
  read_field(j, "membership_triples", c.membership_triples);
  read_field(j, "nearest_points", c.nearest_points);
  read_field(j, "metric_pairs", c.metric_pairs);
  read_field(j, "archive_limit_mb", c.archive_limit_mb);
  return c;
}

}  // namespace ddrlab::harness
