#include "reports.hpp"

#include <cmath>

namespace ddrlab::harness {

using nlohmann::json;

Check make_check(std::string name, double value, const std::string& relation, double threshold) {
  Check c{std::move(name), value, relation, threshold, false};
  if (relation == "<=") c.passed = value <= threshold;
  else if (relation == ">=") c.passed = value >= threshold;
  else if (relation == "<") c.passed = value < threshold;
  else if (relation == ">") c.passed = value > threshold;
  else throw std::invalid_argument("make_check: unknown relation " + relation);
  return c;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Check& c) {
  return json{{"name", c.name},
              {"value", number(c.value)},
              {"relation", c.relation},
              {"threshold", number(c.threshold)},
              {"passed", c.passed}};
}

json to_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

bool all_passed(const std::vector<Check>& checks) { return first_failure(checks) == nullptr; }

const Check* first_failure(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

json to_json(const MetricSuiteReport& r) {
  return json{{"matrices", r.matrices},
              {"diagonal_failures", r.diagonal_failures},
              {"antisymmetry_failures", r.antisymmetry_failures},
              {"cocycle_failures", r.cocycle_failures},
              {"triples", r.triples},
              {"triangle_violations", r.triangle_violations},
              {"symmetry_pairs", r.symmetry_pairs},
              {"symmetry_violations", r.symmetry_violations},
              {"lipschitz_pairs", r.lipschitz_pairs},
              {"lipschitz_violations", r.lipschitz_violations},
              {"max_lipschitz_ratio", number(r.max_lipschitz_ratio)},
              {"passed", r.passed()}};
}

json to_json(const NearestReport& r) {
  return json{{"points", r.points},
              {"exact", r.exact},
              {"ties", r.ties},
              {"disagree", r.disagree},
              {"agreement", number(r.agreement())}};
}

json to_json(const MembershipReport& r) {
  return json{{"triples", r.triples},
              {"true_positive", r.true_positive},
              {"false_positive", r.false_positive},
              {"true_negative", r.true_negative},
              {"false_negative", r.false_negative},
              {"points", r.points},
              {"skipped_points", r.skipped_points},
              {"median_window", number(r.median_window)},
              {"precision", number(r.precision)},
              {"recall", number(r.recall)},
              {"delta_max", number(r.delta_max)},
              {"off_path_min_offset", number(r.off_min)}};
}

json to_json(const DphiCheckReport& r) {
  return json{{"points", r.points},
              {"skipped_points", r.skipped_points},
              {"pairs", r.pairs},
              {"passed", r.passed},
              {"fraction", number(r.fraction)},
              {"median_error", number(r.median_error)},
              {"p90_error", number(r.p90_error)},
              {"max_error", number(r.max_error)},
              {"tolerance", number(r.tolerance)}};
}

json to_json(const OracleComparison& r) {
  return json{{"a", {r.a.x(), r.a.y()}},
              {"b", {r.b.x(), r.b.y()}},
              {"computed", number(r.computed)},
              {"analytic", number(r.analytic)},
              {"relative_error", number(r.relative_error)}};
}

json to_json(const GeodesicImageResult& r) {
  return json{{"samples", r.samples},
              {"hits", r.hits},
              {"fraction", number(r.fraction)},
              {"probes", r.probes},
              {"rejected", r.rejected},
              {"specificity", number(r.specificity)},
              {"max_offset", number(r.max_offset)}};
}

json to_json(const CertificateReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) {
    json pj{{"p", p.p},
            {"p_prime", {p.p_prime.x(), p.p_prime.y()}},
            {"covered", p.covered},
            {"window_size", p.window_size},
            {"lambda_ok", p.lambda_ok}};
    if (p.covered) {
      pj["lambda_median"] = number(p.lambda.lambda_median);
      pj["lambda_spread"] = number(p.lambda.lambda_spread);
      pj["lambda_consistency"] = number(p.lambda.lambda_consistency);
      pj["pairs"] = p.lambda.pairs;
      pj["isometry_defect"] = number(p.isometry_defect);
    } else {
      pj["failure"] = p.failure;
    }
    probes.push_back(std::move(pj));
  }
  const auto& o = r.options;
  return json{{"probes", std::move(probes)},
              {"covered", r.covered},
              {"coverage", number(r.coverage)},
              {"lambda_pass_fraction", number(r.lambda_pass_fraction)},
              {"median_spread", number(r.median_spread)},
              {"max_spread", number(r.max_spread)},
              {"lambda_pooled_spread", number(r.lambda_pooled_spread)},
              {"distance_pairs", r.distance_pairs},
              {"max_distance_defect", number(r.max_distance_defect)},
              {"median_isometry_defect", number(r.median_isometry_defect)},
              {"coverage_ok", r.coverage_ok},
              {"lambda_ok", r.lambda_ok},
              {"distance_ok", r.distance_ok},
              {"passed", r.passed},
              {"thresholds",
               {{"lambda_tolerance", o.lambda_tolerance},
                {"spread_tolerance", o.spread_tolerance},
                {"lambda_fraction", o.lambda_fraction},
                {"distance_scale", o.distance_scale},
                {"distance_tolerance", number(r.distance_tolerance)},
                {"min_coverage", o.min_coverage},
                {"probe_margin", o.probe_margin},
                {"min_angle_deg", o.angles.min_angle_deg},
                {"fallback_angle_deg", o.angles.fallback_angle_deg},
                {"tau_cut", o.window.tau_cut},
                {"eikonal_gate", o.window.eikonal_gate},
                {"theta_min_deg", o.window.theta_min_deg},
                {"window_min_size", o.window.min_size}}},
              {"seed", o.seed}};
}

json to_json(const PipelineReport& r, const Correspondence* corr) {
  json j{{"sources", r.sources},
         {"interior", r.interior},
         {"within_tolerance", r.within_tolerance},
         {"within_fraction", number(r.within_fraction)},
         {"worst_offset", number(r.worst_offset)},
         {"gauge_tolerance", number(r.gauge_tolerance)},
         {"median_sup_defect", number(r.median_sup_defect)},
         {"boundary_defect", number(r.boundary_defect)},
         {"boundary_tolerance", number(r.boundary_tolerance)},
         {"ambiguous", r.ambiguous},
         {"non_mutual", r.non_mutual},
         {"paths", r.paths},
         {"geodesic_image", to_json(r.geodesic)},
         {"certificate", to_json(r.certificate)}};
  if (corr) {
    json pairs = json::array();
    for (const auto& p : corr->pairs) {
      pairs.push_back({{"source", p.source},
                       {"x", {p.x.x(), p.x.y()}},
                       {"x_prime", {p.x_prime.x(), p.x_prime.y()}},
                       {"sup_defect", number(p.sup_defect)},
                       {"ambiguous", p.ambiguous},
                       {"mutual", p.mutual},
                       {"boundary", p.boundary}});
    }
    j["pairs"] = std::move(pairs);
  }
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace ddrlab::harness
