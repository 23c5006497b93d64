#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ddrlab/verification.hpp"

namespace ddrlab::harness {

/// One verdict with its measured value and threshold.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", ">"
  double threshold = 0.0;
  bool passed = false;
};

Check make_check(std::string name, double value, const std::string& relation, double threshold);
nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const std::vector<Check>& checks);
bool all_passed(const std::vector<Check>& checks);
/// First failing check, or nullptr.
const Check* first_failure(const std::vector<Check>& checks);

/// JSON numbers cannot hold NaN or infinities; those become null.
nlohmann::json number(double v);

nlohmann::json to_json(const MetricSuiteReport& r);
nlohmann::json to_json(const NearestReport& r);
nlohmann::json to_json(const MembershipReport& r);
nlohmann::json to_json(const DphiCheckReport& r);
nlohmann::json to_json(const OracleComparison& r);
nlohmann::json to_json(const GeodesicImageResult& r);
nlohmann::json to_json(const CertificateReport& r);
/// Pipeline summary; pairs are included when a correspondence is given.
nlohmann::json to_json(const PipelineReport& r, const Correspondence* corr = nullptr);

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace ddrlab::harness
