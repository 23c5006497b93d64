#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "ddrlab/verification.hpp"
#include "reports.hpp"

namespace ddrlab::harness {

WindowOptions window_options(const ExperimentConfig& c);
MembershipOptions membership_options(const ExperimentConfig& c);
DphiCheckOptions dphi_options(const ExperimentConfig& c);
PipelineOptions pipeline_options(const ExperimentConfig& c);

/// "grid:<spacing>", "all", "boundary" or "interior:<count>".
std::vector<VertexId> parse_sources(const Mesh& mesh, const std::string& text, std::uint64_t seed = 7);

/// Archive of the given sources, thinned to every s-th source when the full
/// k x k matrices would exceed limit_mb. stride_out receives s.
DDFArchive capped_archive(const FrameTable& table, const std::vector<VertexId>& sources,
                          double limit_mb, std::size_t* stride_out = nullptr);

/// Phi over the loop of z for x halfway along [p z], p the first probe
/// with a window. Keys: arc, phi, z_arc, argmax_arc, member.
nlohmann::json phi_profile(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                           const ExperimentConfig& c);

struct LemmaResult {
  nlohmann::json report;
  std::vector<Check> checks;
};

/// "nearest" runs on graph tables, "segment" and "dphi" on upwind tables.
LemmaResult verify_lemma(const std::string& lemma, const Mesh& mesh, const MetricDomain& domain,
                         const FrameTable& table, const ExperimentConfig& c);

struct RunOutcome {
  int exit_code = 0;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> artifacts;
};

/// generate -> ddf -> verify -> reconstruct, writing artifacts into out_dir.
/// exit_code 0 when every check passes, 1 otherwise.
RunOutcome run_scenario(const ExperimentConfig& c, const std::string& out_dir, std::ostream& log);

/// Archive-mode correspondence between two DDF1 files. With both meshes,
/// upwind tables are rebuilt on the archive frame and the dense pipeline
/// (gauge comparison when B is a "+twist" or "+rotate" copy of A,
/// certificate, geodesic images) is added.
nlohmann::json reconstruct_files(const std::string& data_a, const std::string& data_b,
                                 const std::string& mesh_a, const std::string& mesh_b,
                                 const ExperimentConfig& c, std::ostream& log);

/// Pass/fail table of report JSONs and summaries of DDF1 archives; SVG
/// plots into svg_dir when it is not empty. Returns 0, or 1 on unreadable
/// input.
int render_reports(const std::vector<std::string>& paths, const std::string& svg_dir, std::ostream& out,
                   std::ostream& err);

}  // namespace ddrlab::harness
