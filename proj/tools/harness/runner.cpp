#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "ddrlab/io.hpp"
#include "svg.hpp"

namespace ddrlab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_archive_file(const std::string& path, const DDFArchive& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_archive(out, a);
}

json frame_json(const BoundaryFrame& f) {
  return json{{"samples", f.size()}, {"loops", f.loop_lengths.size()}, {"max_spacing", f.max_spacing}};
}

std::string check_line(const Check& c) {
  std::ostringstream s;
  s << (c.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(44) << c.name << " " << std::setprecision(6)
    << c.value << " " << c.relation << " " << c.threshold;
  return s.str();
}

void log_checks(std::ostream& log, const std::vector<Check>& checks) {
  for (const auto& c : checks) log << "  " << check_line(c) << '\n';
}

json archive_json(const std::string& path, const DDFArchive& a, std::size_t total, std::size_t stride,
                  double limit_mb) {
  return json{{"path", fs::path(path).filename().string()},
              {"sources_available", total},
              {"sources_written", a.sources.size()},
              {"stride", stride},
              {"limit_mb", limit_mb},
              {"frame_size", a.frame->size()}};
}

std::vector<double> probe_lambdas(const CertificateReport& r) {
  std::vector<double> out;
  for (const auto& p : r.probes) {
    if (p.covered) out.push_back(p.lambda.lambda_median);
  }
  return out;
}

std::string lambda_histogram(const std::string& title, const std::vector<double>& lambdas, double tol) {
  double lo = 1.0 - 5.0 * tol;
  double hi = 1.0 + 5.0 * tol;
  for (double v : lambdas) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return svg_histogram(title, "lambda (per-probe median)", lambdas, lo, hi, 30,
                       {{1.0 - tol, "1-tol", "#27ae60"}, {1.0 + tol, "1+tol", "#27ae60"}});
}

std::string phi_svg(const json& profile) {
  const auto arc = profile.at("arc").get<std::vector<double>>();
  const auto phi = profile.at("phi").get<std::vector<double>>();
  return svg_line_plot("Phi along the boundary loop of z", "arclength", "Phi", arc, phi,
                       {{profile.at("z_arc").get<double>(), "z", "#c0392b"},
                        {profile.at("argmax_arc").get<double>(), "argmax", "#27ae60"}});
}

void write_file(const fs::path& path, const std::string& text, std::vector<std::string>* artifacts) {
  write_text_file(path.string(), text);
  if (artifacts) artifacts->push_back(path.string());
}

}  // namespace

WindowOptions window_options(const ExperimentConfig& c) {
  WindowOptions w;
  w.tau_cut = c.tau_cut;
  w.eikonal_gate = c.eikonal_gate;
  w.theta_min_deg = c.theta_min_deg;
  return w;
}

MembershipOptions membership_options(const ExperimentConfig& c) {
  MembershipOptions m;
  m.triples = static_cast<std::size_t>(c.membership_triples);
  m.delta_max = c.delta_max;
  // coarse meshes push the off-path band past the default 0.2
  const double delta = c.delta_max > 0.0 ? c.delta_max : 2.0 * c.effective_frame_spacing();
  m.off_max = std::max(m.off_max, 2.0 * delta + 0.1);
  m.seed = c.seed + 4;
  m.window = window_options(c);
  return m;
}

DphiCheckOptions dphi_options(const ExperimentConfig& c) {
  DphiCheckOptions d;
  d.tolerance = c.dphi_tolerance;
  d.seed = c.seed + 6;
  d.window = window_options(c);
  return d;
}

PipelineOptions pipeline_options(const ExperimentConfig& c) {
  PipelineOptions p;
  p.source_spacing = c.source_spacing;
  p.match.ratio_level = c.ratio_level;
  p.certificate.probes = static_cast<std::size_t>(c.probes);
  p.certificate.lambda_tolerance = c.lambda_tolerance;
  p.certificate.spread_tolerance = c.spread_tolerance;
  p.certificate.seed = c.seed;
  p.certificate.window = window_options(c);
  return p;
}

std::vector<VertexId> parse_sources(const Mesh& mesh, const std::string& text, std::uint64_t seed) {
  auto value_after = [&](const std::string& prefix) -> std::string {
    return text.size() > prefix.size() ? text.substr(prefix.size()) : std::string();
  };
  try {
    if (text == "all") {
      std::vector<VertexId> all(mesh.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<VertexId>(i);
      return all;
    }
    if (text == "boundary") {
      std::vector<VertexId> out;
      for (VertexId v = 0; v < static_cast<VertexId>(mesh.size()); ++v) {
        if (mesh.is_boundary(v)) out.push_back(v);
      }
      return out;
    }
    if (text.rfind("grid:", 0) == 0) {
      const double s = std::stod(value_after("grid:"));
      if (!(s > 0.0)) throw std::invalid_argument("spacing");
      return source_grid(mesh, s);
    }
    if (text.rfind("interior:", 0) == 0) {
      const long n = std::stol(value_after("interior:"));
      if (n <= 0) throw std::invalid_argument("count");
      auto v = sample_interior(mesh, static_cast<std::size_t>(n), 0.0, seed);
      std::sort(v.begin(), v.end());
      return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("bad --sources value '" + text + "' (grid:<spacing>, all, boundary, interior:<count>)");
}

DDFArchive capped_archive(const FrameTable& table, const std::vector<VertexId>& sources, double limit_mb,
                          std::size_t* stride_out) {
  const double bytes = 8.0 * static_cast<double>(table.k()) * static_cast<double>(table.k());
  const double fit = std::floor(limit_mb * 1024.0 * 1024.0 / bytes);
  std::size_t stride = 1;
  if (fit < 1.0) {
    stride = std::max<std::size_t>(sources.size(), 1);
  } else if (static_cast<double>(sources.size()) > fit) {
    stride = static_cast<std::size_t>(std::ceil(static_cast<double>(sources.size()) / fit));
  }
  std::vector<VertexId> kept;
  for (std::size_t i = 0; i < sources.size(); i += stride) kept.push_back(sources[i]);
  if (stride_out) *stride_out = stride;
  return archive_from_table(table, kept);
}

json phi_profile(const Mesh& mesh, const MetricDomain& domain, const FrameTable& table,
                 const ExperimentConfig& c) {
  const auto& frame = *table.frame();
  for (VertexId p : sample_interior(mesh, 10, 0.1, c.seed + 4)) {
    RegularWindow w;
    try {
      w = frame_window(mesh, domain, table, p, window_options(c));
    } catch (const std::exception&) {
      continue;
    }
    if (w.boundary_samples.size() < 5) continue;
    const auto idx = window_sample_indices(table, w);
    const std::size_t z = idx[idx.size() / 2];
    const Polyline path = descent_path(mesh, table.column(z), mesh.vertices[p]);
    if (path.points.size() < 3) continue;
    const Vec2 x = path.points[path.points.size() / 2];
    const auto dx = table.row_at(mesh, x);
    const PhiFunction phi = phi_function(table.frame(), table.row(p), dx.data(), z);
    const double delta = c.delta_max > 0.0 ? c.delta_max : 2.0 * frame.max_spacing;
    const auto m = geodesic_membership(phi, w, delta);
    std::vector<std::size_t> loop;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      if (frame.loops[i] == frame.loops[z]) loop.push_back(i);
    }
    std::sort(loop.begin(), loop.end(),
              [&](std::size_t a, std::size_t b) { return frame.arc_positions[a] < frame.arc_positions[b]; });
    json arc = json::array(), val = json::array();
    for (std::size_t i : loop) {
      arc.push_back(frame.arc_positions[i]);
      val.push_back(phi.values[i]);
    }
    return json{{"p", {mesh.vertices[p].x(), mesh.vertices[p].y()}},
                {"x", {x.x(), x.y()}},
                {"z", {frame.points[z].x(), frame.points[z].y()}},
                {"arc", std::move(arc)},
                {"phi", std::move(val)},
                {"z_arc", frame.arc_positions[z]},
                {"argmax_arc", frame.arc_positions[m.argmax]},
                {"member", m.member}};
  }
  return json();
}

LemmaResult verify_lemma(const std::string& lemma, const Mesh& mesh, const MetricDomain& domain,
                         const FrameTable& table, const ExperimentConfig& c) {
  LemmaResult r;
  if (lemma == "nearest") {
    const auto n = verify_nearest(mesh, table, static_cast<std::size_t>(c.nearest_points), c.seed + 2);
    r.report = to_json(n);
    r.checks.push_back(make_check("nearest.agreement", n.agreement(), ">=", 1.0));
    r.checks.push_back(make_check("nearest.points", double(n.points), ">=", double(std::min(c.nearest_points, 500))));
  } else if (lemma == "segment") {
    const auto m = verify_membership(mesh, domain, table, membership_options(c));
    r.report = to_json(m);
    r.report["phi_profile"] = phi_profile(mesh, domain, table, c);
    r.checks.push_back(make_check("segment.precision", m.precision, ">=", 0.95));
    r.checks.push_back(make_check("segment.recall", m.recall, ">=", 0.95));
    r.checks.push_back(make_check("segment.triples", double(m.triples), ">=",
                                  double(std::min(c.membership_triples, 500))));
  } else if (lemma == "dphi") {
    const auto d = verify_dphi(mesh, domain, table, dphi_options(c));
    r.report = to_json(d);
    r.checks.push_back(make_check("dphi.fraction_within_tolerance", d.fraction, ">=", 0.9));
  } else {
    throw ConfigError("unknown lemma '" + lemma + "' (nearest, segment, dphi)");
  }
  return r;
}

RunOutcome run_scenario(const ExperimentConfig& c, const std::string& out_dir, std::ostream& log) {
  c.validate();
  RunOutcome outcome;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const double spacing = c.effective_frame_spacing();
  std::string stage = "generate";
  std::vector<Check> all_checks;
  json summary{{"config", to_json(c)}};

  auto finish_stage = [&](const std::vector<Check>& checks, const Timer& t) {
    log << "[" << stage << "] " << std::fixed << std::setprecision(1) << t.seconds() << " s\n";
    log.unsetf(std::ios::floatfield);
    log_checks(log, checks);
    all_checks.insert(all_checks.end(), checks.begin(), checks.end());
    json stage_checks = json::array();
    for (const auto& ch : checks) stage_checks.push_back(to_json(ch));
    summary["stages"][stage] = {{"passed", all_passed(checks)}, {"checks", stage_checks}};
    if (outcome.failed_stage.empty()) {
      if (const Check* f = first_failure(checks)) {
        outcome.failed_stage = stage;
        outcome.message = f->name;
      }
    }
  };

  try {
    // generate
    Timer t_gen;
    const MetricDomain domain = make_scenario(c.scenario);
    const std::string twin_name = c.scenario + "+twist";
    const std::string control_name = control_scenario(c.scenario);
    const Mesh mesh = build_mesh(domain, c.h, c.stencil_radius);
    write_file(dir / "mesh.json", mesh_to_json(mesh), &outcome.artifacts);
    std::vector<Check> gen_checks;
    gen_checks.push_back(make_check("generate.components", connected_components(mesh), "<=", 1.0));
    finish_stage(gen_checks, t_gen);
    const FramePtr frame = make_frame(mesh, spacing);

    // ddf
    stage = "ddf";
    Timer t_ddf;
    std::vector<Check> ddf_checks;
    json ddf_report{{"stage", "ddf"}, {"scenario", c.scenario}, {"scheme", "graph"}, {"frame", frame_json(*frame)}};
    json nearest_report;
    std::vector<Check> nearest_checks;
    {
      const FrameTable graph = FrameTable::compute(mesh, frame, Scheme::graph);
      const auto sources = source_grid(mesh, c.source_spacing);
      std::size_t stride = 1;
      const DDFArchive archive = capped_archive(graph, sources, c.archive_limit_mb, &stride);
      const std::string path = (dir / "data_graph.ddf1").string();
      write_archive_file(path, archive);
      outcome.artifacts.push_back(path);
      ddf_report["archive"] = archive_json(path, archive, sources.size(), stride, c.archive_limit_mb);
      const auto suite = metric_suite(mesh, graph, sources, static_cast<std::size_t>(c.metric_pairs),
                                      static_cast<std::size_t>(c.metric_pairs), 40, c.seed);
      ddf_report["metric_suite"] = to_json(suite);
      const auto profile = bilipschitz_profile(mesh, graph, 400, 0.2, c.seed + 1);
      double lo = 2.0, hi = 0.0;
      for (const auto& s : profile) {
        lo = std::min(lo, s.ratio);
        hi = std::max(hi, s.ratio);
      }
      ddf_report["bilipschitz"] = {{"pairs", profile.size()}, {"scale", 0.2}, {"min_ratio", profile.empty() ? 0.0 : lo},
                                   {"max_ratio", hi}};
      ddf_checks.push_back(make_check("ddf.cocycle_failures", double(suite.cocycle_failures + suite.diagonal_failures +
                                                                      suite.antisymmetry_failures), "<=", 0.0));
      ddf_checks.push_back(make_check("ddf.triangle_violations", double(suite.triangle_violations), "<=", 0.0));
      ddf_checks.push_back(make_check("ddf.symmetry_violations", double(suite.symmetry_violations), "<=", 0.0));
      ddf_checks.push_back(make_check("ddf.lipschitz_violations", double(suite.lipschitz_violations), "<=", 0.0));
      ddf_checks.push_back(make_check("ddf.max_lipschitz_ratio", hi, "<=", 2.0));
      auto nl = verify_lemma("nearest", mesh, domain, graph, c);
      nearest_report = std::move(nl.report);
      nearest_checks = std::move(nl.checks);
    }
    ddf_report["checks"] = to_json(ddf_checks);
    write_file(dir / "ddf.json", dump(ddf_report), &outcome.artifacts);
    finish_stage(ddf_checks, t_ddf);

    // verify
    stage = "verify";
    Timer t_ver;
    std::vector<Check> ver_checks = nearest_checks;
    json ver_report{{"stage", "verify"}, {"scenario", c.scenario}, {"scheme", "upwind"}, {"frame", frame_json(*frame)}};
    ver_report["nearest"] = nearest_report;
    ver_report["nearest"]["scheme"] = "graph";
    const FrameTable table_a = FrameTable::compute(mesh, frame, Scheme::upwind);
    for (const std::string lemma : {"segment", "dphi"}) {
      auto lr = verify_lemma(lemma, mesh, domain, table_a, c);
      ver_report[lemma] = std::move(lr.report);
      ver_checks.insert(ver_checks.end(), lr.checks.begin(), lr.checks.end());
    }
    if (c.scenario == "annulus") {
      const auto o = annulus_oracle(mesh, Vec2(-0.8, 0.0), Vec2(0.8, 0.0), Scheme::upwind);
      ver_report["oracle"] = to_json(o);
      ver_checks.push_back(make_check("oracle.relative_error", o.relative_error, "<=", 0.01));
    }
    ver_report["checks"] = to_json(ver_checks);
    write_file(dir / "verify.json", dump(ver_report), &outcome.artifacts);
    if (!ver_report["segment"]["phi_profile"].is_null()) {
      write_file(dir / "phi_profile.svg", phi_svg(ver_report["segment"]["phi_profile"]), &outcome.artifacts);
    }
    finish_stage(ver_checks, t_ver);

    // reconstruct
    stage = "reconstruct";
    Timer t_rec;
    std::vector<Check> rec_checks;
    const PipelineOptions popt = pipeline_options(c);
    {
      std::size_t stride = 1;
      const auto sources = source_grid(mesh, c.source_spacing);
      const DDFArchive a = capped_archive(table_a, sources, c.archive_limit_mb, &stride);
      write_archive_file((dir / "data_a.ddf1").string(), a);
      outcome.artifacts.push_back((dir / "data_a.ddf1").string());
    }
    json cert{{"stage", "reconstruct"}, {"scenario", c.scenario}, {"gauge_scenario", twin_name},
              {"control_scenario", control_name}};
    double baseline = 0.0;
    {
      const MetricDomain twin = make_scenario(twin_name);
      const GaugeMap gauge = scenario_gauge(twin_name);
      const Mesh mesh_b = build_mesh(twin, c.h, c.stencil_radius);
      write_file(dir / "mesh_twist.json", mesh_to_json(mesh_b), &outcome.artifacts);
      const FrameTable table_b = FrameTable::compute(mesh_b, make_frame(mesh_b, spacing), Scheme::upwind);
      std::size_t stride = 1;
      const DDFArchive b = capped_archive(table_b, source_grid(mesh_b, c.source_spacing), c.archive_limit_mb, &stride);
      write_archive_file((dir / "data_twist.ddf1").string(), b);
      outcome.artifacts.push_back((dir / "data_twist.ddf1").string());
      Correspondence corr;
      const auto rep = run_pipeline(mesh, table_a, mesh_b, table_b, &gauge, popt, &corr);
      cert["gauge_pair"] = to_json(rep, &corr);
      cert["gauge_pair"]["gauge"] = gauge.name;
      baseline = rep.median_sup_defect;
      rec_checks.push_back(make_check("gauge.within_2h_fraction", rep.within_fraction, ">=", 0.98));
      rec_checks.push_back(make_check("gauge.boundary_defect", rep.boundary_defect, "<=", rep.boundary_tolerance));
      rec_checks.push_back(make_check("gauge.geodesic_image_fraction", rep.geodesic.fraction, ">=", 0.95));
      rec_checks.push_back(make_check("gauge.certificate_coverage", rep.certificate.coverage, ">=",
                                      popt.certificate.min_coverage));
      rec_checks.push_back(make_check("gauge.lambda_pass_fraction", rep.certificate.lambda_pass_fraction, ">=",
                                      popt.certificate.lambda_fraction));
      rec_checks.push_back(make_check("gauge.max_distance_defect", rep.certificate.max_distance_defect, "<=",
                                      rep.certificate.distance_tolerance));
      write_file(dir / "lambda_gauge.svg",
                 lambda_histogram("lambda, gauge pair", probe_lambdas(rep.certificate), c.lambda_tolerance),
                 &outcome.artifacts);
    }
    {
      const MetricDomain control = make_scenario(control_name);
      const Mesh mesh_c = build_mesh(control, c.h, c.stencil_radius);
      write_file(dir / "mesh_control.json", mesh_to_json(mesh_c), &outcome.artifacts);
      const FrameTable table_c = FrameTable::compute(mesh_c, make_frame(mesh_c, spacing), Scheme::upwind);
      std::size_t stride = 1;
      const DDFArchive cc = capped_archive(table_c, source_grid(mesh_c, c.source_spacing), c.archive_limit_mb, &stride);
      write_archive_file((dir / "data_control.ddf1").string(), cc);
      outcome.artifacts.push_back((dir / "data_control.ddf1").string());
      const auto rep = run_pipeline(mesh, table_a, mesh_c, table_c, nullptr, popt);
      cert["control"] = to_json(rep);
      rec_checks.push_back(make_check("control.certificate_passed", rep.certificate.passed ? 1.0 : 0.0, "<=", 0.0));
      rec_checks.push_back(make_check("control.median_lambda_spread", rep.certificate.median_spread, ">",
                                      c.control_spread));
      rec_checks.push_back(make_check("control.sup_defect_over_baseline",
                                      baseline > 0.0 ? rep.median_sup_defect / baseline
                                                     : std::numeric_limits<double>::infinity(),
                                      ">=", c.control_defect_factor));
      write_file(dir / "lambda_control.svg",
                 lambda_histogram("lambda, negative control", probe_lambdas(rep.certificate), c.lambda_tolerance),
                 &outcome.artifacts);
    }
    cert["checks"] = to_json(rec_checks);
    cert["verdict"] = all_passed(rec_checks);
    write_file(dir / "cert.json", dump(cert), &outcome.artifacts);
    finish_stage(rec_checks, t_rec);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.failed_stage = stage;
    outcome.message = e.what();
    log << "[" << stage << "] error: " << e.what() << '\n';
    return outcome;
  }

  summary["passed"] = all_passed(all_checks);
  write_file(dir / "summary.json", dump(summary), &outcome.artifacts);
  outcome.exit_code = all_passed(all_checks) ? 0 : 1;
  if (outcome.exit_code != 0) log << "failed at stage " << outcome.failed_stage << ": " << outcome.message << '\n';
  return outcome;
}

nlohmann::json reconstruct_files(const std::string& data_a, const std::string& data_b,
                                 const std::string& mesh_a_path, const std::string& mesh_b_path,
                                 const ExperimentConfig& c, std::ostream& log) {
  const bool dense = !mesh_a_path.empty() && !mesh_b_path.empty();
  std::optional<Mesh> mesh_a, mesh_b;
  if (dense) {
    mesh_a = read_mesh_file(mesh_a_path);
    mesh_b = read_mesh_file(mesh_b_path);
  }
  auto load = [](const std::string& path, const Mesh* mesh) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_archive(in, mesh);
  };
  const DDFArchive a = load(data_a, dense ? &*mesh_a : nullptr);
  const DDFArchive b = load(data_b, dense ? &*mesh_b : nullptr);
  MatchOptions mo;
  mo.ratio_level = c.ratio_level;
  const Correspondence corr = build_phi(a, b, mo, dense ? &*mesh_a : nullptr, dense ? &*mesh_b : nullptr);
  json pairs = json::array();
  for (const auto& p : corr.pairs) {
    json pj{{"source", p.source},
            {"match", p.match},
            {"sup_defect", number(p.sup_defect)},
            {"second_best", number(p.second_best)},
            {"ambiguous", p.ambiguous},
            {"mutual", p.mutual},
            {"boundary", p.boundary}};
    if (dense) {
      pj["x"] = {p.x.x(), p.x.y()};
      pj["x_prime"] = {p.x_prime.x(), p.x_prime.y()};
    }
    pairs.push_back(std::move(pj));
  }
  json out{{"stage", "reconstruct"},
           {"mode", dense ? "archive+dense" : "archive"},
           {"data_a", fs::path(data_a).filename().string()},
           {"data_b", fs::path(data_b).filename().string()},
           {"pairs", std::move(pairs)},
           {"median_sup_defect", number(corr.median_sup_defect)},
           {"ambiguous", corr.ambiguous},
           {"non_mutual", corr.non_mutual},
           {"thresholds", {{"ratio_level", c.ratio_level}}}};
  std::vector<Check> checks;
  bool has_boundary = std::any_of(corr.pairs.begin(), corr.pairs.end(), [](const PhiPair& p) { return p.boundary; });
  if (dense && has_boundary) {
    out["boundary_defect"] = number(corr.boundary_defect);
    checks.push_back(make_check("boundary_defect", corr.boundary_defect, "<=", 2.0 * a.frame->max_spacing));
  }
  if (dense) {
    log << "computing upwind tables on the archive frame\n";
    const FrameTable ta = FrameTable::compute(*mesh_a, a.frame, Scheme::upwind);
    const FrameTable tb = FrameTable::compute(*mesh_b, b.frame, Scheme::upwind);
    std::optional<GaugeMap> gauge;
    const std::string& na = mesh_a->metric_name;
    const std::string& nb = mesh_b->metric_name;
    if (nb == na + "+twist" || nb == na + "+rotate") gauge = scenario_gauge(nb);
    if (na == nb) gauge = identity_gauge();
    const PipelineOptions popt = pipeline_options(c);
    const auto rep = run_pipeline(*mesh_a, ta, *mesh_b, tb, gauge ? &*gauge : nullptr, popt);
    out["dense"] = to_json(rep);
    if (gauge) {
      out["dense"]["gauge"] = gauge->name;
      checks.push_back(make_check("gauge.within_2h_fraction", rep.within_fraction, ">=", 0.98));
    }
    checks.push_back(make_check("dense.boundary_defect", rep.boundary_defect, "<=", rep.boundary_tolerance));
    checks.push_back(make_check("geodesic_image_fraction", rep.geodesic.fraction, ">=", 0.95));
    checks.push_back(make_check("certificate.coverage", rep.certificate.coverage, ">=", popt.certificate.min_coverage));
    checks.push_back(make_check("certificate.lambda_pass_fraction", rep.certificate.lambda_pass_fraction, ">=",
                                popt.certificate.lambda_fraction));
    checks.push_back(make_check("certificate.max_distance_defect", rep.certificate.max_distance_defect, "<=",
                                rep.certificate.distance_tolerance));
  }
  out["checks"] = to_json(checks);
  out["verdict"] = all_passed(checks);
  return out;
}

int render_reports(const std::vector<std::string>& paths, const std::string& svg_dir, std::ostream& out,
                   std::ostream& err) {
  int status = 0;
  if (!svg_dir.empty()) fs::create_directories(svg_dir);
  for (const auto& path : paths) {
    out << "== " << path << '\n';
    try {
      if (fs::path(path).extension() == ".ddf1") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        const DDFArchive a = read_archive(in);
        std::size_t bad = 0;
        for (const auto& m : a.matrices) {
          const auto rep = check_cocycle(m);
          bad += !(rep.zero_diagonal && rep.antisymmetric && rep.cocycle);
        }
        out << "DDF1 archive: frame " << a.frame->size() << " samples, " << a.sources.size() << " sources\n";
        out << "  " << check_line(make_check("archive.cocycle_failures", double(bad), "<=", 0.0)) << '\n';
        continue;
      }
      json j;
      try {
        j = json::parse(read_text_file(path));
      } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object()) throw std::runtime_error("not a report object");
      if (j.contains("stages")) {
        for (const auto& [name, st] : j["stages"].items()) {
          out << "[" << name << "]\n";
          for (const auto& ch : st.at("checks")) {
            out << "  " << (ch.at("passed").get<bool>() ? "PASS" : "FAIL") << "  " << ch.at("name").get<std::string>()
                << '\n';
          }
        }
        out << "overall: " << (j.value("passed", false) ? "PASS" : "FAIL") << '\n';
      } else if (j.contains("checks")) {
        out << "stage: " << j.value("stage", std::string("?")) << '\n';
        for (const auto& ch : j["checks"]) {
          Check c;
          c.name = ch.at("name").get<std::string>();
          c.value = ch.at("value").is_null() ? std::nan("") : ch.at("value").get<double>();
          c.relation = ch.at("relation").get<std::string>();
          c.threshold = ch.at("threshold").is_null() ? std::nan("") : ch.at("threshold").get<double>();
          c.passed = ch.at("passed").get<bool>();
          out << "  " << check_line(c) << '\n';
        }
      } else {
        throw std::runtime_error("no checks in report");
      }
      if (svg_dir.empty()) continue;
      const std::string stem = fs::path(path).stem().string();
      auto lambdas = [](const json& cert) {
        std::vector<double> v;
        for (const auto& p : cert.at("probes")) {
          if (p.value("covered", false)) v.push_back(p.at("lambda_median").get<double>());
        }
        return v;
      };
      const double tol = 0.02;
      if (j.contains("gauge_pair")) {
        const auto f = fs::path(svg_dir) / (stem + "_lambda_gauge.svg");
        write_text_file(f.string(), lambda_histogram("lambda, gauge pair", lambdas(j["gauge_pair"]["certificate"]), tol));
        out << "  wrote " << f.string() << '\n';
      }
      if (j.contains("control")) {
        const auto f = fs::path(svg_dir) / (stem + "_lambda_control.svg");
        write_text_file(f.string(), lambda_histogram("lambda, negative control", lambdas(j["control"]["certificate"]), tol));
        out << "  wrote " << f.string() << '\n';
      }
      if (j.contains("certificate")) {
        const auto f = fs::path(svg_dir) / (stem + "_lambda.svg");
        write_text_file(f.string(), lambda_histogram("lambda", lambdas(j["certificate"]), tol));
        out << "  wrote " << f.string() << '\n';
      }
      const json* profile = nullptr;
      if (j.contains("segment") && j["segment"].contains("phi_profile") && !j["segment"]["phi_profile"].is_null()) {
        profile = &j["segment"]["phi_profile"];
      } else if (j.contains("phi_profile") && !j["phi_profile"].is_null()) {
        profile = &j["phi_profile"];
      }
      if (profile) {
        const auto f = fs::path(svg_dir) / (stem + "_phi.svg");
        write_text_file(f.string(), phi_svg(*profile));
        out << "  wrote " << f.string() << '\n';
      }
    } catch (const std::exception& e) {
      err << path << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

}  // namespace ddrlab::harness
