#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "config.hpp"
#include "ddrlab/io.hpp"
#include "runner.hpp"

using namespace ddrlab;
using namespace ddrlab::harness;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;

// Flags that override config file values when given.
struct Overrides {
  std::optional<std::string> scenario;
  std::optional<double> h;
  std::optional<int> stencil_radius;
  std::optional<double> frame_spacing;
  std::optional<double> source_spacing;
  std::optional<double> tau_cut;
  std::optional<double> theta_min_deg;
  std::optional<double> delta_max;
  std::optional<double> lambda_tolerance;
  std::optional<double> ratio_level;
  std::optional<std::uint64_t> seed;
  std::optional<int> probes;
  std::optional<double> archive_limit_mb;
  std::string config_file;

  void add_to(CLI::App* app, bool full) {
    app->add_option("--config", config_file, "JSON experiment config; flags override its values");
    app->add_option("--scenario", scenario, "disk | annulus | dumbbell | conformal-disk");
    app->add_option("--h", h, "lattice spacing");
    app->add_option("--stencil-radius", stencil_radius, "Chebyshev stencil radius");
    app->add_option("--frame-spacing", frame_spacing, "boundary frame spacing (default 2h)");
    app->add_option("--seed", seed, "seed for random probes");
    app->add_option("--tau-cut", tau_cut, "cut detection threshold (fraction of h)");
    app->add_option("--theta-min", theta_min_deg, "transversality threshold in degrees");
    app->add_option("--delta-max", delta_max, "argmax proximity for membership (default 2 frame spacings)");
    if (!full) return;
    app->add_option("--source-spacing", source_spacing, "source grid spacing");
    app->add_option("--lambda-tolerance", lambda_tolerance, "allowed |lambda - 1|");
    app->add_option("--ratio-level", ratio_level, "ratio-test level for ambiguous matches");
    app->add_option("--probes", probes, "certificate probe count");
    app->add_option("--archive-limit-mb", archive_limit_mb, "cap on each written DDF1 archive");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config_file.empty()) {
      json j;
      try {
        j = json::parse(read_text_file(config_file));
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      c = config_from_json(j, c);
    }
    if (scenario) c.scenario = *scenario;
    if (h) c.h = *h;
    if (stencil_radius) c.stencil_radius = *stencil_radius;
    if (frame_spacing) c.frame_spacing = *frame_spacing;
    if (source_spacing) c.source_spacing = *source_spacing;
    if (tau_cut) c.tau_cut = *tau_cut;
    if (theta_min_deg) c.theta_min_deg = *theta_min_deg;
    if (delta_max) c.delta_max = *delta_max;
    if (lambda_tolerance) c.lambda_tolerance = *lambda_tolerance;
    if (ratio_level) c.ratio_level = *ratio_level;
    if (seed) c.seed = *seed;
    if (probes) c.probes = *probes;
    if (archive_limit_mb) c.archive_limit_mb = *archive_limit_mb;
    c.validate();
    return c;
  }
};

Scheme parse_scheme(const std::string& s) {
  try {
    return scheme_from_string(s);
  } catch (const std::exception&) {
    throw ConfigError("unknown scheme '" + s + "' (graph, upwind)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance difference representations: meshes, DDF archives, lemma checks and rigidity certificates"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Overrides gen_o;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "build a mesh and write it as JSON");
  gen_o.add_to(gen, false);
  gen->add_option("--out", gen_out, "mesh JSON path")->required();

  std::string ddf_mesh, ddf_sources = "grid:0.05", ddf_out, ddf_scheme = "graph";
  double ddf_spacing = 0.0, ddf_limit = 0.0;
  auto* ddfc = app.add_subcommand("ddf", "write a DDF1 archive for sources of a mesh");
  ddfc->add_option("--mesh", ddf_mesh, "mesh JSON")->required();
  ddfc->add_option("--sources", ddf_sources, "grid:<spacing> | all | boundary | interior:<count>");
  ddfc->add_option("--frame-spacing", ddf_spacing, "boundary frame spacing (default 2h)");
  ddfc->add_option("--scheme", ddf_scheme, "graph | upwind");
  ddfc->add_option("--limit-mb", ddf_limit, "thin sources to keep the archive under this size (0 = no cap)");
  ddfc->add_option("--out", ddf_out, "DDF1 path")->required();

  Overrides ver_o;
  std::string ver_lemma, ver_report;
  auto* ver = app.add_subcommand("verify", "check one lemma criterion on a scenario");
  ver_o.add_to(ver, false);
  ver->add_option("--lemma", ver_lemma, "nearest | segment | dphi")->required();
  ver->add_option("--report", ver_report, "report JSON path")->required();

  Overrides rec_o;
  std::string rec_a, rec_b, rec_ma, rec_mb, rec_out;
  auto* rec = app.add_subcommand("reconstruct", "match two DDF1 archives and certify the correspondence");
  rec_o.add_to(rec, true);
  rec->add_option("--data-a", rec_a, "DDF1 archive of M")->required();
  rec->add_option("--data-b", rec_b, "DDF1 archive of M'")->required();
  rec->add_option("--mesh-a", rec_ma, "mesh JSON of M (enables the dense pipeline)");
  rec->add_option("--mesh-b", rec_mb, "mesh JSON of M'");
  rec->add_option("--out", rec_out, "certificate JSON path")->required();

  Overrides run_o;
  std::string run_out;
  auto* run = app.add_subcommand("run", "generate, ddf, verify and reconstruct one scenario");
  run_o.add_to(run, true);
  run->add_option("--out", run_out, "artifact directory (default run_<scenario>)");

  std::vector<std::string> rep_paths;
  std::string rep_svg;
  auto* rep = app.add_subcommand("report", "pass/fail table and SVG plots from artifacts");
  rep->add_option("paths", rep_paths, "report JSON or DDF1 files");
  rep->add_option("--svg-dir", rep_svg, "directory for SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) {
      const ExperimentConfig c = gen_o.resolve();
      const Mesh mesh = build_mesh(make_scenario(c.scenario), c.h, c.stencil_radius);
      write_mesh_file(gen_out, mesh);
      std::cout << "mesh: " << mesh.size() << " vertices, " << mesh.stencil_edges().size() << " edges -> " << gen_out
                << '\n';
      return 0;
    }
    if (*ddfc) {
      const Mesh mesh = read_mesh_file(ddf_mesh);
      const double spacing = ddf_spacing > 0.0 ? ddf_spacing : 2.0 * mesh.h;
      if (spacing > 2.0 * mesh.h + 1e-15) throw ConfigError("--frame-spacing must be at most 2h");
      if (ddf_limit < 0.0) throw ConfigError("--limit-mb must be nonnegative");
      const Scheme scheme = parse_scheme(ddf_scheme);
      const auto sources = parse_sources(mesh, ddf_sources);
      const FrameTable table = FrameTable::compute(mesh, make_frame(mesh, spacing), scheme);
      std::size_t stride = 1;
      const DDFArchive archive = ddf_limit > 0.0 ? capped_archive(table, sources, ddf_limit, &stride)
                                                 : archive_from_table(table, sources);
      std::ofstream out(ddf_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open " + ddf_out);
      write_archive(out, archive);
      std::cout << "archive: " << archive.sources.size() << " sources (stride " << stride << "), frame "
                << table.k() << " samples, scheme " << to_string(scheme) << " -> " << ddf_out << '\n';
      return 0;
    }
    if (*ver) {
      const ExperimentConfig c = ver_o.resolve();
      if (ver_lemma != "nearest" && ver_lemma != "segment" && ver_lemma != "dphi") {
        throw ConfigError("unknown lemma '" + ver_lemma + "' (nearest, segment, dphi)");
      }
      const MetricDomain domain = make_scenario(c.scenario);
      const Mesh mesh = build_mesh(domain, c.h, c.stencil_radius);
      const Scheme scheme = ver_lemma == "nearest" ? Scheme::graph : Scheme::upwind;
      const FrameTable table = FrameTable::compute(mesh, make_frame(mesh, c.effective_frame_spacing()), scheme);
      auto r = verify_lemma(ver_lemma, mesh, domain, table, c);
      json out{{"stage", "verify"}, {"lemma", ver_lemma}, {"scheme", to_string(scheme)}, {"config", to_json(c)}};
      out[ver_lemma] = std::move(r.report);
      out["checks"] = to_json(r.checks);
      write_text_file(ver_report, dump(out));
      for (const auto& ch : r.checks) std::cout << (ch.passed ? "PASS  " : "FAIL  ") << ch.name << '\n';
      return all_passed(r.checks) ? 0 : 1;
    }
    if (*rec) {
      const ExperimentConfig c = rec_o.resolve();
      if (rec_ma.empty() != rec_mb.empty()) throw ConfigError("--mesh-a and --mesh-b go together");
      json out = reconstruct_files(rec_a, rec_b, rec_ma, rec_mb, c, std::cerr);
      out["config"] = to_json(c);
      write_text_file(rec_out, dump(out));
      std::cout << "pairs: " << out["pairs"].size() << ", median sup defect " << out["median_sup_defect"]
                << ", verdict " << (out["verdict"].get<bool>() ? "pass" : "fail") << " -> " << rec_out << '\n';
      return 0;
    }
    if (*run) {
      const ExperimentConfig c = run_o.resolve();
      const std::string dir = run_out.empty() ? "run_" + c.scenario : run_out;
      const RunOutcome r = run_scenario(c, dir, std::cout);
      if (r.exit_code == 0) {
        std::cout << "all checks passed; artifacts in " << dir << '\n';
      } else {
        std::cerr << "stage " << r.failed_stage << " failed: " << r.message << '\n';
      }
      return r.exit_code;
    }
    if (*rep) {
      if (rep_paths.empty()) {
        std::cerr << rep->help();
        return kUsage;
      }
      return render_reports(rep_paths, rep_svg, std::cout, std::cerr);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
