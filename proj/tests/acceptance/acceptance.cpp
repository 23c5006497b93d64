// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Heavy tables are built one scenario at a time to keep memory bounded.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "ddrlab/verification.hpp"

using namespace ddrlab;

namespace {

// Pinned tolerances. A probe passes the lambda test when its median is
// within kLambdaTolerance of 1 and its spread is at most kSpreadTolerance.
constexpr int kStencilRadius = 3;
constexpr double kOracleRelError = 0.01;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kSuiteTriples = 1000;
constexpr std::size_t kSuitePairs = 1000;
constexpr std::size_t kSuiteFields = 40;
constexpr double kSuiteSourceSpacing = 0.05;
constexpr std::size_t kNearestPoints = 500;
constexpr std::size_t kMembershipTriples = 600;
constexpr std::size_t kMembershipMinTriples = 500;
constexpr double kMembershipLevel = 0.95;
constexpr double kDphiTolerance = 0.05;
constexpr double kDphiFraction = 0.90;
constexpr double kGaugeFraction = 0.98;
constexpr double kGeodesicFraction = 0.95;
constexpr double kLambdaTolerance = 0.02;
constexpr double kLambdaFraction = 0.90;
constexpr double kSpreadTolerance = 0.03;
constexpr double kDistanceScale = 0.3;
constexpr double kControlSpread = 0.1;
constexpr double kControlFactor = 10.0;
constexpr double kSuiteSeconds = 900.0;
constexpr int kExactInvH = 100;
const std::vector<int> kLadder{50, 100, 200};

using Clock = std::chrono::steady_clock;
const Clock::time_point kStart = Clock::now();

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void note(const char* fmt, auto... args) {
  std::printf("  [%6.1f s] ", since(kStart));
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

struct Verdict {
  int id;
  std::string name;
  bool passed;
  std::string detail;
};
std::vector<Verdict> verdicts;

void verdict(int id, const std::string& name, bool passed, const std::string& detail) {
  verdicts.push_back({id, name, passed, detail});
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool non_increasing(const std::vector<double>& v, double slack = 0.0) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

std::string series(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " > ") + fmt("%.4g", x);
  return s;
}

struct Model {
  MetricDomain domain;
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<FrameTable> table;
};

Model build(const std::string& scenario, int inv_h, Scheme scheme, const FramePtr& frame = nullptr) {
  const auto t = Clock::now();
  Model m;
  m.domain = make_scenario(scenario);
  m.mesh = std::make_unique<Mesh>(build_mesh(m.domain, 1.0 / inv_h, kStencilRadius));
  const FramePtr f = frame ? frame : make_frame(*m.mesh, 2.0 / inv_h);
  m.table = std::make_unique<FrameTable>(FrameTable::compute(*m.mesh, f, scheme));
  note("%s 1/%d %s: %zu vertices, %zu samples, %.1f s", scenario.c_str(), inv_h, to_string(scheme).c_str(),
       m.mesh->size(), f->size(), since(t));
  return m;
}

PipelineOptions pipeline_options() {
  PipelineOptions o;
  o.certificate.lambda_tolerance = kLambdaTolerance;
  o.certificate.lambda_fraction = kLambdaFraction;
  o.certificate.spread_tolerance = kSpreadTolerance;
  o.certificate.distance_scale = kDistanceScale;
  return o;
}

struct LemmaRow {
  std::string scenario;
  MembershipReport membership;
  DphiCheckReport dphi;
};

LemmaRow lemma_checks(const std::string& scenario, const Model& m) {
  MembershipOptions mo;
  mo.triples = kMembershipTriples;
  DphiCheckOptions dopt;
  dopt.tolerance = kDphiTolerance;
  LemmaRow r{scenario, verify_membership(*m.mesh, m.domain, *m.table, mo), verify_dphi(*m.mesh, m.domain, *m.table, dopt)};
  note("%s membership: %zu triples, precision %.4f, recall %.4f; dphi: %zu pairs, fraction %.4f, median %.2e",
       scenario.c_str(), r.membership.triples, r.membership.precision, r.membership.recall, r.dphi.pairs,
       r.dphi.fraction, r.dphi.median_error);
  return r;
}

PipelineReport gauge_pair(const std::string& scenario, const Model& a, int inv_h) {
  const Model b = build(scenario + "+twist", inv_h, Scheme::upwind, a.table->frame());
  const GaugeMap gauge = scenario_gauge(scenario + "+twist");
  const auto t = Clock::now();
  PipelineReport r = run_pipeline(*a.mesh, *a.table, *b.mesh, *b.table, &gauge, pipeline_options());
  const auto& c = r.certificate;
  note("%s gauge 1/%d: within 2h %.4f, boundary %.4g/%.4g, geodesic %.4f, lambda pass %.4f, "
       "median spread %.4f, max spread %.4f, distance defect %.3gh, median sup %.4g, %.1f s",
       scenario.c_str(), inv_h, r.within_fraction, r.boundary_defect, r.boundary_tolerance, r.geodesic.fraction,
       c.lambda_pass_fraction, c.median_spread, c.max_spread, c.max_distance_defect * inv_h, r.median_sup_defect,
       since(t));
  return r;
}

bool gauge_ok(const PipelineReport& r) {
  const auto& c = r.certificate;
  return r.within_fraction >= kGaugeFraction && r.boundary_defect <= r.boundary_tolerance &&
         r.geodesic.fraction >= kGeodesicFraction && c.coverage_ok && c.lambda_pass_fraction >= kLambdaFraction &&
         c.max_distance_defect <= c.distance_tolerance;
}

}  // namespace

int main() {
  std::printf("acceptance run, stencil radius %d\n", kStencilRadius);

  // Criterion 1, plus its convergence ladder.
  std::vector<double> oracle_errors;
  double oracle_seconds = 0.0;
  {
    const Vec2 a(-0.8, 0.0), b(0.8, 0.0);
    for (int inv : kLadder) {
      const auto t = Clock::now();
      const Mesh mesh = build_mesh(make_scenario("annulus"), 1.0 / inv, kStencilRadius);
      const OracleComparison o = annulus_oracle(mesh, a, b, Scheme::upwind);
      const double s = since(t);
      note("annulus oracle 1/%d: computed %.6f, analytic %.6f, relative error %.3e, %.2f s", inv, o.computed,
           o.analytic, o.relative_error, s);
      oracle_errors.push_back(o.relative_error);
      if (inv == 200) oracle_seconds = s;
    }
    const double e = oracle_errors.back();
    verdict(1, "distance oracle", e <= kOracleRelError && oracle_seconds <= kOracleSeconds,
            fmt("relative error %.3e <= %.2f at 1/200, %.2f s <= %.0f s", e, kOracleRelError, oracle_seconds,
                kOracleSeconds));
  }

  // Criteria 2 and 3 on exact graph tables.
  {
    bool exact = true, nearest = true;
    std::string exact_detail, nearest_detail;
    for (const auto& name : scenario_catalog()) {
      const Model m = build(name, kExactInvH, Scheme::graph);
      const auto sources = source_grid(*m.mesh, kSuiteSourceSpacing);
      const MetricSuiteReport s = metric_suite(*m.mesh, *m.table, sources, kSuiteTriples, kSuitePairs, kSuiteFields, 17);
      note("%s exact suite: %zu matrices, cocycle %zu, diagonal %zu, antisymmetry %zu, triangle %zu/%zu, "
           "symmetry %zu, lipschitz %zu/%zu (max ratio %.4f)",
           name.c_str(), s.matrices, s.cocycle_failures, s.diagonal_failures, s.antisymmetry_failures,
           s.triangle_violations, s.triples, s.symmetry_violations, s.lipschitz_violations, s.lipschitz_pairs,
           s.max_lipschitz_ratio);
      exact = exact && s.passed() && s.triples >= kSuiteTriples && s.lipschitz_pairs >= kSuitePairs;
      exact_detail += fmt("%s%s %zu/%zu/%zu", exact_detail.empty() ? "" : ", ", name.c_str(),
                          s.cocycle_failures + s.diagonal_failures + s.antisymmetry_failures, s.triangle_violations,
                          s.lipschitz_violations);
      const NearestReport n = verify_nearest(*m.mesh, *m.table, kNearestPoints, 19);
      note("%s nearest: %zu points, %zu exact, %zu ties, %zu disagree", name.c_str(), n.points, n.exact, n.ties,
           n.disagree);
      nearest = nearest && n.points >= kNearestPoints && n.disagree == 0;
      nearest_detail += fmt("%s%s %zu/%zu", nearest_detail.empty() ? "" : ", ", name.c_str(), n.exact + n.ties,
                            n.points);
    }
    verdict(2, "exact metric-space suite", exact,
            "matrix/triangle/lipschitz failures: " + exact_detail + fmt(" (graph, 1/%d)", kExactInvH));
    verdict(3, "nearest-point criterion", nearest, "agreement: " + nearest_detail);
  }

  // Criteria 4 to 7 on upwind tables, coarse to fine.
  std::vector<LemmaRow> lemma_200;
  std::vector<double> dphi_disk, dphi_annulus;
  std::vector<PipelineReport> gauge_disk, gauge_annulus;
  PipelineReport control;
  for (int inv : kLadder) {
    {
      const Model disk = build("disk", inv, Scheme::upwind);
      const LemmaRow row = lemma_checks("disk", disk);
      dphi_disk.push_back(row.dphi.median_error);
      if (inv == 200) lemma_200.push_back(row);
      gauge_disk.push_back(gauge_pair("disk", disk, inv));
      if (inv == 200) {
        const Model conformal = build("conformal-disk", inv, Scheme::upwind, disk.table->frame());
        const auto t = Clock::now();
        control = run_pipeline(*disk.mesh, *disk.table, *conformal.mesh, *conformal.table, nullptr, pipeline_options());
        note("control disk vs conformal-disk: certificate %s, median spread %.4f, median sup %.4g, %.1f s",
             control.certificate.passed ? "passed" : "failed", control.certificate.median_spread,
             control.median_sup_defect, since(t));
        lemma_200.push_back(lemma_checks("conformal-disk", conformal));
      }
    }
    {
      const Model annulus = build("annulus", inv, Scheme::upwind);
      const LemmaRow row = lemma_checks("annulus", annulus);
      dphi_annulus.push_back(row.dphi.median_error);
      if (inv == 200) lemma_200.push_back(row);
      gauge_annulus.push_back(gauge_pair("annulus", annulus, inv));
    }
    if (inv == 200) {
      const Model dumbbell = build("dumbbell", inv, Scheme::upwind);
      lemma_200.push_back(lemma_checks("dumbbell", dumbbell));
    }
  }

  {
    bool ok = true;
    std::string detail;
    for (const auto& r : lemma_200) {
      const auto& m = r.membership;
      ok = ok && m.triples >= kMembershipMinTriples && m.precision >= kMembershipLevel && m.recall >= kMembershipLevel;
      detail += fmt("%s%s %.3f/%.3f (%zu)", detail.empty() ? "" : ", ", r.scenario.c_str(), m.precision, m.recall,
                    m.triples);
    }
    verdict(4, "geodesic membership", ok, "precision/recall (triples) at 1/200: " + detail);
  }
  {
    bool ok = true;
    std::string detail;
    for (const auto& r : lemma_200) {
      ok = ok && r.dphi.pairs > 0 && r.dphi.fraction >= kDphiFraction;
      detail += fmt("%s%s %.3f (%zu)", detail.empty() ? "" : ", ", r.scenario.c_str(), r.dphi.fraction, r.dphi.pairs);
    }
    verdict(5, "first-order derivative", ok, fmt("fraction within %.2f (pairs) at 1/200: ", kDphiTolerance) + detail);
  }
  const PipelineReport& disk_200 = gauge_disk.back();
  const PipelineReport& annulus_200 = gauge_annulus.back();
  verdict(6, "gauge-pair pipeline", gauge_ok(disk_200) && gauge_ok(annulus_200),
          fmt("disk: within %.3f, lambda %.3f, max spread %.4f, geodesic %.3f; annulus: within %.3f, lambda %.3f, "
              "max spread %.4f, geodesic %.3f",
              disk_200.within_fraction, disk_200.certificate.lambda_pass_fraction, disk_200.certificate.max_spread,
              disk_200.geodesic.fraction, annulus_200.within_fraction, annulus_200.certificate.lambda_pass_fraction,
              annulus_200.certificate.max_spread, annulus_200.geodesic.fraction));
  {
    const double baseline = disk_200.median_sup_defect;
    const double ratio = baseline > 0.0 ? control.median_sup_defect / baseline : INFINITY;
    verdict(7, "negative control",
            !control.certificate.passed && control.certificate.median_spread > kControlSpread && ratio >= kControlFactor,
            fmt("certificate %s, median spread %.3f > %.1f, sup defect %.1fx baseline >= %.0fx",
                control.certificate.passed ? "passed" : "failed", control.certificate.median_spread, kControlSpread,
                ratio, kControlFactor));
  }
  {
    auto pick = [](const std::vector<PipelineReport>& v, auto f) {
      std::vector<double> out;
      for (const auto& r : v) out.push_back(f(r));
      return out;
    };
    const auto sup = [](const PipelineReport& r) { return r.median_sup_defect; };
    const auto bdef = [](const PipelineReport& r) { return r.boundary_defect; };
    const auto spread = [](const PipelineReport& r) { return r.certificate.median_spread; };
    struct Series {
      std::string name;
      std::vector<double> values;
    };
    const std::vector<Series> all{
        {"oracle error", oracle_errors},
        {"disk dphi median", dphi_disk},
        {"annulus dphi median", dphi_annulus},
        {"disk median sup", pick(gauge_disk, sup)},
        {"annulus median sup", pick(gauge_annulus, sup)},
        {"disk boundary defect", pick(gauge_disk, bdef)},
        {"annulus boundary defect", pick(gauge_annulus, bdef)},
        {"disk lambda spread", pick(gauge_disk, spread)},
        {"annulus lambda spread", pick(gauge_annulus, spread)},
    };
    bool ok = true;
    std::string detail, bad;
    for (const auto& s : all) {
      const bool mono = non_increasing(s.values);
      ok = ok && mono;
      note("convergence %s: %s%s", s.name.c_str(), series(s.values).c_str(), mono ? "" : "  (not monotone)");
      if (!mono) bad += (bad.empty() ? "" : ", ") + s.name;
    }
    const double total = since(kStart);
    ok = ok && total <= kSuiteSeconds;
    detail = fmt("%zu series over 1/50, 1/100, 1/200%s; %.0f s <= %.0f s", all.size(),
                 bad.empty() ? " all monotone" : (", not monotone: " + bad).c_str(), total, kSuiteSeconds);
    verdict(8, "convergence and budget", ok, detail);
  }

  bool all = true;
  std::printf("\n");
  for (const auto& v : verdicts) {
    std::printf("criterion %d %-26s %s  %s\n", v.id, v.name.c_str(), v.passed ? "PASS" : "FAIL", v.detail.c_str());
    all = all && v.passed;
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
