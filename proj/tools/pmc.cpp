// Command-line front end: solve, exhaustion, willmore, growth, check-h, identities.
//
// Exit codes: 0 success, 2 computation failed, 3 inequality violated beyond
// tolerance, 64 usage error, 66 missing or unreadable input.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "lpmc/lpmc.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 2;
constexpr int kViolation = 3;
constexpr int kUsage = 64;
constexpr int kNoInput = 66;

using lpmc::json;

/// "a:b" (unit steps), "a:b:h" or "r1,r2,...".
std::vector<double> parse_radii(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto c = spec.find(':', pos);
      parts.push_back(lpmc::parse_real(spec.substr(pos, c - pos), "radii"));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) throw lpmc::UsageError("radii: expected a:b or a:b:h");
    const double h = parts.size() == 3 ? parts[2] : 1.0;
    if (!(h > 0.0) || !(parts[1] >= parts[0])) throw lpmc::UsageError("radii: need a <= b and h > 0");
    const int n = static_cast<int>(std::floor((parts[1] - parts[0]) / h + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(parts[0] + k * h);
  } else {
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto c = spec.find(',', pos);
      out.push_back(lpmc::parse_real(spec.substr(pos, c - pos), "radii"));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
  }
  return out;
}

/// "NsxNth".
lpmc::PolarGrid parse_grid(const std::string& spec, double s_max) {
  const auto x = spec.find('x');
  if (x == std::string::npos) throw lpmc::UsageError("grid: expected NsxNth, got '" + spec + "'");
  int ns = 0, nt = 0;
  try {
    std::size_t a = 0, b = 0;
    ns = std::stoi(spec.substr(0, x), &a);
    nt = std::stoi(spec.substr(x + 1), &b);
    if (a != x || b != spec.size() - x - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw lpmc::UsageError("grid: expected NsxNth, got '" + spec + "'");
  }
  lpmc::PolarGrid g(ns, nt, s_max);
  g.validate();
  return g;
}

struct SurfaceInput {
  std::string surface;
  std::string field;
  int m = 2;

  void check() const {
    if (surface.empty() == field.empty()) throw lpmc::UsageError("give exactly one of --surface or --field");
    if (m != 2 && m != 3) throw lpmc::UsageError("--m must be 2 or 3");
  }
};

void require_equal(bool same, const std::string& what) {
  if (!same) throw lpmc::DomainError(what + ": read-back differs from the written data");
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string H;
  double s_max = 3.0;
  std::string grid = "64x128";
  double boundary = 0.0;
  double tol = 1e-10;
  int max_iters = 50;
  double theta_min = 1e-3;
  std::string init;
  std::string out = "solution.field";
  std::string report = "solve_report.json";
  bool json_field = false;
  bool estimate_error = false;
};

int cmd_solve(const SolveArgs& a) {
  const auto H = lpmc::parse_curvature(a.H);
  if (!(a.s_max > 0.0)) throw lpmc::UsageError("--smax must be positive");
  if (!(a.tol > 0.0) || a.max_iters < 1 || !(a.theta_min > 0.0 && a.theta_min < 1.0))
    throw lpmc::UsageError("invalid solver tolerances");
  const lpmc::PolarGrid g = parse_grid(a.grid, a.s_max);
  lpmc::SolveOptions opt;
  opt.tol = a.tol;
  opt.max_iters = a.max_iters;
  opt.theta_min = a.theta_min;
  opt.boundary = a.boundary;
  lpmc::ScalarField u;
  lpmc::SolveReport rep;
  if (!a.init.empty()) {
    lpmc::ScalarField guess = lpmc::read_field(a.init);
    if (!(guess.grid.n_s == g.n_s && guess.grid.n_th == g.n_th && guess.grid.s_max == g.s_max))
      throw lpmc::UsageError("--init field grid does not match --grid/--smax");
    std::tie(u, rep) = lpmc::solve_dirichlet(H, std::move(guess), opt);
  } else if (a.estimate_error) {
    std::tie(u, rep) = lpmc::solve_with_error_estimate(H, g, opt);
  } else {
    std::tie(u, rep) = lpmc::solve_dirichlet(H, g, opt);
  }
  lpmc::write_field(a.out, u, a.json_field);
  require_equal(lpmc::read_field(a.out).values == u.values, a.out);
  json j = rep;
  j["curvature"] = H.name;
  j["grid"] = {{"n_s", g.n_s}, {"n_th", g.n_th}, {"s_max", g.s_max}};
  lpmc::write_json(a.report, j);
  require_equal(lpmc::read_json(a.report).get<lpmc::SolveReport>().iterations == rep.iterations, a.report);
  std::cout << j.dump(2) << "\n";
  return rep.converged ? kOk : kFailed;
}

// ---------------------------------------------------------------------------

struct ExhaustionArgs {
  std::string H;
  std::string radii = "1:6";
  double inner = 1.0;
  int per_unit = 32;
  int n_th = 128;
  double boundary = 0.0;
  std::string out_dir;
  std::string report = "exhaustion_report.json";
};

int cmd_exhaustion(const ExhaustionArgs& a) {
  const auto H = lpmc::parse_curvature(a.H);
  lpmc::ExhaustionOptions opt;
  opt.inner = a.inner;
  opt.per_unit = a.per_unit;
  opt.n_th = a.n_th;
  opt.solve.boundary = a.boundary;
  const auto rep = lpmc::exhaustion(H, parse_radii(a.radii), opt);
  json j = rep;
  j["curvature"] = H.name;
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    json files = json::array();
    for (std::size_t k = 0; k < rep.fields.size(); ++k) {
      const std::string path = (std::filesystem::path(a.out_dir) / ("u_" + std::to_string(k) + ".field")).string();
      lpmc::write_field(path, rep.fields[k]);
      require_equal(lpmc::read_field(path).values == rep.fields[k].values, path);
      files.push_back(path);
    }
    j["fields"] = files;
  }
  lpmc::write_json(a.report, j);
  require_equal(lpmc::read_json(a.report) == j, a.report);
  std::cout << j.dump(2) << "\n";
  return rep.failed_index ? kFailed : kOk;
}

// ---------------------------------------------------------------------------

struct WillmoreArgs {
  SurfaceInput in;
  double R = 50.0;
  int n_r = 1024;
  int n_ang = 24;
  std::string report = "willmore_report.json";
};

int cmd_willmore(const WillmoreArgs& a) {
  a.in.check();
  if (!(a.R > 0.0)) throw lpmc::UsageError("--R must be positive");
  lpmc::WillmoreReport rep;
  if (!a.in.surface.empty()) {
    rep = lpmc::willmore_integral(lpmc::parse_surface(a.in.surface, a.in.m), a.R, lpmc::BallQuadrature{a.n_r, a.n_ang});
  } else {
    rep = lpmc::willmore_integral(lpmc::read_cartesian_field(a.in.field), a.R);
  }
  const json j = rep;
  lpmc::write_json(a.report, j);
  require_equal(json(lpmc::read_json(a.report).get<lpmc::WillmoreReport>()) == j, a.report);
  std::cout << j.dump(2) << "\n";
  return rep.bound_holds() ? kOk : kViolation;
}

// ---------------------------------------------------------------------------

struct GrowthArgs {
  SurfaceInput in;
  double p = 2.0;
  std::string radii = "1:8";
  std::string csv = "growth.csv";
  std::string report = "growth_report.json";
};

int cmd_growth(const GrowthArgs& a) {
  a.in.check();
  const auto radii = parse_radii(a.radii);
  lpmc::GrowthSeries gs;
  if (!a.in.surface.empty()) gs = lpmc::lp_growth(lpmc::parse_surface(a.in.surface, a.in.m), a.p, radii);
  else gs = lpmc::lp_growth(lpmc::read_cartesian_field(a.in.field), a.p, radii);
  const std::string csv = lpmc::growth_csv(gs);
  lpmc::write_text(a.csv, csv);
  const auto rows = lpmc::parse_growth_csv(lpmc::read_text(a.csv));
  bool same = rows.size() == gs.radii.size();
  for (std::size_t k = 0; same && k < rows.size(); ++k)
    same = rows[k][0] == gs.radii[k] && rows[k][1] == gs.lp_norms[k] && rows[k][2] == gs.gauss_image_measure[k];
  require_equal(same, a.csv);
  const json j = gs;
  lpmc::write_json(a.report, j);
  require_equal(json(lpmc::read_json(a.report).get<lpmc::GrowthSeries>()) == j, a.report);
  std::cout << csv;
  return gs.nondecreasing && gs.lower_bound_ok && gs.holder_ok ? kOk : kViolation;
}

// ---------------------------------------------------------------------------

struct CheckHArgs {
  std::string H;
  lpmc::SamplingSpec sampling;
  double l = 0.0;
  double L = 0.0;
  std::string report = "hypotheses.json";
};

int cmd_check_h(const CheckHArgs& a) {
  const auto H = lpmc::parse_curvature(a.H);
  const auto rep = lpmc::check_hypotheses(H, a.sampling);
  json j = rep;
  j["curvature"] = H.name;
  if (a.l > 0.0 || a.L > 0.0) {
    j["certified_pair"] = {{"l", a.l}, {"L", a.L}, {"h3", lpmc::certify_h3(H, a.l, a.L, a.sampling)}};
  }
  lpmc::write_json(a.report, j);
  require_equal(lpmc::read_json(a.report) == j, a.report);
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct IdentitiesArgs {
  bool skip_solver = false;
  std::string report = "identities.json";
};

int cmd_identities(const IdentitiesArgs& a) {
  auto suite = lpmc::kernel_identity_suite();
  if (!a.skip_solver) suite.series.push_back(lpmc::poincare_refinement(lpmc::offcenter_bump_curvature()));
  json series = json::array();
  for (const auto& s : suite.series)
    series.push_back({{"name", s.name}, {"steps", s.steps}, {"residuals", s.residuals}, {"orders", s.orders}});
  const json j = {{"series", series}, {"min_order", suite.min_order()}, {"threshold", suite.threshold}, {"passed", suite.passed()}};
  lpmc::write_json(a.report, j);
  require_equal(lpmc::read_json(a.report) == j, a.report);
  std::cout << j.dump(2) << "\n";
  return suite.passed() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed mean curvature graphs in Minkowski space"};
  app.set_config("--config", "", "key = value file with one [section] per command");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: PMC_THREADS or 1)")->check(CLI::NonNegativeNumber);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Dirichlet problem on a geodesic ball");
  solve->add_option("--H", sa.H, "curvature: const:c, inv, rational[:a=,w=,cx=,cy=], table:path")->required();
  solve->add_option("--smax", sa.s_max, "ball radius");
  solve->add_option("--grid", sa.grid, "NsxNth");
  solve->add_option("--boundary", sa.boundary, "Dirichlet value");
  solve->add_option("--tol", sa.tol, "residual tolerance");
  solve->add_option("--max-iters", sa.max_iters, "Newton iterations");
  solve->add_option("--theta-min", sa.theta_min, "spacelike margin");
  solve->add_option("--init", sa.init, "initial guess field");
  solve->add_option("--out", sa.out, "solution field path");
  solve->add_option("--report", sa.report, "report JSON path");
  solve->add_flag("--json-field", sa.json_field, "write the field as JSON");
  solve->add_flag("--estimate-error", sa.estimate_error, "Richardson estimate against the half grid");

  ExhaustionArgs ea;
  auto* exh = app.add_subcommand("exhaustion", "solutions on increasing balls");
  exh->add_option("--H", ea.H, "curvature spec")->required();
  exh->add_option("--radii", ea.radii, "a:b, a:b:h or comma list");
  exh->add_option("--inner", ea.inner, "radius of the compact ball for deltas");
  exh->add_option("--per-unit", ea.per_unit, "radial nodes per unit radius");
  exh->add_option("--nth", ea.n_th, "angular nodes");
  exh->add_option("--boundary", ea.boundary, "Dirichlet value");
  exh->add_option("--out-dir", ea.out_dir, "directory for per-radius fields");
  exh->add_option("--report", ea.report, "report JSON path");

  WillmoreArgs wa;
  auto* will = app.add_subcommand("willmore", "Willmore-type functional");
  will->add_option("--surface", wa.in.surface, "hyperboloid[:l=], perturbed[:eps=,width=,l=], saddle[...], affine[:a=,c=]");
  will->add_option("--field", wa.in.field, "Cartesian field file");
  will->add_option("--m", wa.in.m, "dimension (2 or 3)");
  will->add_option("--R", wa.R, "truncation radius");
  will->add_option("--nr", wa.n_r, "radial Simpson panels");
  will->add_option("--nang", wa.n_ang, "angular nodes");
  will->add_option("--report", wa.report, "report JSON path");

  GrowthArgs ga;
  auto* growth = app.add_subcommand("growth", "L^p growth of the mean curvature over geodesic balls");
  growth->add_option("--surface", ga.in.surface, "surface spec");
  growth->add_option("--field", ga.in.field, "Cartesian field file");
  growth->add_option("--m", ga.in.m, "dimension (2 or 3)");
  growth->add_option("--p", ga.p, "exponent p >= 1");
  growth->add_option("--radii", ga.radii, "a:b, a:b:h or comma list");
  growth->add_option("--csv", ga.csv, "series CSV path");
  growth->add_option("--report", ga.report, "report JSON path");

  CheckHArgs ha;
  auto* check = app.add_subcommand("check-h", "sampled hypothesis checks");
  check->add_option("--H", ha.H, "curvature spec")->required();
  check->add_option("--nt", ha.sampling.n_t, "samples in t");
  check->add_option("--ns", ha.sampling.n_s, "radial samples");
  check->add_option("--ntheta", ha.sampling.n_theta, "angular samples");
  check->add_option("--sample-smax", ha.sampling.s_max, "sampled hyperbolic radius");
  check->add_option("--nell", ha.sampling.n_ell, "search grid size for l and L");
  check->add_option("--l", ha.l, "certify this l");
  check->add_option("--L", ha.L, "certify this L");
  check->add_option("--report", ha.report, "report JSON path");

  IdentitiesArgs ia;
  auto* ids = app.add_subcommand("identities", "identity residual convergence suites");
  ids->add_flag("--skip-solver", ia.skip_solver, "omit the Poincare refinement suite");
  ids->add_option("--report", ia.report, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return kNoInput;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (threads > 0) lpmc::set_thread_count(threads);
    if (*solve) return cmd_solve(sa);
    if (*exh) return cmd_exhaustion(ea);
    if (*will) return cmd_willmore(wa);
    if (*growth) return cmd_growth(ga);
    if (*check) return cmd_check_h(ha);
    if (*ids) return cmd_identities(ia);
  } catch (const lpmc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const lpmc::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kNoInput;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
