#include "plateau/cli.hpp"

#include "plateau/config.hpp"
#include "plateau/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace plateau {

namespace {

namespace fs = std::filesystem;

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string stages;
  std::string polygon;
  std::string surface;
  std::string lift;
  int levels = 0;
};

RunConfig resolve(const Args& a, bool config_required) {
  RunConfig cfg;
  if (!a.config.empty()) {
    cfg = load_config(a.config);
  } else if (config_required) {
    throw ConfigError("--config is required");
  } else {
    cfg.seed = 1;
  }
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.options.seed = *a.seed;
    cfg.options.branch.seed = *a.seed;
  }
  if (!a.stages.empty()) cfg.schedule = parse_schedule(a.stages);
  if (!a.out.empty()) cfg.output_dir = a.out;
  return cfg;
}

Polygon load_polygon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read polygon file " + path);
  try {
    return read_polygon(in);
  } catch (const ParameterError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string stage_name(std::size_t i, std::size_t n) {
  return "stage_" + std::to_string(i) + "_n" + std::to_string(n);
}

int cmd_approximate(const Args& a, std::ostream& out) {
  const auto cfg = resolve(a, true);
  const auto curve = make_curve(cfg.curve);
  const double period = curve.period();
  const auto& fr = cfg.options.anchor_fractions;
  Json stages = Json::array();
  bool all_pass = true;
  for (const std::size_t n : cfg.schedule) {
    const Polygon inscribed = inscribe(curve, n, {fr[0] * period, fr[1] * period, fr[2] * period});
    const double delta = cfg.options.perturb_scale * polygon_length(inscribed) / static_cast<double>(inscribed.size());
    const auto perturbed = perturb_to_generic(inscribed, delta, cfg.seed + n);
    const auto rep = verify_approximation(curve, perturbed.polygon, cfg.epsilon);
    const std::string file = "polygon_n" + std::to_string(n) + ".txt";
    std::ostringstream os;
    write_polygon(os, perturbed.polygon);
    write_atomic(cfg.output_dir / file, os.str());
    stages.push_back({{"n", n}, {"file", file}, {"perturb_rounds", perturbed.rounds}, {"report", to_json(rep)}});
    all_pass = all_pass && rep.pass;
    out << "n=" << n << " length_gap=" << rep.length_gap << " curvature_gap=" << rep.curvature_gap
        << " pass=" << (rep.pass ? "yes" : "no") << '\n';
  }
  write_atomic(cfg.output_dir / "approximation.json",
               document_text({{"epsilon", cfg.epsilon}, {"seed", cfg.seed}, {"stages", stages}}));
  return all_pass ? kExitOk : kExitNumerical;
}

int write_solution(const PlateauSolution& sol, const RunConfig& cfg, const std::string& stem, std::ostream& out) {
  const auto br = detect_branch_points(sol, complex_derivative(sol.surface), cfg.options.branch);
  const auto cr = gauss_bonnet_check(sol, br);
  const double iso = isoperimetric_check(sol);
  write_atomic(cfg.output_dir / (stem + ".json"), document_text(solve_json(sol, br, cr, iso)));
  out << "energy=" << sol.diagnostics.energy << " conformality=" << sol.diagnostics.conformality
      << " total_abs_curvature=" << cr.total_abs_curvature << " sauvigny_margin=" << cr.sauvigny_margin
      << " converged=" << (sol.diagnostics.converged ? "yes" : "no") << '\n';
  return sol.diagnostics.converged ? kExitOk : kExitNumerical;
}

int cmd_solve(const Args& a, std::ostream& out) {
  const auto cfg = resolve(a, false);
  const Polygon p = load_polygon(a.polygon);
  const int levels = a.levels > 0 ? a.levels : stage_levels(p.size(), cfg.options.base_levels);
  const auto sol = solve(p, build_mesh(levels), cfg.options.solver);
  write_atomic(cfg.output_dir / "surface.obj", obj_text(sol.surface));
  write_atomic(cfg.output_dir / "lift.txt", lift_text(sol.lift));
  return write_solution(sol, cfg, "solve", out);
}

int cmd_analyze(const Args& a, std::ostream& out) {
  const auto cfg = resolve(a, false);
  const Polygon p = load_polygon(a.polygon);
  std::ifstream obj(a.surface);
  if (!obj) throw ConfigError("cannot read surface file " + a.surface);
  std::ifstream lift(a.lift);
  if (!lift) throw ConfigError("cannot read lift file " + a.lift);
  DiscSurface x;
  BoundaryLift l;
  try {
    x = read_obj(obj);
    l = read_lift(lift);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  const auto sol = solution_from_lift(p, std::move(x), std::move(l));
  return write_solution(sol, cfg, "analysis", out);
}

int cmd_converge(const Args& a, std::ostream& out) {
  const auto cfg = resolve(a, true);
  const auto curve = make_curve(cfg.curve);
  const auto rep = run_sequence(curve, cfg.schedule, cfg.epsilon, cfg.options);
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto& st = rep.stages[i];
    // Stage surfaces are stored normalized, on the mesh of that stage.
    const auto mesh = build_mesh(st.levels);
    const auto surface = harmonic_extension(mesh, st.trace.values);
    write_atomic(cfg.output_dir / (stage_name(i, st.n) + ".obj"), obj_text(surface));
    write_atomic(cfg.output_dir / (stage_name(i, st.n) + ".lift.txt"), lift_text(st.lift.lift));
    std::ostringstream poly;
    write_polygon(poly, st.polygon);
    write_atomic(cfg.output_dir / (stage_name(i, st.n) + ".polygon.txt"), poly.str());
  }
  if (rep.has_limit) write_atomic(cfg.output_dir / "limit.obj", obj_text(rep.limit_surface));
  Json body = to_json(rep);
  body["seed"] = cfg.seed;
  write_atomic(cfg.output_dir / "report.json", document_text(std::move(body)));
  write_atomic(cfg.output_dir / "table.tsv", plot_table(rep));
  out << plot_table(rep);
  if (!rep.failure.empty()) {
    out << "run truncated: " << rep.failure << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polygonal Plateau solver, curvature analysis and convergence runs"};
  app.require_subcommand(1);
  Args a;
  auto common = [&](CLI::App* c, bool stages) {
    c->add_option("--config", a.config, "YAML run configuration");
    c->add_option("--out", a.out, "output directory (overrides the config)");
    c->add_option("--seed", a.seed, "seed (overrides the config)");
    if (stages) c->add_option("--stages", a.stages, "comma separated schedule (overrides the config)");
  };
  auto* approx = app.add_subcommand("approximate", "inscribe, perturb and verify polygons for each stage");
  common(approx, true);
  auto* sol = app.add_subcommand("solve", "solve the Plateau problem for a polygon file");
  common(sol, false);
  sol->add_option("--polygon", a.polygon, "polygon file")->required();
  sol->add_option("--levels", a.levels, "radial mesh levels (default from the polygon size)")->check(CLI::Range(3, 400));
  auto* conv = app.add_subcommand("converge", "run the refinement pipeline and write the convergence report");
  common(conv, true);
  auto* an = app.add_subcommand("analyze", "re-run the analysis on a stored surface and lift");
  common(an, false);
  an->add_option("--surface", a.surface, "OBJ surface written by solve or converge")->required();
  an->add_option("--lift", a.lift, "lift file matching the surface")->required();
  an->add_option("--polygon", a.polygon, "polygon file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*approx) return cmd_approximate(a, out);
    if (*sol) return cmd_solve(a, out);
    if (*conv) return cmd_converge(a, out);
    return cmd_analyze(a, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HypothesisError& e) {
    err << "refused: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const ParameterError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GeometryError& e) {
    err << "invalid geometry: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace plateau
