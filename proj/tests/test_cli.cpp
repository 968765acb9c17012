#include "doctest.h"

#include "plateau/cli.hpp"
#include "plateau/config.hpp"
#include "plateau/io.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace plateau;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "plateau_cli_XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void put(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "plateau");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string without_timestamp(const std::string& text) {
  auto j = Json::parse(text);
  j.erase("metadata");
  return j.dump();
}

Polygon parse_polygon(const char* text) {
  std::istringstream is(text);
  return read_polygon(is);
}

const char* kCircle = "curve: {family: circle}\nschedule: [8, 16]\nepsilon: 0.1\nseed: 3\n";
const char* kTetra = "anchors 1 2 3 seed 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n";
const char* kSquare = "anchors 1 2 3 seed 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "curve:\n  family: perturbed_circle\n  amplitude: 0.1\n  frequency: 3\n"
      "schedule: [16, 32]\nepsilon: 0.05\nseed: 9\noutput: runs/x\n"
      "solver: {tol_energy: 1e-9, max_iters: 100, base_levels: 16}\nanalysis: {branch_tol: 1e-3}\n"
      "anchors: [0.1, 0.3, 0.6]\n");
  CHECK(cfg.curve.family == "perturbed_circle");
  CHECK(cfg.schedule == std::vector<std::size_t>{16, 32});
  CHECK(cfg.epsilon == 0.05);
  CHECK(cfg.seed == 9);
  CHECK(cfg.options.seed == 9);
  CHECK(cfg.output_dir == fs::path("runs/x"));
  CHECK(cfg.options.solver.tol_energy == 1e-9);
  CHECK(cfg.options.solver.max_iters == 100);
  CHECK(cfg.options.base_levels == 16);
  CHECK(cfg.options.branch.tol == 1e-3);
  CHECK(cfg.options.anchor_fractions[2] == 0.6);
  CHECK(total_curvature(make_curve(cfg.curve)) == doctest::Approx(7.23801890940564520969).epsilon(1e-10));

  const auto poly = parse_config("curve:\n  family: polygon\n  vertices: [[0,0,0],[1,0,0],[1,1,0],[0,1,0]]\n"
                                 "schedule: [4]\nseed: 1\n");
  CHECK(arc_length(make_curve(poly.curve)) == doctest::Approx(4.0));
}

TEST_CASE("config errors name the line and field") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text, "run.yaml");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("curve: {family: circle}\nschedule: [16, 8]\nseed: 1\n") ==
        "run.yaml:2: field 'schedule': schedule must be strictly increasing");
  CHECK(message("curve: {family: circle}\nschedule: [8]\n").find("field 'seed'") != std::string::npos);
  CHECK(message("curve: {family: circle}\nschedule: [8]\nseed: 1\nepsilon: -1\n") ==
        "run.yaml:4: field 'epsilon': must be positive");
  CHECK(message("curve: {family: spiral}\nschedule: [8]\nseed: 1\n").find("unknown family") != std::string::npos);
  CHECK(message("curve: {family: circle}\nschedule: [8]\nseed: 1\nsolver:\n  tolerance: 3\n") ==
        "run.yaml:5: field 'solver.tolerance': unknown key");
  CHECK(message("curve: {family: circle}\nschedule: [8]\nseed: 1\nsolver: {tol_energy: 0}\n")
            .find("solver.tol_energy") != std::string::npos);
  CHECK(message("curve: {family: circle, radius: -2}\nschedule: [8]\nseed: 1\n").find("field 'curve'") !=
        std::string::npos);
  CHECK(message("curve: [unclosed\n").rfind("run.yaml:", 0) == 0);
}

TEST_CASE("schedule lists") {
  CHECK(parse_schedule("8,16,32") == std::vector<std::size_t>{8, 16, 32});
  CHECK(parse_schedule("8 16") == std::vector<std::size_t>{8, 16});
  CHECK_THROWS_AS(parse_schedule("16,8"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("8,x"), ConfigError);
  CHECK_THROWS_AS(parse_schedule(""), ConfigError);
  CHECK_THROWS_AS(parse_schedule("2,8"), ConfigError);
}

TEST_CASE("OBJ and lift round trips are exact") {
  const auto sol = solve(parse_polygon(kTetra), build_mesh(10));
  std::istringstream obj(obj_text(sol.surface));
  const auto back = read_obj(obj);
  CHECK(back.values == sol.surface.values);
  CHECK(back.mesh->nodes() == sol.surface.mesh->nodes());
  CHECK(back.mesh->boundary_count() == sol.surface.mesh->boundary_count());
  CHECK(back.mesh->boundary_angles() == sol.surface.mesh->boundary_angles());

  std::istringstream lift(lift_text(sol.lift));
  const auto l = read_lift(lift);
  CHECK(l.node_params == sol.lift.node_params);
  CHECK(l.length == sol.lift.length);

  const auto again = solution_from_lift(sol.polygon, back, l);
  CHECK(again.vertex_preimages == sol.vertex_preimages);
  CHECK(again.diagnostics.energy == doctest::Approx(sol.diagnostics.energy).epsilon(1e-12));

  std::istringstream broken("v 0 0 0\nvt 0 0\nf 1/1 2/2\n");
  CHECK_THROWS_AS(read_obj(broken), ParameterError);
  std::istringstream bad_lift("lift 4 3\n0.5\n");
  CHECK_THROWS_AS(read_lift(bad_lift), ParameterError);
}

TEST_CASE("atomic writes leave no temporaries") {
  TempDir dir;
  write_atomic(dir / "a/b.txt", "one");
  write_atomic(dir / "a/b.txt", "two");
  CHECK(slurp(dir / "a/b.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "a/b.txt.tmp"));
}

TEST_CASE("document text isolates the timestamp") {
  const auto doc = Json::parse(document_text({{"x", 1.0}}));
  CHECK(doc["metadata"].size() == 1);
  CHECK(doc["metadata"].contains("timestamp"));
  CHECK(doc["x"] == 1.0);
}

TEST_CASE("approximate writes one polygon per stage") {
  TempDir dir;
  put(dir / "c.yaml", kCircle);
  CHECK(cli({"approximate", "--config", (dir / "c.yaml").string(), "--out", (dir / "o").string()}) == kExitOk);
  CHECK(fs::exists(dir / "o/polygon_n8.txt"));
  CHECK(fs::exists(dir / "o/polygon_n16.txt"));
  const auto rep = Json::parse(slurp(dir / "o/approximation.json"));
  CHECK(rep["stages"].size() == 2);
  std::ifstream p(dir / "o/polygon_n16.txt");
  CHECK(read_polygon(p).size() == 16);

  put(dir / "dec.yaml", "curve: {family: circle}\nschedule: [16, 8]\nseed: 1\n");
  CHECK(cli({"approximate", "--config", (dir / "dec.yaml").string()}) == kExitConfig);
  put(dir / "noseed.yaml", "curve: {family: circle}\nschedule: [8, 16]\n");
  std::string err;
  CHECK(cli({"approximate", "--config", (dir / "noseed.yaml").string()}, &err) == kExitConfig);
  CHECK(err.find("seed") != std::string::npos);
  CHECK(cli({"approximate", "--config", (dir / "c.yaml").string(), "--stages", "16,8"}) == kExitConfig);
}

TEST_CASE("solve and analyze") {
  TempDir dir;
  put(dir / "tetra.txt", kTetra);
  put(dir / "square.txt", kSquare);
  CHECK(cli({"solve", "--polygon", (dir / "tetra.txt").string(), "--levels", "16", "--out", (dir / "t").string()}) ==
        kExitOk);
  const auto t = Json::parse(slurp(dir / "t/solve.json"));
  CHECK(t["curvature"]["sauvigny_margin"].get<double>() > 0.0);
  CHECK(t["diagnostics"]["converged"] == true);
  CHECK(fs::exists(dir / "t/surface.obj"));

  CHECK(cli({"analyze", "--surface", (dir / "t/surface.obj").string(), "--lift", (dir / "t/lift.txt").string(),
             "--polygon", (dir / "tetra.txt").string(), "--out", (dir / "ta").string()}) == kExitOk);
  const auto ta = Json::parse(slurp(dir / "ta/analysis.json"));
  CHECK(ta["curvature"]["total_abs_curvature"] == t["curvature"]["total_abs_curvature"]);
  CHECK(ta["vertex_preimages"] == t["vertex_preimages"]);

  CHECK(cli({"solve", "--polygon", (dir / "square.txt").string(), "--out", (dir / "s").string()}) == kExitOk);
  const auto s = Json::parse(slurp(dir / "s/solve.json"));
  CHECK(s["curvature"]["total_abs_curvature"].get<double>() < 1e-3);

  put(dir / "bad.txt", "anchors 1 2 3 seed 0\n1 1 1\n1 -1\n");
  CHECK(cli({"solve", "--polygon", (dir / "bad.txt").string(), "--out", (dir / "b").string()}) == kExitConfig);
  CHECK(cli({"solve", "--polygon", (dir / "missing.txt").string()}) == kExitConfig);

  put(dir / "cap.yaml", "curve: {family: circle}\nschedule: [8]\nseed: 1\nsolver: {max_iters: 1}\n");
  CHECK(cli({"solve", "--config", (dir / "cap.yaml").string(), "--polygon", (dir / "tetra.txt").string(), "--out",
             (dir / "cap").string()}) == kExitNumerical);
  const auto cap = Json::parse(slurp(dir / "cap/solve.json"));
  CHECK(cap["diagnostics"]["converged"] == false);
}

TEST_CASE("converge writes reports deterministically") {
  TempDir dir;
  put(dir / "pc.yaml", "curve: {family: perturbed_circle, amplitude: 0.1, frequency: 3}\nschedule: [16, 32]\n"
                       "epsilon: 0.1\nseed: 5\n");
  for (const char* o : {"r1", "r2"})
    CHECK(cli({"converge", "--config", (dir / "pc.yaml").string(), "--out", (dir / o).string()}) == kExitOk);
  for (const char* f : {"table.tsv", "limit.obj", "stage_0_n16.obj", "stage_1_n32.lift.txt"})
    CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
  CHECK(without_timestamp(slurp(dir / "r1/report.json")) == without_timestamp(slurp(dir / "r2/report.json")));
  const auto rep = Json::parse(slurp(dir / "r1/report.json"));
  CHECK(rep["stages"].size() == 2);
  CHECK(rep["trace_distances"].size() == 1);
  CHECK(rep["failure"].is_null());

  CHECK(cli({"analyze", "--surface", (dir / "r1/stage_1_n32.obj").string(), "--lift",
             (dir / "r1/stage_1_n32.lift.txt").string(), "--polygon", (dir / "r1/stage_1_n32.polygon.txt").string(),
             "--out", (dir / "a").string()}) == kExitOk);

  CHECK(cli({"converge", "--config", (dir / "pc.yaml").string(), "--seed", "6", "--out", (dir / "r3").string()}) ==
        kExitOk);
  CHECK(slurp(dir / "r1/stage_0_n16.polygon.txt") != slurp(dir / "r3/stage_0_n16.polygon.txt"));

  put(dir / "coil.yaml", "curve: {family: perturbed_circle, amplitude: 0.3, frequency: 5}\nschedule: [16]\nseed: 1\n");
  std::string err;
  CHECK(cli({"converge", "--config", (dir / "coil.yaml").string(), "--out", (dir / "c").string()}, &err) ==
        kExitHypothesis);
  CHECK(err.find("total curvature 20.54") != std::string::npos);

  CHECK(cli({"converge"}) == kExitConfig);
  CHECK(cli({"frobnicate"}) == kExitConfig);
}
