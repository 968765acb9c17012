#include "plateau/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plateau {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad(const std::string& what, std::size_t line) {
  throw ParameterError(what + " at line " + std::to_string(line));
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string obj_text(const DiscSurface& x) {
  std::ostringstream os;
  const auto& mesh = *x.mesh;
  for (const auto& v : x.values) os << "v " << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
  for (const auto& w : mesh.nodes()) os << "vt " << fmt(w.x()) << ' ' << fmt(w.y()) << '\n';
  for (const auto& t : mesh.triangles()) {
    os << 'f';
    for (int i : t) os << ' ' << i + 1 << '/' << i + 1;
    os << '\n';
  }
  return os.str();
}

DiscSurface read_obj(std::istream& is) {
  std::vector<Vec3> values;
  std::vector<Vec2> nodes;
  std::vector<Triangle> tris;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) bad("bad vertex", no);
      values.push_back(v);
    } else if (tag == "vt") {
      Vec2 w;
      if (!(ls >> w.x() >> w.y())) bad("bad texture coordinate", no);
      nodes.push_back(w);
    } else if (tag == "f") {
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        std::string ref;
        if (!(ls >> ref)) bad("face needs three corners", no);
        const auto slash = ref.find('/');
        const std::string a = ref.substr(0, slash);
        const std::string b = slash == std::string::npos ? a : ref.substr(slash + 1);
        if (a != b) bad("vertex and texture indices must agree", no);
        int idx = 0;
        try {
          idx = std::stoi(a);
        } catch (const std::exception&) {
          bad("bad face index", no);
        }
        if (idx < 1) bad("bad face index", no);
        t[k] = idx - 1;
      }
      std::string extra;
      if (ls >> extra) bad("only triangular faces are supported", no);
      tris.push_back(t);
    }
  }
  if (values.empty() || values.size() != nodes.size()) throw ParameterError("OBJ needs one vt per v");
  for (const auto& t : tris)
    for (int i : t)
      if (static_cast<std::size_t>(i) >= values.size()) throw ParameterError("face index out of range");
  DiscSurface s;
  s.mesh = std::make_shared<const DiscMesh>(std::move(nodes), std::move(tris));
  s.values = std::move(values);
  return s;
}

std::string lift_text(const BoundaryLift& lift) {
  std::ostringstream os;
  os << "lift " << fmt(lift.length) << ' ' << lift.node_params.size() << '\n';
  for (double s : lift.node_params) os << fmt(s) << '\n';
  return os.str();
}

BoundaryLift read_lift(std::istream& is) {
  std::string tag;
  BoundaryLift lift;
  std::size_t count = 0;
  if (!(is >> tag >> lift.length >> count) || tag != "lift") bad("bad lift header", 1);
  lift.node_params.resize(count);
  for (std::size_t j = 0; j < count; ++j)
    if (!(is >> lift.node_params[j])) bad("bad lift value", j + 2);
  return lift;
}

Json to_json(const Polygon& p) {
  Json v = Json::array();
  for (const auto& x : p.vertices) v.push_back(vec(x));
  return {{"vertices", v},
          {"anchors", p.anchors},
          {"seed", p.seed},
          {"length", polygon_length(p)},
          {"total_curvature", polygon_total_curvature(p)}};
}

Json to_json(const ApproximationReport& r) {
  return {{"curve_length", r.curve_length},
          {"polygon_length", r.polygon_length},
          {"length_gap", r.length_gap},
          {"curve_total_curvature", r.curve_total_curvature},
          {"polygon_total_curvature", r.polygon_total_curvature},
          {"curvature_gap", r.curvature_gap},
          {"sup_deviation", r.sup_deviation},
          {"genericity",
           {{"min_pair_angle", r.certificate.min_pair_angle},
            {"min_triple_volume", r.certificate.min_triple_volume},
            {"passes", r.certificate.passes}}},
          {"pass", r.pass}};
}

Json to_json(const SolverDiagnostics& d) {
  return {{"energy", d.energy},
          {"conformality", d.conformality},
          {"carrier_distance", d.carrier_distance},
          {"iterations", d.iterations},
          {"moves", d.moves},
          {"converged", d.converged},
          {"initial_energy", d.energy_history.empty() ? Json(nullptr) : Json(d.energy_history.front())}};
}

Json to_json(const BranchReport& br) {
  Json interior = Json::array();
  for (const auto& b : br.interior)
    interior.push_back({{"location", {b.location.x(), b.location.y()}},
                        {"order", optional_json(b.order)},
                        {"modulus", b.modulus},
                        {"near_boundary", b.near_boundary}});
  Json vertices = Json::array();
  for (const auto& v : br.vertices)
    vertices.push_back({{"vertex", v.vertex},
                        {"preimage", v.preimage},
                        {"exterior_angle", v.exterior_angle},
                        {"swept_angle", number_or_null(v.swept_angle)},
                        {"order", v.order},
                        {"rho", v.rho},
                        {"low_confidence", v.low_confidence}});
  return {{"interior", interior}, {"vertices", vertices}, {"total_order", optional_json(br.total_order)}};
}

Json to_json(const CurvatureReport& r) {
  return {{"total_abs_curvature", r.total_abs_curvature},
          {"total_order", optional_json(r.total_order)},
          {"gauss_bonnet_lhs", r.gauss_bonnet_lhs},
          {"gauss_bonnet_rhs", r.gauss_bonnet_rhs},
          {"residual", optional_json(r.residual)},
          {"polygon_total_curvature", r.polygon_total_curvature},
          {"bound_tc_minus_2pi", r.bound_tc_minus_2pi},
          {"tc_slack", r.tc_slack},
          {"nonbranch_bound", r.nonbranch_bound},
          {"nonbranch_slack", r.nonbranch_slack},
          {"predicted_total", r.predicted_total},
          {"nonbranch_strict", r.nonbranch_strict},
          {"sauvigny_margin", r.sauvigny_margin}};
}

Json to_json(const std::vector<ModulusRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"delta", r.delta}, {"arc", r.arc}, {"observed", r.observed}, {"bound", r.bound}});
  return out;
}

Json to_json(const ConvergenceReport& rep) {
  Json stages = Json::array();
  for (const auto& st : rep.stages) {
    stages.push_back({{"n", st.n},
                      {"levels", st.levels},
                      {"polygon", to_json(st.polygon)},
                      {"perturb_rounds", st.perturb_rounds},
                      {"approximation", to_json(st.approximation)},
                      {"diagnostics", to_json(st.diagnostics)},
                      {"branches", to_json(st.branches)},
                      {"curvature", to_json(st.curvature)},
                      {"isoperimetric_margin", st.isoperimetric_margin},
                      {"normalization",
                       {{"a", {st.normalization.a().real(), st.normalization.a().imag()}},
                        {"theta", st.normalization.theta()}}},
                      {"lift",
                       {{"length", st.lift.lift.length},
                        {"violation", st.lift.violation},
                        {"total_increase", st.lift.lift.total_increase()},
                        {"angles", st.trace.angles},
                        {"params", st.lift.lift.node_params}}},
                      {"courant_lebesgue", to_json(st.modulus)}});
  }
  Json limit = nullptr;
  if (rep.has_limit) {
    Json interior = Json::array();
    for (const auto& b : rep.limit.interior_branches)
      interior.push_back({{"location", {b.location.x(), b.location.y()}},
                          {"order", optional_json(b.order)},
                          {"modulus", b.modulus},
                          {"near_boundary", b.near_boundary}});
    limit = {{"energy", rep.limit.energy},
             {"conformality", rep.limit.conformality},
             {"total_abs_curvature", rep.limit.total_abs_curvature},
             {"sauvigny_margin", rep.limit.sauvigny_margin},
             {"interior_branches", interior}};
  }
  return {{"curve", {{"length", rep.curve_length}, {"total_curvature", rep.curve_total_curvature}}},
          {"epsilon", rep.epsilon},
          {"stages", stages},
          {"trace_distances", rep.trace_distances},
          {"failure", rep.failure.empty() ? Json(nullptr) : Json({{"stage", rep.failed_stage}, {"cause", rep.failure}})},
          {"limit", limit}};
}

Json solve_json(const PlateauSolution& sol, const BranchReport& br, const CurvatureReport& cr, double iso_margin) {
  const double l = polygon_length(sol.polygon);
  return {{"polygon", to_json(sol.polygon)},
          {"boundary_nodes", sol.surface.mesh->boundary_count()},
          {"diagnostics", to_json(sol.diagnostics)},
          {"vertex_preimages", sol.vertex_preimages},
          {"branches", to_json(br)},
          {"curvature", to_json(cr)},
          {"isoperimetric", {{"margin", iso_margin}, {"bound", l * l / (4.0 * kPi)}}}};
}

std::string plot_table(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "stage\tn\tenergy\ttc_polygon\ttotal_abs_curvature\ttrace_distance\n";
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto& st = rep.stages[i];
    os << i << '\t' << st.n << '\t' << fmt(st.diagnostics.energy) << '\t' << fmt(st.curvature.polygon_total_curvature)
       << '\t' << fmt(st.curvature.total_abs_curvature) << '\t'
       << (i == 0 ? std::string("nan") : fmt(rep.trace_distances[i - 1])) << '\n';
  }
  return os.str();
}

std::string document_text(Json body) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  body["metadata"] = {{"timestamp", ts.str()}};
  return body.dump(2) + "\n";
}

}  // namespace plateau
