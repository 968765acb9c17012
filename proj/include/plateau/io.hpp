#pragma once

#include "plateau/convergence.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace plateau {

using Json = nlohmann::json;

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// OBJ text: "v x y z" per node, "vt u v" with the disc coordinates, and
/// 1-based "f a/a b/b c/c" faces.
std::string obj_text(const DiscSurface& x);
/// Rebuilds the disc mesh from the vt records and the faces; throws
/// ParameterError on malformed input.
DiscSurface read_obj(std::istream& is);

/// "lift <length> <count>" then one parameter per line.
std::string lift_text(const BoundaryLift& lift);
BoundaryLift read_lift(std::istream& is);

Json to_json(const Polygon& p);
Json to_json(const ApproximationReport& r);
Json to_json(const SolverDiagnostics& d);
Json to_json(const BranchReport& br);
Json to_json(const CurvatureReport& r);
Json to_json(const std::vector<ModulusRow>& rows);
Json to_json(const ConvergenceReport& rep);

/// Diagnostics document for a single solve.
Json solve_json(const PlateauSolution& sol, const BranchReport& br, const CurvatureReport& cr, double iso_margin);

/// Tab-separated table: stage, n, energy, TC(P), ∫|K|E, trace distance to the
/// previous stage ("nan" for the first).
std::string plot_table(const ConvergenceReport& rep);

/// {"metadata": {"timestamp": ...}, ...body}: the timestamp is the only
/// field that differs between otherwise identical runs.
std::string document_text(Json body);

}  // namespace plateau
