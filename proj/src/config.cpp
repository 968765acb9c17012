#include "plateau/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace plateau {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (at.IsDefined() && at.Mark().line >= 0) os << ":" << at.Mark().line + 1;
    os << ": field '" << field << "': " << what;
    throw ConfigError(os.str());
  }

  void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, where, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, where.empty() ? key : where + "." + key, "unknown key");
    }
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, field, "cannot convert '" + n.Scalar() + "'");
    }
  }

  template <class T>
  void optional(const YAML::Node& map, const char* key, const std::string& prefix, T& out) const {
    const auto n = map[key];
    if (n) out = scalar<T>(n, prefix + key);
  }

  double positive(const YAML::Node& map, const char* key, const std::string& prefix, double fallback) const {
    const auto n = map[key];
    if (!n) return fallback;
    const double v = scalar<double>(n, prefix + key);
    if (!(v > 0.0)) fail(n, prefix + key, "must be positive");
    return v;
  }

  Vec3 vec3(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence() || n.size() != 3) fail(n, field, "expected [x, y, z]");
    return {scalar<double>(n[0], field), scalar<double>(n[1], field), scalar<double>(n[2], field)};
  }

  std::vector<Vec3> vec3_list(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of [x, y, z]");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(vec3(n[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  std::string source_;
};

CurveSpec read_curve(const Reader& r, const YAML::Node& n) {
  CurveSpec c;
  r.check_keys(n, "curve",
               {"family", "radius", "a", "b", "amplitude", "frequency", "corner_turn", "pieces", "vertices", "offset",
                "cos", "sin"});
  if (!n["family"]) r.fail(n, "curve.family", "missing");
  c.family = r.scalar<std::string>(n["family"], "curve.family");
  r.optional(n, "radius", "curve.", c.radius);
  r.optional(n, "a", "curve.", c.a);
  r.optional(n, "b", "curve.", c.b);
  r.optional(n, "amplitude", "curve.", c.amplitude);
  r.optional(n, "frequency", "curve.", c.frequency);
  r.optional(n, "corner_turn", "curve.", c.corner_turn);
  r.optional(n, "pieces", "curve.", c.pieces);
  if (n["vertices"]) c.vertices = r.vec3_list(n["vertices"], "curve.vertices");
  if (n["offset"]) c.fourier.offset = r.vec3(n["offset"], "curve.offset");
  if (n["cos"]) c.fourier.cos_terms = r.vec3_list(n["cos"], "curve.cos");
  if (n["sin"]) c.fourier.sin_terms = r.vec3_list(n["sin"], "curve.sin");

  static const std::set<std::string> families{"circle", "ellipse", "perturbed_circle", "fourier",
                                              "polygon", "lens", "split_circle"};
  if (!families.count(c.family)) r.fail(n["family"], "curve.family", "unknown family '" + c.family + "'");
  if (c.family == "polygon" && c.vertices.size() < 4) r.fail(n, "curve.vertices", "polygon needs at least 4 vertices");
  if (c.family == "fourier" && c.fourier.cos_terms.empty() && c.fourier.sin_terms.empty())
    r.fail(n, "curve.cos", "fourier curve needs coefficients");
  // Curve construction errors (bad radius, self-intersection) surface here so
  // they are reported against the config file.
  try {
    make_curve(c);
  } catch (const Error& e) {
    r.fail(n, "curve", e.what());
  }
  return c;
}

}  // namespace

PiecewiseC2Curve make_curve(const CurveSpec& spec) {
  const auto& f = spec.family;
  if (f == "circle") return make_circle(spec.radius);
  if (f == "ellipse") return make_ellipse(spec.a, spec.b);
  if (f == "perturbed_circle") return make_perturbed_circle(spec.amplitude, spec.frequency);
  if (f == "fourier") return make_fourier_curve(spec.fourier);
  if (f == "polygon") return make_polygonal_curve(spec.vertices);
  if (f == "lens") return make_lens(spec.corner_turn);
  if (f == "split_circle") return make_split_circle(spec.pieces);
  throw ParameterError("unknown curve family '" + f + "'");
}

void check_schedule(const std::vector<std::size_t>& schedule) {
  if (schedule.empty()) throw ConfigError("schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 4) throw ConfigError("schedule entries must be at least 4");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw ConfigError("schedule must be strictly increasing");
  }
}

std::vector<std::size_t> parse_schedule(const std::string& list) {
  std::string s = list;
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream is(s);
  std::vector<std::size_t> out;
  std::string tok;
  while (is >> tok) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok[0] == '-') throw ConfigError("bad schedule entry '" + tok + "'");
    out.push_back(v);
  }
  check_schedule(out);
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ":" << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  const Reader r(source);
  if (!root.IsMap()) r.fail(root, "", "configuration must be a mapping");
  r.check_keys(root, "", {"curve", "schedule", "epsilon", "seed", "output", "solver", "analysis", "anchors"});

  RunConfig cfg;
  if (!root["curve"]) r.fail(root, "curve", "missing");
  cfg.curve = read_curve(r, root["curve"]);

  const auto sched = root["schedule"];
  if (!sched) r.fail(root, "schedule", "missing");
  if (!sched.IsSequence()) r.fail(sched, "schedule", "expected a list");
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const long v = r.scalar<long>(sched[i], "schedule");
    if (v < 4) r.fail(sched[i], "schedule", "entries must be at least 4");
    cfg.schedule.push_back(static_cast<std::size_t>(v));
  }
  try {
    check_schedule(cfg.schedule);
  } catch (const ConfigError& e) {
    r.fail(sched, "schedule", e.what());
  }

  cfg.epsilon = r.positive(root, "epsilon", "", cfg.epsilon);
  if (!root["seed"]) r.fail(root, "seed", "missing (a seed is required for reproducible runs)");
  const long seed = r.scalar<long>(root["seed"], "seed");
  if (seed < 0) r.fail(root["seed"], "seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.options.seed = cfg.seed;
  if (root["output"]) cfg.output_dir = r.scalar<std::string>(root["output"], "output");

  if (const auto s = root["solver"]) {
    r.check_keys(s, "solver", {"tol_energy", "max_iters", "refresh_every", "base_levels", "perturb_scale"});
    auto& so = cfg.options.solver;
    so.tol_energy = r.positive(s, "tol_energy", "solver.", so.tol_energy);
    so.max_iters = static_cast<int>(r.positive(s, "max_iters", "solver.", so.max_iters));
    so.refresh_every = static_cast<int>(r.positive(s, "refresh_every", "solver.", so.refresh_every));
    cfg.options.base_levels = static_cast<int>(r.positive(s, "base_levels", "solver.", cfg.options.base_levels));
    if (cfg.options.base_levels < 4) r.fail(s["base_levels"], "solver.base_levels", "must be at least 4");
    cfg.options.perturb_scale = r.positive(s, "perturb_scale", "solver.", cfg.options.perturb_scale);
  }
  if (const auto a = root["analysis"]) {
    r.check_keys(a, "analysis", {"branch_tol"});
    cfg.options.branch.tol = r.positive(a, "branch_tol", "analysis.", cfg.options.branch.tol);
  }
  cfg.options.branch.seed = cfg.seed;
  if (const auto an = root["anchors"]) {
    if (!an.IsSequence() || an.size() != 3) r.fail(an, "anchors", "expected three period fractions");
    for (int i = 0; i < 3; ++i) {
      const double v = r.scalar<double>(an[i], "anchors");
      if (!(v >= 0.0 && v < 1.0)) r.fail(an[i], "anchors", "fractions must lie in [0, 1)");
      if (i > 0 && !(v > cfg.options.anchor_fractions[i - 1])) r.fail(an[i], "anchors", "must be increasing");
      cfg.options.anchor_fractions[i] = v;
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace plateau
