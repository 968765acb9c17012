#pragma once

#include "plateau/convergence.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace plateau {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Curve block of a run configuration. Only the fields of the chosen family
/// are read.
struct CurveSpec {
  std::string family = "circle";
  double radius = 1.0;
  double a = 1.0;
  double b = 1.0;
  double amplitude = 0.1;
  int frequency = 3;
  double corner_turn = 1.0;
  int pieces = 4;
  std::vector<Vec3> vertices;
  FourierArc::Coefficients fourier;
};

PiecewiseC2Curve make_curve(const CurveSpec& spec);

struct RunConfig {
  CurveSpec curve;
  std::vector<std::size_t> schedule;
  double epsilon = 0.1;
  ConvergenceOptions options;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
};

/// YAML run configuration:
///
///   curve: {family: perturbed_circle, amplitude: 0.1, frequency: 3}
///   schedule: [16, 32, 64, 128]
///   epsilon: 0.1
///   seed: 7
///   output: runs/pc
///   solver: {tol_energy: 1e-10, max_iters: 5000, refresh_every: 25,
///            base_levels: 12, perturb_scale: 1e-4}
///   analysis: {branch_tol: 1e-4}
///   anchors: [0.0, 0.25, 0.5]
///
/// Families: circle (radius), ellipse (a, b), perturbed_circle (amplitude,
/// frequency), fourier (offset, cos, sin), polygon (vertices), lens
/// (corner_turn), split_circle (pieces). Throws ConfigError naming the line
/// and field at fault.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Parses "16,32,64" (or space separated) into a schedule.
std::vector<std::size_t> parse_schedule(const std::string& list);

/// Throws ConfigError unless the schedule is non-empty, positive and strictly
/// increasing.
void check_schedule(const std::vector<std::size_t>& schedule);

}  // namespace plateau
