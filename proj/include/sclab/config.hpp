#pragma once

// Run configuration shared by the CLI subcommands and the verification
// harness; loaded from a JSON file, validated up front.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sclab/classical.hpp"
#include "sclab/potential.hpp"
#include "sclab/quantum.hpp"
#include "sclab/ray.hpp"

namespace sclab {

struct RunConfig {
  struct Part {
    std::array<double, 3> center{0, 0, 0};
    double radius = 1.0;
    double amplitude = 0.0;
  };

  int dimension = 3;
  double plane_offset = 2.0;
  std::vector<Part> parts;

  std::vector<double> k_ladder = {25, 50, 100, 200};
  std::vector<double> deltas = {0.2, 0.3};
  std::vector<std::string> test_functions = {"const1", "cos_theta", "one_minus_cos", "bump_away"};

  // grids
  int y_seed_grid = 80;
  int pushforward_radial = 96;
  int pushforward_azimuth = 64;
  int omega_quad_order = 0;  // 0: auto (polynomial-exact order per table)
  int nontrapping_grid = 21;

  // tolerances
  double ray_rel_tol = 1e-11;
  double ray_abs_tol = 1e-12;
  double pw_rel_tol = 1e-12;
  double pw_abs_tol = 1e-14;
  double branch_angle_tol = 1e-10;
  double dedup_radius = 1e-5;
  double nonregular_threshold = 1e-8;
  double cap_mollify_width = 0.02;

  std::string output_dir = "out";

  // The desk-scale reference: one unit bump, unit amplitude, launch offset 2.
  static RunConfig reference();

  void validate() const;  // throws ConfigError
  Potential<3> make_potential3() const;
  IntegratorOptions ray_options() const;
  BranchSearchOptions branch_options() const;
  PhaseShiftOptions pw_options() const;
  bool zero_potential() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Named axisymmetric test functions phi(theta) for the weak-convergence runs.
std::function<double(double)> test_function(const std::string& name);

}  // namespace sclab
