#include "sclab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sclab/errors.hpp"

namespace sclab {

RunConfig RunConfig::reference() {
  RunConfig cfg;
  cfg.parts.push_back({{0, 0, 0}, 1.0, 1.0});
  return cfg;
}

void RunConfig::validate() const {
  if (dimension != 2 && dimension != 3) throw ConfigError("config: dimension must be 2 or 3");
  for (const auto& p : parts)
    if (!(p.radius > 0)) throw ConfigError("config: part radius must be positive");
  if (!(plane_offset > 0)) throw ConfigError("config: plane_offset must be positive");
  if (k_ladder.empty()) throw ConfigError("config: k_ladder must not be empty");
  for (std::size_t i = 0; i < k_ladder.size(); ++i) {
    if (!(k_ladder[i] > 0)) throw ConfigError("config: wavenumbers must be positive");
    if (i > 0 && !(k_ladder[i] > k_ladder[i - 1]))
      throw ConfigError("config: k_ladder must be strictly increasing");
  }
  for (double d : deltas)
    if (!(d > 0.0) || d > 0.25 * M_PI)
      throw ConfigError("config: forward-cone radii must lie in (0, pi/4]");
  for (const auto& name : test_functions) test_function(name);  // throws on unknown names
  if (y_seed_grid < 4 || pushforward_radial < 4 || pushforward_azimuth < 1 || nontrapping_grid < 2)
    throw ConfigError("config: grid sizes out of range");
  if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
}

Potential<3> RunConfig::make_potential3() const {
  if (dimension != 3) throw ConfigError("config: this run requires dimension 3");
  std::vector<BumpPart<3>> ps;
  for (const auto& p : parts)
    ps.push_back({{p.center[0], p.center[1], p.center[2]}, p.radius, p.amplitude});
  try {
    return Potential<3>(std::move(ps), plane_offset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

IntegratorOptions RunConfig::ray_options() const {
  IntegratorOptions o;
  o.rel_tol = ray_rel_tol;
  o.abs_tol = ray_abs_tol;
  return o;
}

BranchSearchOptions RunConfig::branch_options() const {
  BranchSearchOptions o;
  o.seed_grid = y_seed_grid;
  o.angle_tol = branch_angle_tol;
  o.dedup_radius = dedup_radius;
  o.nonregular_threshold = nonregular_threshold;
  return o;
}

PhaseShiftOptions RunConfig::pw_options() const {
  PhaseShiftOptions o;
  o.rel_tol = pw_rel_tol;
  o.abs_tol = pw_abs_tol;
  return o;
}

bool RunConfig::zero_potential() const {
  for (const auto& p : parts)
    if (p.amplitude != 0.0) return false;
  return true;
}

namespace {

using nlohmann::json;

template <class T>
void opt(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.parts.clear();
  try {
    if (j.contains("potential")) {
      const json& p = j.at("potential");
      opt(p, "dimension", cfg.dimension);
      opt(p, "plane_offset", cfg.plane_offset);
      if (p.contains("parts")) {
        for (const json& jp : p.at("parts")) {
          RunConfig::Part part;
          if (jp.contains("center")) {
            auto c = jp.at("center").get<std::vector<double>>();
            for (std::size_t i = 0; i < c.size() && i < 3; ++i) part.center[i] = c[i];
          }
          opt(jp, "radius", part.radius);
          opt(jp, "amplitude", part.amplitude);
          cfg.parts.push_back(part);
        }
      }
    }
    opt(j, "k_ladder", cfg.k_ladder);
    opt(j, "deltas", cfg.deltas);
    opt(j, "test_functions", cfg.test_functions);
    if (j.contains("grids")) {
      const json& g = j.at("grids");
      opt(g, "y_seed_grid", cfg.y_seed_grid);
      opt(g, "pushforward_radial", cfg.pushforward_radial);
      opt(g, "pushforward_azimuth", cfg.pushforward_azimuth);
      opt(g, "omega_quad_order", cfg.omega_quad_order);
      opt(g, "nontrapping_grid", cfg.nontrapping_grid);
    }
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      opt(t, "ray_rel_tol", cfg.ray_rel_tol);
      opt(t, "ray_abs_tol", cfg.ray_abs_tol);
      opt(t, "pw_rel_tol", cfg.pw_rel_tol);
      opt(t, "pw_abs_tol", cfg.pw_abs_tol);
      opt(t, "branch_angle_tol", cfg.branch_angle_tol);
      opt(t, "dedup_radius", cfg.dedup_radius);
      opt(t, "nonregular_threshold", cfg.nonregular_threshold);
      opt(t, "cap_mollify_width", cfg.cap_mollify_width);
    }
    opt(j, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::function<double(double)> test_function(const std::string& name) {
  if (name == "const1") return [](double) { return 1.0; };
  if (name == "cos_theta") return [](double th) { return std::cos(th); };
  if (name == "one_minus_cos") return [](double th) { return 1.0 - std::cos(th); };
  if (name == "bump_away") {
    // C-infinity bump supported on theta in [0.45, 1.35], clear of forward.
    const double c = 0.9, w = 0.45;
    return [c, w](double th) {
      double u = (th - c) / w;
      double t = 1.0 - u * u;
      if (t <= 1e-12) return 0.0;
      return std::exp(1.0 - 1.0 / t);
    };
  }
  throw ConfigError("config: unknown test function '" + name + "'");
}

}  // namespace sclab
