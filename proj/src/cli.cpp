#include "sclab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "sclab/acceptance.hpp"
#include "sclab/convergence.hpp"
#include "sclab/semiclassical.hpp"

namespace sclab {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (dir / name).string());
  return f;
}

Vec<2> parse_launch(const std::string& s) {
  Vec<2> y{};
  std::stringstream ss(s);
  char comma = 0;
  if (!(ss >> y[0])) throw ConfigError("bad launch point '" + s + "' (expected y1,y2)");
  if (ss >> comma >> y[1]) {
  }
  return y;
}

int run_rays(const RunConfig& cfg, const std::vector<std::string>& launches, int grid_n,
             const std::string& out_dir) {
  Potential<3> pot = cfg.make_potential3();
  IntegratorOptions iopts = cfg.ray_options();
  std::vector<Vec<2>> ys;
  for (const auto& s : launches) ys.push_back(parse_launch(s));
  if (grid_n > 0) {
    auto bb = pot.impact_set().bounding_box();
    for (int i = 0; i < grid_n; ++i)
      for (int j = 0; j < grid_n; ++j)
        ys.push_back({bb[0] + (bb[1] - bb[0]) * (i + 0.5) / grid_n,
                      bb[2] + (bb[3] - bb[2]) * (j + 0.5) / grid_n});
  }
  if (ys.empty()) ys = {{0.0, 0.0}, {0.3, 0.0}, {0.5, 0.0}, {0.7, 0.0}, {0.9, 0.0}};
  auto index = open_out(out_dir, "rays_index.csv");
  index << "file,y1,y2,exited,J1,J2,J3,det_dj,maslov,F\n";
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Ray<3> ray = trace_ray(pot, ys[i], iopts);
    char name[32];
    std::snprintf(name, sizeof name, "ray_%03zu.csv", i);
    open_out(out_dir, name) << ray_csv(ray);
    index << name << ',' << format_double(ys[i][0]) << ',' << format_double(ys[i][1]) << ','
          << (ray.exited ? 1 : 0) << ',' << format_double(ray.p_inf[0]) << ','
          << format_double(ray.p_inf[1]) << ',' << format_double(ray.p_inf[2]) << ','
          << format_double(ray.det_dj) << ',' << ray.maslov << ',' << format_double(ray.phase_f)
          << '\n';
  }
  std::cout << "traced " << ys.size() << " rays into " << out_dir << "\n";
  return 0;
}

int run_classical(const RunConfig& cfg, const std::vector<double>& theta_deg,
                  const std::string& out_dir) {
  Workbench wb(cfg);
  wb.require_nontrapping();
  const Potential<3>& pot = wb.potential();
  BranchSearchOptions bopts = cfg.branch_options();
  IntegratorOptions iopts = cfg.ray_options();

  std::cout << "sigma_cl = meas(I) = " << format_double(wb.sigma_classical()) << "\n";

  std::vector<Vec<3>> omegas;
  for (double deg : theta_deg) {
    double th = deg * M_PI / 180.0;
    omegas.push_back({std::sin(th), 0.0, std::cos(th)});
  }
  BranchFinder<3> finder(pot, bopts, iopts);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    BranchSearch<3> search = finder.find(omegas[i]);
    char name[48];
    std::snprintf(name, sizeof name, "branches_theta%03d.csv", static_cast<int>(std::lround(theta_deg[i])));
    auto f = open_out(out_dir, name);
    f << "y1,y2,det_dj,F,maslov\n";
    for (const auto& b : search.branches)
      f << format_double(b.y[0]) << ',' << format_double(b.y[1]) << ',' << format_double(b.det_dj)
        << ',' << format_double(b.phase_f) << ',' << b.maslov << '\n';
    double dcs = 0;
    bool regular = !search.branches.empty();
    for (const auto& b : search.branches) {
      if (std::abs(b.det_dj) < bopts.nonregular_threshold) regular = false;
    }
    if (regular) dcs = classical_dcs(branch_data(search.branches));
    std::cout << "theta=" << theta_deg[i] << " deg: " << search.branches.size() << " branches"
              << (search.stalled.empty() ? "" : " (+stalled seeds)") << ", |f_cl|^2 = "
              << (regular ? format_double(dcs) : std::string("n/a (nonregular)")) << "\n";
  }

  if (pot.is_radial()) {
    DeflectionTable table = deflection_table(pot, 400);
    auto f = open_out(out_dir, "deflection.csv");
    f << "b,theta\n";
    for (std::size_t i = 0; i < table.b.size(); ++i)
      f << format_double(table.b[i]) << ',' << format_double(table.theta[i]) << '\n';
  }

  FlowGrid<3> coarse = flow_grid(pot, cfg.pushforward_radial / 2, cfg.pushforward_azimuth / 2, iopts);
  Assumption2Report a2 = assumption2_check(pot, wb.grid(), bopts, iopts);
  Assumption2Report a2c = assumption2_check(pot, coarse, bopts, iopts);
  Assumption3Report a3 = assumption3_check(pot, omegas, bopts, iopts);
  auto f = open_out(out_dir, "assumption_report.txt");
  f << "assumption2:\n";
  f << "  degenerate: " << (a2.degenerate ? "yes" : "no") << "\n";
  f << "  violated: " << (a2.violated ? "yes" : "no") << "\n";
  f << "  critical fractions (threshold: fine, coarse):\n";
  for (std::size_t i = 0; i < a2.fractions.size(); ++i)
    f << "    " << format_double(a2.fractions[i].first) << ": "
      << format_double(a2.fractions[i].second) << ", "
      << format_double(a2c.fractions[i].second) << "\n";
  f << "  forward preimages (y, det):\n";
  for (const auto& [y, d] : a2.forward_preimages)
    f << "    (" << format_double(y[0]) << ", " << format_double(y[1]) << "): " << format_double(d)
      << "\n";
  f << "assumption3:\n";
  for (const auto& e : a3.entries) {
    f << "  theta=" << format_double(e.theta) << " rad, branches=" << e.n_branches
      << (e.flagged ? " FLAGGED" : "") << "\n";
    for (const auto& p : e.pairs)
      f << "    pair (" << static_cast<int>(p[0]) << "," << static_cast<int>(p[1])
        << "): |grad dF| = " << format_double(p[2]) << "\n";
  }
  std::cout << "assumption report written to " << out_dir << "\n";
  return 0;
}

int run_semiclassical(const RunConfig& cfg, double theta_min_deg, double theta_max_deg, int n_theta,
                      const std::string& out_dir) {
  Workbench wb(cfg);
  wb.require_nontrapping();
  BranchSearchOptions bopts = cfg.branch_options();
  IntegratorOptions iopts = cfg.ray_options();
  auto f = open_out(out_dir, "semiclassical.csv");
  f << "theta_deg,azimuth_deg,k,re_f,im_f,f2\n";
  for (int i = 0; i < n_theta; ++i) {
    double deg = theta_min_deg + (theta_max_deg - theta_min_deg) * i / std::max(n_theta - 1, 1);
    double th = deg * M_PI / 180.0;
    Vec<3> omega = {std::sin(th), 0.0, std::cos(th)};
    BranchSearch<3> search = find_branches(wb.potential(), omega, bopts, iopts);
    std::vector<Branch<3>> branches;
    try {
      branches = require_regular(search, bopts);
    } catch (const Error& e) {
      std::cout << "theta=" << deg << " deg skipped: " << e.what() << "\n";
      continue;
    }
    auto data = branch_data(branches);
    for (double k : cfg.k_ladder) {
      auto fsc = vainberg_amplitude(data, k);
      f << format_double(deg) << ",0," << format_double(k) << ',' << format_double(fsc.real())
        << ',' << format_double(fsc.imag()) << ',' << format_double(std::norm(fsc)) << '\n';
    }
  }
  std::cout << "semiclassical amplitude grid written to " << out_dir << "\n";
  return 0;
}

int run_quantum(const RunConfig& cfg, int n_theta, const std::string& out_dir) {
  Workbench wb(cfg);
  for (double k : cfg.k_ladder) {
    const PhaseShiftTable& t = wb.table(k);
    char name[48];
    std::snprintf(name, sizeof name, "phase_shifts_k%g.csv", k);
    auto f = open_out(out_dir, name);
    f << "l,delta\n";
    for (int l = 0; l <= t.l_max; ++l)
      f << l << ',' << format_double(t.delta[static_cast<std::size_t>(l)]) << '\n';
    std::snprintf(name, sizeof name, "amplitude_k%g.csv", k);
    auto g = open_out(out_dir, name);
    g << "theta,re_f,im_f,f2\n";
    for (int i = 0; i <= n_theta; ++i) {
      double th = M_PI * i / n_theta;
      auto fq = quantum_amplitude(t, th);
      g << format_double(th) << ',' << format_double(fq.real()) << ',' << format_double(fq.imag())
        << ',' << format_double(std::norm(fq)) << '\n';
    }
  }
  std::cout << "phase shifts and amplitudes written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"scattering laboratory: rays, classical cross sections, semiclassical amplitudes,"
               " partial-wave quantum reference, and convergence reports"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;

  auto* rays = app.add_subcommand("rays", "trace rays and export CSV samples");
  std::vector<std::string> launches;
  int rays_grid = 0;
  rays->add_option("--config", config_path, "run configuration (JSON)");
  rays->add_option("--y", launches, "launch point y1,y2 (repeatable)");
  rays->add_option("--grid", rays_grid, "additionally trace an NxN launch grid");
  rays->add_option("--out", out_override, "output directory");

  auto* classical = app.add_subcommand("classical", "branches, cross sections, assumption checks");
  std::vector<double> theta_deg = {40.0, 60.0, 90.0};
  classical->add_option("--config", config_path, "run configuration (JSON)");
  classical->add_option("--theta-deg", theta_deg, "outgoing polar angles in degrees");
  classical->add_option("--out", out_override, "output directory");

  auto* semicl = app.add_subcommand("semiclassical", "branch-sum amplitude grids");
  double th_min = 20.0, th_max = 120.0;
  int n_theta = 41;
  semicl->add_option("--config", config_path, "run configuration (JSON)");
  semicl->add_option("--theta-min-deg", th_min, "grid start");
  semicl->add_option("--theta-max-deg", th_max, "grid end");
  semicl->add_option("--n-theta", n_theta, "grid size");
  semicl->add_option("--out", out_override, "output directory");

  auto* quantum = app.add_subcommand("quantum", "phase shifts and quantum amplitudes");
  int qn_theta = 360;
  quantum->add_option("--config", config_path, "run configuration (JSON)");
  quantum->add_option("--n-theta", qn_theta, "amplitude grid size over [0, pi]");
  quantum->add_option("--out", out_override, "output directory");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite (or config checks)");
  verify->add_option("--config", config_path, "check this configuration instead of the reference");

  auto* report = app.add_subcommand("report", "k-ladder convergence report CSVs");
  report->add_option("--config", config_path, "run configuration (JSON)");
  report->add_option("--out", out_override, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig::reference() : load_config(config_path);
    std::string out_dir = out_override.empty() ? cfg.output_dir : out_override;

    if (rays->parsed()) return run_rays(cfg, launches, rays_grid, out_dir);
    if (classical->parsed()) return run_classical(cfg, theta_deg, out_dir);
    if (semicl->parsed()) return run_semiclassical(cfg, th_min, th_max, n_theta, out_dir);
    if (quantum->parsed()) return run_quantum(cfg, qn_theta, out_dir);
    if (verify->parsed()) {
      std::vector<CriterionResult> results =
          config_path.empty() ? run_acceptance(&std::cout) : run_config_checks(cfg);
      int failures = print_results(results, std::cout);
      return failures == 0 ? 0 : 1;
    }
    if (report->parsed()) {
      Workbench wb(cfg);
      wb.write_report(out_dir);
      std::cout << "report written to " << out_dir << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration/assumption violation: " << e.what() << "\n";
    return 2;
  } catch (const TrappedRay& e) {
    std::cerr << "assumption violation: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sclab
