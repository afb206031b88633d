#include "sclab/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sclab/errors.hpp"

namespace sclab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Workbench::Workbench(RunConfig cfg) : cfg_(std::move(cfg)), pot_(cfg_.make_potential3()) {
  cfg_.validate();
  iopts_ = cfg_.ray_options();
  popts_ = cfg_.pw_options();
}

void Workbench::require_nontrapping() {
  if (nontrapping_checked_) return;
  NontrappingReport rep = nontrapping_scan(pot_, cfg_.nontrapping_grid, iopts_);
  if (!rep.ok())
    throw ConfigError("potential violates non-trapping on " + std::to_string(rep.n_trapped) +
                      " of " + std::to_string(rep.n_rays) + " sampled rays");
  nontrapping_checked_ = true;
}

const PhaseShiftTable& Workbench::table(double k) {
  auto it = tables_.find(k);
  if (it == tables_.end()) it = tables_.emplace(k, phase_shifts(pot_, k, popts_)).first;
  return it->second;
}

const FlowGrid<3>& Workbench::grid() {
  if (!grid_) {
    require_nontrapping();
    grid_ = std::make_unique<FlowGrid<3>>(
        flow_grid(pot_, cfg_.pushforward_radial, cfg_.pushforward_azimuth, iopts_));
  }
  return *grid_;
}

double Workbench::pushforward(const std::function<double(double)>& phi_of_theta) {
  if (pot_.impact_set().empty()) return 0.0;
  return pushforward_integral<3>(grid(), [&](const Vec<3>& w) {
    return phi_of_theta(std::acos(std::clamp(w[2], -1.0, 1.0)));
  });
}

std::vector<SigmaRow> Workbench::run_lemma1() {
  require_nontrapping();
  std::vector<SigmaRow> rows;
  double scl = sigma_classical();
  for (double k : cfg_.k_ladder) {
    SigmaRow r;
    r.k = k;
    r.sigma_optical = total_xsec_optical(table(k));
    r.sigma_angular = sigma_angular(table(k));
    if (scl > 0) {
      r.ratio = r.sigma_optical / (2.0 * scl);
      r.error = std::abs(r.ratio - 1.0);
    } else {
      r.ratio = std::nan("");
      r.error = std::nan("");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<ForwardMassRow> Workbench::run_lemma2() {
  require_nontrapping();
  std::vector<ForwardMassRow> rows;
  double scl = sigma_classical();
  for (double delta : cfg_.deltas) {
    double cap = pot_.impact_set().empty()
                     ? 0.0
                     : classical_cap_mass(grid(), delta, cfg_.cap_mollify_width);
    for (double k : cfg_.k_ladder) {
      ForwardMassRow r;
      r.delta = delta;
      r.k = k;
      r.mass = forward_mass(table(k), delta);
      r.cap_correction = cap;
      r.target = scl + cap;
      r.error = scl > 0 ? std::abs(r.mass - r.target) / scl : std::abs(r.mass - r.target);
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<WeakRow> Workbench::run_weak_test() {
  require_nontrapping();
  std::vector<WeakRow> rows;
  double scl = sigma_classical();
  for (const auto& name : cfg_.test_functions) {
    auto phi = test_function(name);
    double rhs = pushforward(phi) + scl * phi(0.0);
    for (double k : cfg_.k_ladder) {
      WeakRow r;
      r.phi = name;
      r.k = k;
      r.lhs = amplitude_moment(table(k), phi, cfg_.omega_quad_order);
      r.rhs = rhs;
      r.error = std::abs(r.lhs - r.rhs);
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<TransportRow> Workbench::run_transport() {
  require_nontrapping();
  std::vector<TransportRow> rows;
  double t_cl = pushforward([](double th) { return 1.0 - std::cos(th); });
  for (double k : cfg_.k_ladder) {
    TransportRow r;
    r.k = k;
    r.sigma_tr = transport_xsec(table(k));
    r.t_cl = t_cl;
    r.ratio = t_cl != 0 ? r.sigma_tr / t_cl : std::nan("");
    rows.push_back(r);
  }
  return rows;
}

void Workbench::write_report(const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw Error(std::string("cannot write ") + name);
    return f;
  };

  auto sig = run_lemma1();
  {
    auto f = open("sigma_vs_k.csv");
    f << "k,sigma_optical,sigma_angular,ratio_to_2sigma_cl,abs_error\n";
    for (const auto& r : sig)
      f << format_double(r.k) << ',' << format_double(r.sigma_optical) << ','
        << format_double(r.sigma_angular) << ',' << format_double(r.ratio) << ','
        << format_double(r.error) << '\n';
  }
  auto fm = run_lemma2();
  {
    auto f = open("forward_mass.csv");
    f << "delta,k,forward_mass,cap_correction,target,rel_error\n";
    for (const auto& r : fm)
      f << format_double(r.delta) << ',' << format_double(r.k) << ',' << format_double(r.mass)
        << ',' << format_double(r.cap_correction) << ',' << format_double(r.target) << ','
        << format_double(r.error) << '\n';
  }
  auto wk = run_weak_test();
  {
    auto f = open("weak_test.csv");
    f << "phi,k,lhs,rhs_target,abs_error\n";
    for (const auto& r : wk)
      f << r.phi << ',' << format_double(r.k) << ',' << format_double(r.lhs) << ','
        << format_double(r.rhs) << ',' << format_double(r.error) << '\n';
  }
  auto tr = run_transport();
  {
    auto f = open("transport.csv");
    f << "k,sigma_tr,t_cl,ratio\n";
    for (const auto& r : tr)
      f << format_double(r.k) << ',' << format_double(r.sigma_tr) << ',' << format_double(r.t_cl)
        << ',' << format_double(r.ratio) << '\n';
  }
  {
    auto f = open("summary.txt");
    double scl = sigma_classical();
    f << "sigma_cl = " << format_double(scl) << "\n";
    f << "k ladder:";
    for (double k : cfg_.k_ladder) f << ' ' << format_double(k);
    f << "\n\n";
    f << "total cross section vs 2 sigma_cl:\n";
    for (const auto& r : sig)
      f << "  k=" << format_double(r.k) << "  sigma=" << format_double(r.sigma_optical)
        << "  ratio=" << format_double(r.ratio) << "\n";
    f << "\nforward-cone mass vs sigma_cl + C(delta):\n";
    for (const auto& r : fm)
      f << "  delta=" << format_double(r.delta) << " k=" << format_double(r.k)
        << "  M=" << format_double(r.mass) << "  target=" << format_double(r.target)
        << "  rel_err=" << format_double(r.error) << "\n";
    f << "\ntransport cross section vs classical transport:\n";
    for (const auto& r : tr)
      f << "  k=" << format_double(r.k) << "  sigma_tr=" << format_double(r.sigma_tr)
        << "  T_cl=" << format_double(r.t_cl) << "  ratio=" << format_double(r.ratio) << "\n";
    f << "\nweak test rows: " << wk.size() << " (see weak_test.csv)\n";
    f << "\nNote: M(delta,k) is reported as a two-parameter table; no scalar limit"
         " is extrapolated.\n";
  }
}

}  // namespace sclab
