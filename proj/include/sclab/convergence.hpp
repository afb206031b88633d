#pragma once

// The verification harness: k-ladder experiments for the total cross section,
// the forward-cone mass, weak convergence against test functions, and the
// transport cross section, with plot-ready CSV output.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sclab/classical.hpp"
#include "sclab/config.hpp"
#include "sclab/quantum.hpp"

namespace sclab {

struct SigmaRow {
  double k = 0;
  double sigma_optical = 0;
  double sigma_angular = 0;
  double ratio = 0;  // sigma / (2 sigma_cl); NaN when sigma_cl = 0
  double error = 0;  // |ratio - 1|
};

struct ForwardMassRow {
  double delta = 0, k = 0;
  double mass = 0;            // M(delta, k)
  double cap_correction = 0;  // C(delta), classical mass inside the cone
  double target = 0;          // sigma_cl + C(delta)
  double error = 0;           // |mass - target| / sigma_cl
};

struct WeakRow {
  std::string phi;
  double k = 0;
  double lhs = 0;  // int |f|^2 phi dmu
  double rhs = 0;  // pushforward(phi) + sigma_cl phi(theta_0)
  double error = 0;
};

struct TransportRow {
  double k = 0;
  double sigma_tr = 0;
  double t_cl = 0;
  double ratio = 0;
};

// Owns the potential and the per-k caches so the four experiment runners can
// share phase-shift tables and the classical flow grid.
class Workbench {
 public:
  explicit Workbench(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const Potential<3>& potential() const { return pot_; }
  double sigma_classical() const { return sigma_cl(pot_); }
  bool zero_potential() const { return cfg_.zero_potential(); }

  // Throws ConfigError when the sampled flow violates non-trapping.
  void require_nontrapping();

  const PhaseShiftTable& table(double k);
  const FlowGrid<3>& grid();
  double pushforward(const std::function<double(double)>& phi_of_theta);

  std::vector<SigmaRow> run_lemma1();
  std::vector<ForwardMassRow> run_lemma2();
  std::vector<WeakRow> run_weak_test();
  std::vector<TransportRow> run_transport();

  // Writes sigma_vs_k.csv, forward_mass.csv, weak_test.csv, transport.csv and
  // summary.txt under out_dir. Output is byte-deterministic per config.
  void write_report(const std::string& out_dir);

 private:
  RunConfig cfg_;
  Potential<3> pot_;
  IntegratorOptions iopts_;
  PhaseShiftOptions popts_;
  std::map<double, PhaseShiftTable> tables_;
  std::unique_ptr<FlowGrid<3>> grid_;
  bool nontrapping_checked_ = false;
};

std::string format_double(double v);

}  // namespace sclab
