#include "sclab/semiclassical.hpp"

#include <cmath>

#include "sclab/errors.hpp"

namespace sclab {

std::complex<double> vainberg_amplitude(const std::vector<BranchData>& branches, double k,
                                        double nonregular_threshold) {
  if (!(k > 0)) throw Error("vainberg_amplitude: k must be positive");
  std::complex<double> f = 0;
  for (const auto& b : branches) {
    double ad = std::abs(b.det_dj);
    if (ad < nonregular_threshold)
      throw NonregularDirection("vainberg_amplitude: branch on a caustic");
    // Maslov quarter-wave shift is k-independent.
    double phase = k * b.phase_f - 0.5 * M_PI * b.maslov;
    f += std::polar(1.0 / std::sqrt(ad), phase);
  }
  return f;
}

double semiclassical_dcs(const std::vector<BranchData>& branches, double k,
                         double nonregular_threshold) {
  return std::norm(vainberg_amplitude(branches, k, nonregular_threshold));
}

double semiclassical_dcs_kavg(const std::vector<BranchData>& branches, double k, double dk,
                              int n_samples, double nonregular_threshold) {
  double acc = 0;
  for (int i = 0; i < n_samples; ++i) {
    double ki = k + dk * (i + 0.5) / n_samples;
    acc += semiclassical_dcs(branches, ki, nonregular_threshold);
  }
  return acc / n_samples;
}

}  // namespace sclab
