#pragma once

// Stationary-phase scattering amplitude synthesized from branch data:
// f(omega,k) = sum_j |det DJ_j|^{-1/2} exp(i k F_j - i pi/2 nu_j),
// leading order only.

#include <complex>
#include <vector>

#include "sclab/classical.hpp"

namespace sclab {

std::complex<double> vainberg_amplitude(const std::vector<BranchData>& branches, double k,
                                        double nonregular_threshold = 1e-8);

// |f(omega,k)|^2 on a regular direction.
double semiclassical_dcs(const std::vector<BranchData>& branches, double k,
                         double nonregular_threshold = 1e-8);

// Average of |f(.,k')|^2 over k' in [k, k + dk], sampled numerically; tends
// to the classical value sum_j |det DJ_j|^{-1} once dk spreads the branch
// phase differences over many cycles.
double semiclassical_dcs_kavg(const std::vector<BranchData>& branches, double k, double dk,
                              int n_samples = 1024, double nonregular_threshold = 1e-8);

template <int N>
std::vector<BranchData> branch_data(const std::vector<Branch<N>>& branches) {
  std::vector<BranchData> d;
  d.reserve(branches.size());
  for (const auto& b : branches) d.push_back(b.data());
  return d;
}

}  // namespace sclab
