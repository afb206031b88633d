#pragma once

// Exact quantum reference for radial potentials in three dimensions:
// partial-wave phase shifts from the radial equation
//   u'' + [k^2 (1 + q(r)) - l(l+1)/r^2] u = 0,
// the scattering amplitude, optical-theorem cross section, angular moments
// of |f|^2, and the far-field surface-integral representation.

#include <complex>
#include <functional>
#include <vector>

#include "sclab/potential.hpp"

namespace sclab {

struct PhaseShiftTable {
  double k = 0;
  int l_max = 0;
  std::vector<double> delta;  // delta_l, l = 0..l_max
  int dimension = 3;
};

struct PhaseShiftOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double r0 = 1e-6;          // inner start for low partial waves
  double match_radius = 0;   // 0: auto, 1.05 * R_sup
  double tail_tol = 1e-10;
  int l_max_override = -1;   // <0: use default_l_max
};

// ceil(k R) plus the Fresnel transition padding for grazing waves.
int default_l_max(double k, double r_sup);

PhaseShiftTable phase_shifts(const Potential<3>& pot, double k, const PhaseShiftOptions& opts = {});

// f(theta, k) = (1/k) sum_l (2l+1) e^{i delta_l} sin(delta_l) P_l(cos theta)
std::complex<double> quantum_amplitude(const PhaseShiftTable& table, double theta);

// gamma_n = -(1/4 pi) (k / 2 pi i)^{(n-3)/2}, principal branch.
std::complex<double> gamma_n(int n, double k);

// sigma = Im f(0,k) / (-gamma_n k); for n = 3 this is (4 pi / k) Im f(0).
double total_xsec_optical(const PhaseShiftTable& table);

// 2 pi int_0^pi |f|^2 sin(theta) d(theta) by Gauss-Legendre exact in cos.
double sigma_angular(const PhaseShiftTable& table);

// 2 pi int_0^pi |f|^2 (1 - cos theta) sin theta d theta
double transport_xsec(const PhaseShiftTable& table);

// Forward-cone mass M(delta, k) = 2 pi int_0^delta |f|^2 sin theta d theta
double forward_mass(const PhaseShiftTable& table, double delta);

// int |f|^2 phi(theta) dmu over the sphere for a smooth axisymmetric phi.
double amplitude_moment(const PhaseShiftTable& table, const std::function<double(double)>& phi,
                        int n_nodes = 0);

// Far-field amplitude recovered from the scattered field on the sphere of
// radius R > R_sup:
//   f = gamma_n oint [du/dr + i k <omega, x/R> u] e^{-i k <omega, x>} dmu(x).
// Doubles the quadrature order internally and insists both agree.
std::complex<double> surface_integral_amplitude(const Potential<3>& pot, const PhaseShiftTable& table,
                                                double theta_omega, double radius,
                                                int n_theta = 0, int n_phi = 0);

}  // namespace sclab
