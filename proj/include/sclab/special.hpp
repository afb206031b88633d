#pragma once

#include <vector>

namespace sclab {

struct Quadrature {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
};

// Gauss-Legendre rule on [-1, 1].
Quadrature gauss_legendre(int n);

// Same rule mapped to [a, b].
Quadrature gauss_legendre(int n, double a, double b);

// P_0..P_lmax at x via the three-term recurrence (stable upward on [-1,1]).
void legendre_all(int lmax, double x, std::vector<double>& p);

// Riccati-Bessel functions xj_l(x) and xy_l(x) with their x-derivatives,
// l = 0..lmax. j is generated by downward (Miller) recurrence, y upward.
struct RiccatiBessel {
  std::vector<double> j, jp, y, yp;
};
RiccatiBessel riccati_bessel(int lmax, double x);

}  // namespace sclab
