#include "sclab/special.hpp"

#include <cmath>
#include <stdexcept>

namespace sclab {

Quadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  Quadrature q;
  q.x.resize(static_cast<std::size_t>(n));
  q.w.resize(static_cast<std::size_t>(n));
  // Newton on P_n from the Chebyshev-like initial guess; symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) {
        p1 = x;
      }
      for (int l = 1; l < n; ++l) {
        double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.x[static_cast<std::size_t>(i)] = -x;
    q.x[static_cast<std::size_t>(n - 1 - i)] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.w[static_cast<std::size_t>(i)] = w;
    q.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return q;
}

Quadrature gauss_legendre(int n, double a, double b) {
  Quadrature q = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    q.x[i] = mid + half * q.x[i];
    q.w[i] *= half;
  }
  return q;
}

void legendre_all(int lmax, double x, std::vector<double>& p) {
  p.resize(static_cast<std::size_t>(lmax) + 1);
  p[0] = 1.0;
  if (lmax == 0) return;
  p[1] = x;
  for (int l = 1; l < lmax; ++l)
    p[static_cast<std::size_t>(l) + 1] =
        ((2.0 * l + 1.0) * x * p[static_cast<std::size_t>(l)] -
         l * p[static_cast<std::size_t>(l) - 1]) /
        (l + 1.0);
}

RiccatiBessel riccati_bessel(int lmax, double x) {
  if (!(x > 0)) throw std::invalid_argument("riccati_bessel: x <= 0");
  RiccatiBessel rb;
  std::size_t m = static_cast<std::size_t>(lmax) + 1;
  rb.j.assign(m, 0.0);
  rb.jp.assign(m, 0.0);
  rb.y.assign(m, 0.0);
  rb.yp.assign(m, 0.0);

  // y_l by upward recurrence (stable in l).
  rb.y[0] = -std::cos(x);
  if (lmax >= 1) rb.y[1] = -std::cos(x) / x - std::sin(x);
  for (int l = 1; l < lmax; ++l)
    rb.y[static_cast<std::size_t>(l) + 1] =
        (2.0 * l + 1.0) / x * rb.y[static_cast<std::size_t>(l)] -
        rb.y[static_cast<std::size_t>(l) - 1];

  // j_l by downward (Miller) recurrence with periodic rescaling; the final
  // normalization against j_0 = sin x removes the arbitrary seed scale.
  int ltop = lmax + 16 + static_cast<int>(std::sqrt(40.0 * lmax + 100.0));
  double up1 = 0.0, u = 1e-280;
  std::vector<double> tmp(static_cast<std::size_t>(ltop) + 1, 0.0);
  tmp[static_cast<std::size_t>(ltop)] = u;
  for (int l = ltop; l >= 1; --l) {
    double um1 = (2.0 * l + 1.0) / x * u - up1;
    up1 = u;
    u = um1;
    tmp[static_cast<std::size_t>(l) - 1] = u;
    if (std::abs(u) > 1e250) {
      for (int ll = l - 1; ll <= ltop; ++ll) tmp[static_cast<std::size_t>(ll)] *= 1e-250;
      u *= 1e-250;
      up1 *= 1e-250;
    }
  }
  double scale = std::sin(x) / tmp[0];
  for (int l = 0; l <= lmax; ++l) rb.j[static_cast<std::size_t>(l)] = tmp[static_cast<std::size_t>(l)] * scale;

  // Derivatives from u'_l = u_{l-1} - (l/x) u_l (same form for j and y).
  rb.jp[0] = std::cos(x);
  rb.yp[0] = std::sin(x);
  for (int l = 1; l <= lmax; ++l) {
    std::size_t sl = static_cast<std::size_t>(l);
    rb.jp[sl] = rb.j[sl - 1] - l / x * rb.j[sl];
    rb.yp[sl] = rb.y[sl - 1] - l / x * rb.y[sl];
  }
  return rb;
}

}  // namespace sclab
