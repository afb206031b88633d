#include "sclab/quantum.hpp"

#include <algorithm>
#include <cmath>

#include "sclab/errors.hpp"
#include "sclab/ode.hpp"
#include "sclab/special.hpp"

namespace sclab {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

struct RadialRhs {
  const Potential<3>* pot;
  double k2;
  double ll1;  // l(l+1)

  void operator()(double r, const State<2>& u, State<2>& du) const {
    du[0] = u[1];
    du[1] = (ll1 / (r * r) - k2 * (1.0 + pot->radial(r))) * u[0];
  }
};

// Integrate the regular solution for one partial wave up to r_match and
// return the logarithmic derivative u'/u there. The overall scale is
// irrelevant, so the state is renormalized whenever it grows too large.
double log_derivative(const Potential<3>& pot, double k, int l, double r_match,
                      const PhaseShiftOptions& opts) {
  double r_sup = pot.support_radius();
  // Under the centrifugal barrier the regular solution dominates going
  // outward, so high waves may start at a fraction of the turning radius;
  // low waves start from the power-law region near the origin.
  double r_start = opts.r0;
  if (l > 8) r_start = std::max(opts.r0, std::min(0.25 * (l + 0.5) / k, 0.6 * r_sup));

  RadialRhs rhs{&pot, k * k, static_cast<double>(l) * (l + 1.0)};
  Dopri5<2, RadialRhs> stepper(rhs, opts.rel_tol, opts.abs_tol);
  State<2> u = {1.0, (l + 1.0) / r_start};
  stepper.init(r_start, u);
  stepper.set_max_step(0.25);
  while (stepper.time() < r_match - 1e-12) {
    double remaining = r_match - stepper.time();
    if (remaining < 0.25) stepper.set_max_step(std::max(remaining, 1e-13));
    stepper.step();
    const State<2>& s = stepper.state();
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
      throw MatchFailure("radial solution lost finiteness");
    double m = std::max(std::abs(s[0]), std::abs(s[1]));
    if (m > 1e250) {
      State<2> scaled = {s[0] / m, s[1] / m};
      stepper.init(stepper.time(), scaled);
    }
  }
  // Land exactly on r_match via the dense interpolant of the last step.
  const DenseStep<2>& ds = stepper.last_step();
  double theta = (r_match - ds.s0) / ds.h;
  State<2> um = stepper.state();
  if (theta < 1.0) um = ds.eval(std::max(theta, 0.0));
  if (um[0] == 0.0 || !std::isfinite(um[1] / um[0]))
    throw MatchFailure("ill-conditioned logarithmic derivative at the match radius");
  return um[1] / um[0];
}

}  // namespace

int default_l_max(double k, double r_sup) {
  double x = k * r_sup;
  return static_cast<int>(std::ceil(x)) + static_cast<int>(std::ceil(10.0 * std::cbrt(std::max(x, 0.0)))) + 20;
}

PhaseShiftTable phase_shifts(const Potential<3>& pot, double k, const PhaseShiftOptions& opts) {
  if (!(k > 0)) throw Error("phase_shifts: k must be positive");
  if (!pot.is_radial() && !pot.parts().empty())
    throw Error("phase_shifts: potential must be a single origin-centered bump");

  PhaseShiftTable table;
  table.k = k;
  double r_sup = std::max(pot.support_radius(), 1e-3);
  table.l_max = opts.l_max_override >= 0 ? opts.l_max_override : default_l_max(k, r_sup);
  table.delta.assign(static_cast<std::size_t>(table.l_max) + 1, 0.0);
  if (pot.parts().empty() || pot.parts()[0].amplitude == 0.0) return table;

  double r_match = opts.match_radius > 0 ? opts.match_radius : 1.05 * pot.support_radius();
  if (r_match <= pot.support_radius())
    throw Error("phase_shifts: match radius must clear the support");

  RiccatiBessel rb = riccati_bessel(table.l_max, k * r_match);
  for (int l = 0; l <= table.l_max; ++l) {
    double beta = log_derivative(pot, k, l, r_match, opts);
    std::size_t sl = static_cast<std::size_t>(l);
    double num = k * rb.jp[sl] - beta * rb.j[sl];
    double den = k * rb.yp[sl] - beta * rb.y[sl];
    if (num == 0.0 && den == 0.0) throw MatchFailure("degenerate matching system");
    double d = std::atan2(num, den);
    if (d > 0.5 * M_PI) d -= M_PI;
    if (d <= -0.5 * M_PI) d += M_PI;
    table.delta[sl] = d;
  }
  if (std::abs(table.delta.back()) > opts.tail_tol)
    throw TailNotConverged("phase-shift tail above tolerance at l_max; raise l_max");
  return table;
}

std::complex<double> quantum_amplitude(const PhaseShiftTable& table, double theta) {
  std::vector<double> p;
  legendre_all(table.l_max, std::cos(theta), p);
  std::complex<double> f = 0;
  for (int l = 0; l <= table.l_max; ++l) {
    std::size_t sl = static_cast<std::size_t>(l);
    double d = table.delta[sl];
    f += (2.0 * l + 1.0) * std::exp(kI * d) * std::sin(d) * p[sl];
  }
  return f / table.k;
}

std::complex<double> gamma_n(int n, double k) {
  if (n != 2 && n != 3) throw Error("gamma_n: n must be 2 or 3");
  if (!(k > 0)) throw Error("gamma_n: k must be positive");
  std::complex<double> base = k / (2.0 * M_PI * kI);
  std::complex<double> expnt = (n - 3) / 2.0;
  return -std::pow(base, expnt) / (4.0 * M_PI);
}

double total_xsec_optical(const PhaseShiftTable& table) {
  std::complex<double> f0 = quantum_amplitude(table, 0.0);
  return f0.imag() / (-gamma_n(table.dimension, table.k).real() * table.k);
}

namespace {

// Gauss-Legendre moment of |f|^2 against a weight in x = cos(theta); the
// integrand is a polynomial of degree 2 l_max (+1 with the linear weights),
// so l_max + 8 nodes integrate it exactly.
double pw_moment(const PhaseShiftTable& table, double x_lo, double x_hi,
                 const std::function<double(double)>& weight_of_x, int n_nodes) {
  if (n_nodes <= 0) n_nodes = table.l_max + 8;
  Quadrature q = gauss_legendre(n_nodes, x_lo, x_hi);
  std::vector<double> p;
  double acc = 0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    double x = q.x[i];
    legendre_all(table.l_max, x, p);
    std::complex<double> f = 0;
    for (int l = 0; l <= table.l_max; ++l) {
      std::size_t sl = static_cast<std::size_t>(l);
      double d = table.delta[sl];
      f += (2.0 * l + 1.0) * std::exp(kI * d) * std::sin(d) * p[sl];
    }
    double f2 = std::norm(f) / (table.k * table.k);
    acc += q.w[i] * f2 * weight_of_x(x);
  }
  return 2.0 * M_PI * acc;
}

}  // namespace

double sigma_angular(const PhaseShiftTable& table) {
  return pw_moment(table, -1.0, 1.0, [](double) { return 1.0; }, 0);
}

double transport_xsec(const PhaseShiftTable& table) {
  return pw_moment(table, -1.0, 1.0, [](double x) { return 1.0 - x; }, 0);
}

double forward_mass(const PhaseShiftTable& table, double delta) {
  return pw_moment(table, std::cos(delta), 1.0, [](double) { return 1.0; }, 0);
}

double amplitude_moment(const PhaseShiftTable& table, const std::function<double(double)>& phi,
                        int n_nodes) {
  if (n_nodes <= 0) n_nodes = 2 * table.l_max + 64;
  return pw_moment(table, -1.0, 1.0, [&](double x) { return phi(std::acos(std::clamp(x, -1.0, 1.0))); },
                   n_nodes);
}

namespace {

std::complex<double> surface_integral_once(const PhaseShiftTable& table, double theta_omega,
                                           double radius, int n_theta, int n_phi) {
  double k = table.k;
  double x = k * radius;
  RiccatiBessel rb = riccati_bessel(table.l_max, x);

  // Scattered field u = sum_l (2l+1) i^{l+1} e^{i d} sin d h^(1)_l(kr) P_l,
  // spherical h from the Riccati pair: h = (jhat + i yhat)/x.
  std::vector<std::complex<double>> cu(static_cast<std::size_t>(table.l_max) + 1);
  std::vector<std::complex<double>> cdu(cu.size());
  std::complex<double> il{0.0, 1.0};  // i^{l+1} for l = 0
  for (int l = 0; l <= table.l_max; ++l) {
    std::size_t sl = static_cast<std::size_t>(l);
    double d = table.delta[sl];
    std::complex<double> amp = (2.0 * l + 1.0) * il * std::exp(kI * d) * std::sin(d);
    std::complex<double> h = (rb.j[sl] + kI * rb.y[sl]) / x;
    // d/dr of h_l(kr): k (hhat' x - hhat)/x^2 with hhat = x h.
    std::complex<double> hp = k * ((rb.jp[sl] + kI * rb.yp[sl]) * x - (rb.j[sl] + kI * rb.y[sl])) / (x * x);
    cu[sl] = amp * h;
    cdu[sl] = amp * hp;
    il *= kI;
  }

  Quadrature gq = gauss_legendre(n_theta, -1.0, 1.0);
  double st_om = std::sin(theta_omega), ct_om = std::cos(theta_omega);
  std::vector<double> p;
  std::complex<double> acc = 0;
  for (int it = 0; it < n_theta; ++it) {
    double ct = gq.x[static_cast<std::size_t>(it)];
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    legendre_all(table.l_max, ct, p);
    std::complex<double> u = 0, dur = 0;
    for (int l = 0; l <= table.l_max; ++l) {
      std::size_t sl = static_cast<std::size_t>(l);
      u += cu[sl] * p[sl];
      dur += cdu[sl] * p[sl];
    }
    std::complex<double> row = 0;
    for (int ip = 0; ip < n_phi; ++ip) {
      double phi = 2.0 * M_PI * ip / n_phi;
      double owx = st_om * st * std::cos(phi) + ct_om * ct;  // <omega, x/R>
      std::complex<double> integrand = (dur + kI * k * owx * u) * std::exp(-kI * (k * radius * owx));
      row += integrand;
    }
    acc += gq.w[static_cast<std::size_t>(it)] * row * (2.0 * M_PI / n_phi);
  }
  return gamma_n(3, k) * acc * (radius * radius);
}

}  // namespace

std::complex<double> surface_integral_amplitude(const Potential<3>& pot, const PhaseShiftTable& table,
                                                double theta_omega, double radius,
                                                int n_theta, int n_phi) {
  if (radius <= pot.support_radius())
    throw Error("surface_integral_amplitude: sphere must enclose the support");
  if (n_theta <= 0) n_theta = std::max<int>(48, static_cast<int>(0.75 * (table.k * radius + table.l_max)));
  if (n_phi <= 0) n_phi = std::max<int>(64, static_cast<int>(0.8 * table.k * radius) + table.l_max / 2);
  std::complex<double> f1 = surface_integral_once(table, theta_omega, radius, n_theta, n_phi);
  std::complex<double> f2 = surface_integral_once(table, theta_omega, radius, 2 * n_theta, 2 * n_phi);
  if (std::abs(f2 - f1) > 1e-6)
    throw QuadratureUnderResolved("surface integral moved by more than 1e-6 under order doubling");
  return f2;
}

}  // namespace sclab
