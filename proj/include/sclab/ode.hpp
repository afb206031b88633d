#pragma once

// Embedded Dormand-Prince 5(4) step with the classic 4th-order continuous
// extension. The state dimension is a compile-time constant, so the hot path
// is allocation-free. Coefficients follow Hairer/Norsett/Wanner's DOPRI5.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "sclab/errors.hpp"

namespace sclab {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct DenseStep {
  double s0 = 0, h = 0;
  State<N> c1{}, c2{}, c3{}, c4{}, c5{};

  // Interpolant at s0 + theta*h, theta in [0,1].
  State<N> eval(double theta) const {
    State<N> y;
    double th1 = 1.0 - theta;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = c1[i] + theta * (c2[i] + th1 * (c3[i] + theta * (c4[i] + th1 * c5[i])));
    return y;
  }
};

template <std::size_t N, class Rhs>
class Dopri5 {
 public:
  Dopri5(Rhs rhs, double rel_tol, double abs_tol) : rhs_(rhs), rtol_(rel_tol), atol_(abs_tol) {}

  void init(double s, const State<N>& y) {
    s_ = s;
    y_ = y;
    rhs_(s_, y_, k1_);
    h_ = 1e-4;
    have_h_ = false;
  }

  double time() const { return s_; }
  const State<N>& state() const { return y_; }
  const State<N>& deriv() const { return k1_; }  // FSAL derivative at current point
  const DenseStep<N>& last_step() const { return dense_; }

  void suggest_step(double h) {
    h_ = h;
    have_h_ = true;
  }

  void set_max_step(double hmax) { hmax_ = hmax; }

  // Advance one accepted step; returns the new time.
  double step() {
    if (!have_h_) {
      h_ = initial_step();
      have_h_ = true;
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
      h_ = std::min(h_, hmax_);
      double err = try_step(h_);
      if (err <= 1.0) {
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        double h_done = h_;
        h_ = h_done * std::clamp(fac, 0.2, 5.0);
        accept(h_done);
        return s_;
      }
      double fac = 0.9 * std::pow(err, -0.2);
      h_ *= std::clamp(fac, 0.1, 0.9);
      if (!(h_ > 1e-15)) throw Error("ode: step size underflow");
    }
    throw Error("ode: repeated step rejection");
  }

 private:
  double initial_step() {
    // Crude but safe: scale from the first derivative.
    double dn = 0, yn = 0;
    for (std::size_t i = 0; i < N; ++i) {
      dn = std::max(dn, std::abs(k1_[i]));
      yn = std::max(yn, std::abs(y_[i]));
    }
    double h = (dn > 0) ? 0.01 * (1.0 + yn) / dn : 1e-2;
    return std::min(h, hmax_);
  }

  // Computes stages for step size h from (s_, y_, k1_); fills ynew_, know_,
  // and the error estimate. Returns the scaled error norm.
  double try_step(double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    State<N> t;
    for (std::size_t i = 0; i < N; ++i) t[i] = y_[i] + h * a21 * k1_[i];
    rhs_(s_ + c2 * h, t, k2_);
    for (std::size_t i = 0; i < N; ++i) t[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    rhs_(s_ + c3 * h, t, k3_);
    for (std::size_t i = 0; i < N; ++i)
      t[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    rhs_(s_ + c4 * h, t, k4_);
    for (std::size_t i = 0; i < N; ++i)
      t[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    rhs_(s_ + c5 * h, t, k5_);
    for (std::size_t i = 0; i < N; ++i)
      t[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
    rhs_(s_ + h, t, k6_);
    for (std::size_t i = 0; i < N; ++i)
      ynew_[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    rhs_(s_ + h, ynew_, k7_);

    double err2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                      e7 * k7_[i]);
      double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      err2 += (e / sc) * (e / sc);
    }
    return std::sqrt(err2 / static_cast<double>(N));
  }

  void accept(double h) {
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    dense_.s0 = s_;
    dense_.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      double yd = ynew_[i] - y_[i];
      double bspl = h * k1_[i] - yd;
      dense_.c1[i] = y_[i];
      dense_.c2[i] = yd;
      dense_.c3[i] = bspl;
      dense_.c4[i] = yd - h * k7_[i] - bspl;
      dense_.c5[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                          d7 * k7_[i]);
    }
    s_ += h;
    y_ = ynew_;
    k1_ = k7_;  // FSAL
  }

  Rhs rhs_;
  double rtol_, atol_;
  double s_ = 0, h_ = 0, hmax_ = 1e30;
  bool have_h_ = false;
  State<N> y_{}, ynew_{};
  State<N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
  DenseStep<N> dense_{};
};

}  // namespace sclab
