#pragma once

// Smooth compactly supported potentials built from translated bump parts
// q0 * exp(1 - 1/(1 - |x-c|^2/rho^2)), each exactly zero outside its ball.
// The incoming direction is fixed to the +N-th coordinate axis and particles
// are launched from the plane x_N = -a with a > R_sup.

#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "sclab/geom.hpp"
#include "sclab/region.hpp"

namespace sclab {

template <int N>
struct BumpPart {
  Vec<N> center{};
  double radius = 1.0;
  double amplitude = 0.0;
};

template <int N>
class Potential {
  static_assert(N == 2 || N == 3, "only planar and spatial scattering are supported");

 public:
  using RegionType = std::conditional_t<N == 3, DiskRegion, IntervalRegion>;

  Potential(std::vector<BumpPart<N>> parts, double plane_offset)
      : parts_(std::move(parts)), a_(plane_offset) {
    for (const auto& p : parts_) {
      if (p.radius <= 0) throw std::invalid_argument("Potential: part radius must be positive");
      if (p.amplitude != 0.0) r_sup_ = std::max(r_sup_, norm(p.center) + p.radius);
    }
    if (!(a_ > r_sup_)) throw std::invalid_argument("Potential: plane offset must exceed R_sup");
    check_positive_total_energy();
    build_impact_set();
  }

  int dimension() const { return N; }
  const std::vector<BumpPart<N>>& parts() const { return parts_; }
  double support_radius() const { return r_sup_; }
  double plane_offset() const { return a_; }
  const RegionType& impact_set() const { return impact_; }

  // True for a single part centered at the origin (the radial oracle case).
  bool is_radial() const {
    return parts_.size() == 1 && norm(parts_[0].center) == 0.0;
  }

  double operator()(const Vec<N>& x) const {
    double q = 0;
    for (const auto& p : parts_) q += part_value(p, x);
    return q;
  }

  // Radial profile q(r) for radial potentials.
  double radial(double r) const {
    Vec<N> x{};
    x[0] = r;
    return (*this)(x);
  }

  Vec<N> gradient(const Vec<N>& x) const {
    Vec<N> g{};
    for (const auto& p : parts_) {
      Vec<N> d = x - p.center;
      double u = dot(d, d) / (p.radius * p.radius);
      double t = 1.0 - u;
      if (t <= kTMin) continue;
      double w = p.amplitude * std::exp(1.0 - 1.0 / t);
      double f = -2.0 * w / (t * t * p.radius * p.radius);
      for (int i = 0; i < N; ++i) g[i] += f * d[i];
    }
    return g;
  }

  Mat<N, N> hessian(const Vec<N>& x) const {
    Mat<N, N> h{};
    for (const auto& p : parts_) {
      Vec<N> d = x - p.center;
      double rho2 = p.radius * p.radius;
      double u = dot(d, d) / rho2;
      double t = 1.0 - u;
      if (t <= kTMin) continue;
      double w = p.amplitude * std::exp(1.0 - 1.0 / t);
      double crr = -4.0 * w * (2.0 * t - 1.0) / (t * t * t * t * rho2 * rho2);
      double cid = -2.0 * w / (t * t * rho2);
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) h(i, j) += crr * d[i] * d[j];
        h(i, i) += cid;
      }
    }
    return h;
  }

 private:
  static constexpr double kTMin = 1e-12;

  static double part_value(const BumpPart<N>& p, const Vec<N>& x) {
    Vec<N> d = x - p.center;
    double u = dot(d, d) / (p.radius * p.radius);
    double t = 1.0 - u;
    if (t <= kTMin) return 0.0;
    return p.amplitude * std::exp(1.0 - 1.0 / t);
  }

  // 1 + q > 0 must hold everywhere for unit-energy rays to have positive
  // speed. Sums of positive parts pass trivially; otherwise scan a grid over
  // the support box and polish the minimum with a few descent steps.
  void check_positive_total_energy() {
    bool any_negative = false;
    for (const auto& p : parts_) any_negative |= p.amplitude < 0;
    if (!any_negative) return;
    double qmin = 0;
    Vec<N> argmin{};
    const int g = (N == 3) ? 41 : 201;
    Vec<N> lo{}, hi{};
    for (int i = 0; i < N; ++i) {
      lo[i] = -r_sup_;
      hi[i] = r_sup_;
    }
    Vec<N> x{};
    auto scan = [&](auto&& self, int dim) -> void {
      if (dim == N) {
        double q = (*this)(x);
        if (q < qmin) {
          qmin = q;
          argmin = x;
        }
        return;
      }
      for (int i = 0; i < g; ++i) {
        x[dim] = lo[dim] + (hi[dim] - lo[dim]) * i / (g - 1.0);
        self(self, dim + 1);
      }
    };
    scan(scan, 0);
    // Polish by gradient descent from the grid minimum.
    Vec<N> x0 = argmin;
    for (int it = 0; it < 200; ++it) {
      Vec<N> gr = gradient(x0);
      double gn = norm(gr);
      if (gn < 1e-14) break;
      double step = 0.01 * r_sup_;
      Vec<N> trial = x0 - (step / gn) * gr;
      while (step > 1e-12 && (*this)(trial) > (*this)(x0)) {
        step *= 0.5;
        trial = x0 - (step / gn) * gr;
      }
      x0 = trial;
    }
    qmin = std::min(qmin, (*this)(x0));
    if (1.0 + qmin <= 1e-9)
      throw std::invalid_argument("Potential: 1 + q must stay positive (min 1+q = " +
                                  std::to_string(1.0 + qmin) + ")");
  }

  // Projection of supp q; parts with zero amplitude have empty support.
  void build_impact_set() {
    if constexpr (N == 3) {
      std::vector<Disk> ds;
      for (const auto& p : parts_)
        if (p.amplitude != 0.0) ds.push_back({{p.center[0], p.center[1]}, p.radius});
      impact_ = DiskRegion(ds);
    } else {
      std::vector<Interval> iv;
      for (const auto& p : parts_)
        if (p.amplitude != 0.0) iv.push_back({p.center[0] - p.radius, p.center[0] + p.radius});
      impact_ = IntervalRegion(iv);
    }
  }

  std::vector<BumpPart<N>> parts_;
  double a_ = 0;
  double r_sup_ = 0;
  RegionType impact_;
};

template <int N>
inline double eval_q(const Potential<N>& pot, const Vec<N>& x) {
  return pot(x);
}

template <int N>
inline Vec<N> grad_q(const Potential<N>& pot, const Vec<N>& x) {
  return pot.gradient(x);
}

template <int N>
inline Mat<N, N> hess_q(const Potential<N>& pot, const Vec<N>& x) {
  return pot.hessian(x);
}

template <int N>
inline double sigma_cl(const Potential<N>& pot) {
  return pot.impact_set().measure();
}

}  // namespace sclab
