#pragma once

// Everything on the geometric-optics side: inversion of the direction map
// J(y) = omega by multi-start Newton, the classical differential cross
// section, pushforward integrals over the impact region, the radial
// deflection-integral oracle, and the empirical assumption checkers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "sclab/errors.hpp"
#include "sclab/geom.hpp"
#include "sclab/potential.hpp"
#include "sclab/ray.hpp"

namespace sclab {

// Dimension-free view of a branch, enough for amplitude synthesis.
struct BranchData {
  double det_dj = 0;  // signed Jacobian determinant of J at y_j
  double phase_f = 0;
  int maslov = 0;
};

template <int N>
struct Branch {
  Vec<N - 1> y{};
  Vec<N> omega{};
  double det_dj = 0;
  double phase_f = 0;
  int maslov = 0;
  BranchData data() const { return {det_dj, phase_f, maslov}; }
};

struct BranchSearchOptions {
  int seed_grid = 80;
  double angle_tol = 1e-10;
  double dedup_radius = 1e-5;
  double nonregular_threshold = 1e-8;
  int max_newton_iters = 40;
  bool fine_center_seeds = true;  // extra polar seeds near part centers
};

template <int N>
struct BranchSearch {
  std::vector<Branch<N>> branches;
  std::vector<Vec<N - 1>> stalled;  // Newton undecided close to the target

  bool any_nonregular(double thresh) const {
    for (const auto& b : branches)
      if (std::abs(b.det_dj) < thresh) return true;
    return false;
  }
};

// |f_cl|^2(omega) = sum_j |det DJ(y_j)|^{-1}
inline double classical_dcs(const std::vector<BranchData>& branches) {
  double s = 0;
  for (const auto& b : branches) s += 1.0 / std::abs(b.det_dj);
  return s;
}

template <int N>
inline double classical_dcs(const std::vector<Branch<N>>& branches,
                            double nonregular_threshold = 1e-8) {
  double s = 0;
  for (const auto& b : branches) {
    if (std::abs(b.det_dj) < nonregular_threshold)
      throw NonregularDirection("classical_dcs: |det DJ| below threshold");
    s += 1.0 / std::abs(b.det_dj);
  }
  return s;
}

// F = S - <omega, x> at a recorded post-exit sample of a ray.
template <int N>
double phase_F(const Ray<N>& ray, std::size_t sample_index) {
  const auto& smp = ray.samples.at(sample_index);
  return smp.action - dot(ray.p_inf, smp.x);
}

template <int N>
double phase_F(const Ray<N>& ray) {
  if (!ray.exited) throw Error("phase_F: ray has not exited");
  return ray.phase_f;
}

namespace detail {

template <int N>
Vec<N - 1> tangent_residual(const Vec<N>& j, const std::array<Vec<N>, N - 1>& tb) {
  Vec<N - 1> r;
  for (int i = 0; i < N - 1; ++i) r[static_cast<std::size_t>(i)] = dot(tb[static_cast<std::size_t>(i)], j);
  return r;
}

}  // namespace detail

// Newton refinement of one preimage of omega starting from y0. Returns the
// converged ray, or nullopt when the iteration leaves the search box or
// cannot make progress.
template <int N>
std::optional<Ray<N>> refine_branch(const Potential<N>& pot, Vec<N - 1> y0, const Vec<N>& omega,
                                    const BranchSearchOptions& bopts, const IntegratorOptions& iopts_in) {
  IntegratorOptions iopts = iopts_in;
  iopts.record_samples = false;
  auto tb = tangent_basis<N>(omega);
  auto bb = [&] {
    if constexpr (N == 3) {
      auto b = pot.impact_set().bounding_box();
      return std::array<double, 4>{b[0], b[1], b[2], b[3]};
    } else {
      auto b = pot.impact_set().bounding_box();
      return std::array<double, 4>{b[0], b[1], 0, 0};
    }
  }();
  double span = std::max(bb[1] - bb[0], bb[3] - bb[2]);
  double margin = 0.1 * span + 1e-9;
  double step_cap = 0.2 * span + 1e-9;

  Vec<N - 1> y = y0;
  for (int it = 0; it < bopts.max_newton_iters; ++it) {
    Ray<N> ray = trace_ray(pot, y, iopts);
    if (!ray.exited) return std::nullopt;
    if (dot(ray.p_inf, omega) > 0 && angle_between(ray.p_inf, omega) < bopts.angle_tol) {
      return ray;
    }
    // Residual in the tangent chart at omega; Jacobian from the tangent flow.
    Vec<N - 1> res = detail::tangent_residual<N>(ray.p_inf, tb);
    Mat<N - 1, N - 1> jac;
    double pn = norm(ray.p_exit);
    for (int j = 0; j < N - 1; ++j) {
      Vec<N> col = ray.mp_exit.col[static_cast<std::size_t>(j)];
      Vec<N> dpj = (1.0 / pn) * (col - dot(ray.p_inf, col) * ray.p_inf);
      for (int i = 0; i < N - 1; ++i) jac(i, j) = dot(tb[static_cast<std::size_t>(i)], dpj);
    }
    double dj = det(jac);
    if (!(std::abs(dj) > 1e-14)) return std::nullopt;
    Vec<N - 1> delta = solve(jac, -1.0 * res);
    double dn = norm(delta);
    if (dn > step_cap) delta = (step_cap / dn) * delta;
    y = y + delta;
    if constexpr (N == 3) {
      if (y[0] < bb[0] - margin || y[0] > bb[1] + margin || y[1] < bb[2] - margin ||
          y[1] > bb[3] + margin)
        return std::nullopt;
    } else {
      if (y[0] < bb[0] - margin || y[0] > bb[1] + margin) return std::nullopt;
    }
  }
  // Did not converge; report the last iterate so the caller can classify it.
  Ray<N> last = trace_ray(pot, y, iopts);
  if (last.exited && dot(last.p_inf, omega) > 0 && angle_between(last.p_inf, omega) < bopts.angle_tol)
    return last;
  return std::nullopt;
}

namespace detail {

// Seed set for the multi-start search: a uniform grid over the impact
// bounding box plus near-center polar patches (steep maps fold tightly
// around the part axes).
template <int N>
std::vector<Vec<N - 1>> branch_seeds(const Potential<N>& pot, const BranchSearchOptions& bopts) {
  std::vector<Vec<N - 1>> seeds;
  if constexpr (N == 3) {
    auto bb = pot.impact_set().bounding_box();
    int g = bopts.seed_grid;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        seeds.push_back({bb[0] + (bb[1] - bb[0]) * (i + 0.5) / g,
                         bb[2] + (bb[3] - bb[2]) * (j + 0.5) / g});
    if (bopts.fine_center_seeds) {
      for (const auto& part : pot.parts()) {
        for (int ir = 0; ir < 10; ++ir) {
          double b = part.radius * 0.15 * std::pow(10.0, -3.0 * (9 - ir) / 9.0);
          for (int ia = 0; ia < 12; ++ia) {
            double phi = 2.0 * M_PI * (ia + 0.5) / 12.0;
            seeds.push_back({part.center[0] + b * std::cos(phi), part.center[1] + b * std::sin(phi)});
          }
        }
      }
    }
  } else {
    auto bb = pot.impact_set().bounding_box();
    int g = bopts.seed_grid;
    for (int i = 0; i < g; ++i) seeds.push_back({bb[0] + (bb[1] - bb[0]) * (i + 0.5) / g});
    if (bopts.fine_center_seeds) {
      for (const auto& part : pot.parts())
        for (int ir = 0; ir < 10; ++ir) {
          double b = part.radius * 0.15 * std::pow(10.0, -3.0 * (9 - ir) / 9.0);
          seeds.push_back({part.center[0] + b});
          seeds.push_back({part.center[0] - b});
        }
    }
  }
  return seeds;
}

}  // namespace detail

// Multi-start inversion of J with the seed sweep traced once and reused
// across directions.
template <int N>
class BranchFinder {
 public:
  BranchFinder(const Potential<N>& pot, const BranchSearchOptions& bopts,
               const IntegratorOptions& iopts)
      : pot_(&pot), bopts_(bopts), iopts_(iopts) {
    iopts_.record_samples = false;
    if (pot.impact_set().empty()) return;
    seeds_ = detail::branch_seeds(pot, bopts_);
    j_.resize(seeds_.size());
    det_.resize(seeds_.size());
    usable_.assign(seeds_.size(), false);
    for (std::size_t i = 0; i < seeds_.size(); ++i) {
      try {
        Ray<N> r = trace_ray(pot, seeds_[i], iopts_);
        j_[i] = r.p_inf;
        det_[i] = r.det_dj;
        usable_[i] = r.exited;
      } catch (const Error&) {
      }
    }
  }

  BranchSearch<N> find(const Vec<N>& omega) const {
    BranchSearch<N> out;
    if (seeds_.empty()) return out;
    std::vector<double> err(seeds_.size(), 1e9);
    for (std::size_t i = 0; i < seeds_.size(); ++i)
      if (usable_[i])
        err[i] = angle_between(j_[i], omega) + (dot(j_[i], omega) > 0 ? 0.0 : 1.0);

    // Newton starts: local minima of the angular error over the uniform grid
    // (8-neighborhood) plus every near-center patch seed below a loose cut.
    std::vector<std::size_t> starts;
    int g = bopts_.seed_grid;
    std::size_t n_uniform = (N == 3) ? static_cast<std::size_t>(g) * static_cast<std::size_t>(g)
                                     : static_cast<std::size_t>(g);
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(i * g + j); };
    if constexpr (N == 3) {
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
          double e = err[idx(i, j)];
          if (e > 0.5) continue;
          bool is_min = true;
          for (int di = -1; di <= 1 && is_min; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
              if (di == 0 && dj == 0) continue;
              int ii = i + di, jj = j + dj;
              if (ii < 0 || jj < 0 || ii >= g || jj >= g) continue;
              if (err[idx(ii, jj)] < e) {
                is_min = false;
                break;
              }
            }
          if (is_min) starts.push_back(idx(i, j));
        }
    } else {
      for (int i = 0; i < g; ++i) {
        double e = err[static_cast<std::size_t>(i)];
        if (e > 0.5) continue;
        bool is_min = (i == 0 || err[static_cast<std::size_t>(i) - 1] >= e) &&
                      (i == g - 1 || err[static_cast<std::size_t>(i) + 1] >= e);
        if (is_min) starts.push_back(static_cast<std::size_t>(i));
      }
    }
    for (std::size_t i = n_uniform; i < seeds_.size(); ++i)
      if (err[i] < 0.2) starts.push_back(i);

    std::vector<Ray<N>> found;
    for (std::size_t si : starts) {
      if (std::abs(det_[si]) < 1e-13) continue;  // flat region, Newton cannot start
      auto ray = refine_branch(*pot_, seeds_[si], omega, bopts_, iopts_);
      if (ray) {
        found.push_back(*ray);
      } else if (err[si] < 1e-3) {
        out.stalled.push_back(seeds_[si]);
      }
    }

    // Deterministic dedup: sort by launch point, cluster within dedup_radius.
    std::sort(found.begin(), found.end(), [](const Ray<N>& a, const Ray<N>& b) {
      for (int i = 0; i < N - 1; ++i) {
        if (a.y[static_cast<std::size_t>(i)] != b.y[static_cast<std::size_t>(i)])
          return a.y[static_cast<std::size_t>(i)] < b.y[static_cast<std::size_t>(i)];
      }
      return false;
    });
    for (const Ray<N>& r : found) {
      bool dup = false;
      for (const auto& b : out.branches)
        if (norm(r.y - b.y) < bopts_.dedup_radius) dup = true;
      if (dup) continue;
      Branch<N> br;
      br.y = r.y;
      br.omega = r.p_inf;
      br.det_dj = r.det_dj;
      br.phase_f = r.phase_f;
      br.maslov = r.maslov;
      out.branches.push_back(br);
    }
    return out;
  }

 private:
  const Potential<N>* pot_ = nullptr;
  BranchSearchOptions bopts_;
  IntegratorOptions iopts_;
  std::vector<Vec<N - 1>> seeds_;
  std::vector<Vec<N>> j_;
  std::vector<double> det_;
  std::vector<char> usable_;
};

// One-shot convenience wrapper.
template <int N>
BranchSearch<N> find_branches(const Potential<N>& pot, const Vec<N>& omega,
                              const BranchSearchOptions& bopts, const IntegratorOptions& iopts) {
  return BranchFinder<N>(pot, bopts, iopts).find(omega);
}

// Throwing accessor enforcing the regular-direction contract.
template <int N>
std::vector<Branch<N>> require_regular(const BranchSearch<N>& search,
                                       const BranchSearchOptions& bopts) {
  if (!search.stalled.empty())
    throw BranchUncertain("branch search stalled near the target direction");
  for (const auto& b : search.branches)
    if (std::abs(b.det_dj) < bopts.nonregular_threshold)
      throw NonregularDirection("branch with |det DJ| below the regularity threshold");
  return search.branches;
}

// ---------------------------------------------------------------------------
// Flow grids and pushforward integrals

template <int N>
struct FlowGrid {
  std::vector<PlanePoint> nodes;
  std::vector<Vec<N>> j;
  std::vector<double> det_dj;
  std::vector<int> maslov;
  bool radial_shortcut = false;
};

// Evaluate J (and the Jacobian data) on a quadrature grid over the impact
// region. Radial potentials trace one ray per radius and rotate the result
// around the incoming axis.
template <int N>
FlowGrid<N> flow_grid(const Potential<N>& pot, int n_radial, int n_azimuth,
                      const IntegratorOptions& iopts_in) {
  IntegratorOptions iopts = iopts_in;
  iopts.record_samples = false;
  FlowGrid<N> grid;
  if constexpr (N == 3) {
    if (pot.is_radial()) {
      grid.radial_shortcut = true;
      const auto& d = pot.impact_set().disks()[0];
      Quadrature gr = gauss_legendre(n_radial, 0.0, 1.0);
      for (int ir = 0; ir < n_radial; ++ir) {
        double b = d.r * gr.x[static_cast<std::size_t>(ir)];
        double wb = d.r * d.r * gr.x[static_cast<std::size_t>(ir)] *
                    gr.w[static_cast<std::size_t>(ir)] * (2.0 * M_PI / n_azimuth);
        Ray<3> r0 = trace_ray(pot, Vec<2>{b, 0.0}, iopts);
        for (int ia = 0; ia < n_azimuth; ++ia) {
          double phi = 2.0 * M_PI * (ia + 0.5) / n_azimuth;
          double cp = std::cos(phi), sp = std::sin(phi);
          PlanePoint pp;
          pp.y = {b * cp, b * sp};
          pp.w = wb;
          grid.nodes.push_back(pp);
          Vec<3> jrot = {cp * r0.p_inf[0] - sp * r0.p_inf[1],
                         sp * r0.p_inf[0] + cp * r0.p_inf[1], r0.p_inf[2]};
          grid.j.push_back(jrot);
          grid.det_dj.push_back(r0.det_dj);
          grid.maslov.push_back(r0.maslov);
        }
      }
      return grid;
    }
    grid.nodes = pot.impact_set().quadrature(n_radial, n_azimuth);
  } else {
    grid.nodes = pot.impact_set().quadrature(n_radial);
  }
  for (const auto& node : grid.nodes) {
    Vec<N - 1> y{};
    for (int i = 0; i < N - 1; ++i) y[static_cast<std::size_t>(i)] = node.y[static_cast<std::size_t>(i)];
    Ray<N> r = trace_ray(pot, y, iopts);
    grid.j.push_back(r.p_inf);
    grid.det_dj.push_back(r.det_dj);
    grid.maslov.push_back(r.maslov);
  }
  return grid;
}

// int_I phi(J(y)) dy
template <int N>
double pushforward_integral(const FlowGrid<N>& grid, const std::function<double(const Vec<N>&)>& phi) {
  double acc = 0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) acc += grid.nodes[i].w * phi(grid.j[i]);
  return acc;
}

template <int N>
double pushforward_integral(const Potential<N>& pot, const std::function<double(const Vec<N>&)>& phi,
                            int n_radial, int n_azimuth, const IntegratorOptions& iopts) {
  return pushforward_integral(flow_grid(pot, n_radial, n_azimuth, iopts), phi);
}

// Classical mass scattered into the forward cone angle(omega, theta_0) < delta,
// with the cap edge mollified over +-width (C^2 smoothstep).
template <int N>
double classical_cap_mass(const FlowGrid<N>& grid, double delta, double width = 0.02) {
  return pushforward_integral<N>(grid, [&](const Vec<N>& w) {
    double th = std::atan2(
        std::sqrt(std::max(0.0, 1.0 - w[N - 1] * w[N - 1])), w[N - 1]);
    double t = (th - (delta - width)) / (2.0 * width);
    if (t <= 0) return 1.0;
    if (t >= 1) return 0.0;
    double s = t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
    return 1.0 - s;
  });
}

// ---------------------------------------------------------------------------
// Radial deflection oracle

struct DeflectionOptions {
  double quad_tol = 1e-11;
  double orbit_slope_tol = 1e-6;  // |g'(r_min)| below this means orbiting
  int march_points = 4000;
};

// Scattering deflection angle for an impact parameter b against a radial
// potential: Theta = pi - 2 int_{r_min}^inf (b/r^2) (1+q-b^2/r^2)^{-1/2} dr,
// positive toward the incoming axis.
template <int N>
double deflection_radial(const Potential<N>& pot, double b, const DeflectionOptions& dopts = {}) {
  if (!pot.is_radial()) throw Error("deflection_radial: potential is not a single origin bump");
  if (b < 0) throw Error("deflection_radial: negative impact parameter");
  double rho = pot.parts()[0].radius;
  if (b == 0.0 || b >= rho) return 0.0;

  auto g = [&](double r) { return 1.0 + pot.radial(r) - b * b / (r * r); };
  auto gp = [&](double r) {
    Vec<N> x{};
    x[0] = r;
    return pot.gradient(x)[0] + 2.0 * b * b / (r * r * r);
  };

  // Outermost turning point: march down from rho for the first sign change.
  int m = dopts.march_points;
  double r_hi = rho, g_hi = g(rho);
  double r_min = -1;
  double min_g_above = g_hi;
  for (int i = 1; i <= m; ++i) {
    double r = rho * (1.0 - static_cast<double>(i) / m);
    if (r <= 0) r = rho * 1e-12;
    double gv = g(r);
    if (gv <= 0) {
      // Bisect, then polish with Newton.
      double lo = r, hi = r_hi;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-16 * rho) break;
      }
      r_min = 0.5 * (lo + hi);
      for (int it = 0; it < 8; ++it) {
        double der = gp(r_min);
        if (std::abs(der) < 1e-14) break;
        r_min -= g(r_min) / der;
      }
      break;
    }
    min_g_above = std::min(min_g_above, gv);
    r_hi = r;
    g_hi = gv;
  }
  if (r_min <= 0) throw Error("deflection_radial: no turning point found");
  double slope = gp(r_min);
  if (slope < dopts.orbit_slope_tol)
    throw OrbitingDetected("deflection integral diverges: near-double turning point");
  (void)min_g_above;

  // Sweep integral over the support with the square-root substitution
  // r = r_min + t^2, plus the free-field tail in closed form.
  double t_max = std::sqrt(rho - r_min);
  auto integrand = [&](double t) {
    if (t == 0.0) return 2.0 * b / (r_min * r_min * std::sqrt(slope));
    double r = r_min + t * t;
    double gv = g(r);
    if (gv <= 0) gv = slope * t * t;  // guards roundoff right at the turning point
    return 2.0 * t * b / (r * r * std::sqrt(gv));
  };
  double prev = 0, integral = 0;
  for (int panels = 2; panels <= 512; panels *= 2) {
    integral = 0;
    for (int p = 0; p < panels; ++p) {
      double ta = t_max * p / panels, tb = t_max * (p + 1) / panels;
      Quadrature q = gauss_legendre(24, ta, tb);
      for (std::size_t i = 0; i < q.x.size(); ++i) integral += q.w[i] * integrand(q.x[i]);
    }
    if (panels > 2 && std::abs(integral - prev) < dopts.quad_tol) break;
    prev = integral;
  }
  double sweep = integral + std::asin(std::clamp(b / rho, -1.0, 1.0));
  return M_PI - 2.0 * sweep;
}

struct DeflectionTable {
  std::vector<double> b;
  std::vector<double> theta;
};

template <int N>
DeflectionTable deflection_table(const Potential<N>& pot, int nb, const DeflectionOptions& dopts = {}) {
  DeflectionTable t;
  double rho = pot.parts()[0].radius;
  for (int i = 0; i <= nb; ++i) {
    double b = rho * i / nb;
    t.b.push_back(b);
    t.theta.push_back(b >= rho ? 0.0 : deflection_radial(pot, b, dopts));
  }
  return t;
}

// Scattering polar angle in [0, pi] for a signed deflection.
inline double fold_angle(double theta) {
  double t = std::fmod(std::abs(theta), 2.0 * M_PI);
  return t <= M_PI ? t : 2.0 * M_PI - t;
}

// All impact parameters scattering to polar angle theta_star, refined by
// bisection on the quadrature oracle.
template <int N>
std::vector<double> deflection_preimages(const Potential<N>& pot, const DeflectionTable& table,
                                         double theta_star, const DeflectionOptions& dopts = {}) {
  std::vector<double> out;
  auto f = [&](double b) { return fold_angle(b == 0.0 ? 0.0 : deflection_radial(pot, b, dopts)) - theta_star; };
  for (std::size_t i = 1; i < table.b.size(); ++i) {
    double fa = fold_angle(table.theta[i - 1]) - theta_star;
    double fb = fold_angle(table.theta[i]) - theta_star;
    if (fa == 0.0) out.push_back(table.b[i - 1]);
    if (fa * fb < 0) {
      double lo = table.b[i - 1], hi = table.b[i];
      double flo = fa;
      for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0)
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
        if (hi - lo < 1e-12) break;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

// Classical radial differential cross section sum_j (b_j/sin th)|db/dTheta|_j
// from the deflection oracle (independent of the variational flow).
template <int N>
double dcs_radial_oracle(const Potential<N>& pot, const DeflectionTable& table, double theta_star,
                         const DeflectionOptions& dopts = {}) {
  double s = 0;
  for (double b : deflection_preimages(pot, table, theta_star, dopts)) {
    double h = 1e-5 * pot.parts()[0].radius;
    double d1 = deflection_radial(pot, std::min(b + h, pot.parts()[0].radius * (1 - 1e-12)), dopts);
    double d0 = deflection_radial(pot, std::max(b - h, 1e-12), dopts);
    double slope = (d1 - d0) / (2.0 * h);
    if (slope == 0.0) throw NonregularDirection("dcs_radial_oracle: fold point");
    s += b / (std::sin(theta_star) * std::abs(slope));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Assumption checkers (empirical, reporting only)

struct Assumption2Report {
  // fraction of grid nodes with |det DJ| below each threshold
  std::vector<std::pair<double, double>> fractions;
  // interior Newton-converged preimages of the forward direction
  std::vector<std::pair<std::array<double, 2>, double>> forward_preimages;  // (y, det)
  bool degenerate = false;  // q == 0 style: the whole grid is forward-critical
  bool violated = false;    // a converged interior forward preimage is critical
};

template <int N>
Assumption2Report assumption2_check(const FlowGrid<N>& grid, const BranchFinder<N>& finder,
                                    const BranchSearchOptions& bopts) {
  Assumption2Report rep;
  std::vector<double> thresholds = {1e-2, 1e-4, 1e-6, 1e-8};
  for (double t : thresholds) {
    std::size_t n = 0;
    for (double d : grid.det_dj)
      if (std::abs(d) < t) ++n;
    rep.fractions.emplace_back(t, grid.det_dj.empty() ? 0.0 : static_cast<double>(n) / grid.det_dj.size());
  }
  if (grid.det_dj.empty() || rep.fractions.back().second > 0.9) {
    rep.degenerate = true;
    return rep;
  }
  Vec<N> theta0{};
  theta0[N - 1] = 1.0;
  BranchSearch<N> search = finder.find(theta0);
  for (const auto& b : search.branches) {
    std::array<double, 2> y{};
    for (int i = 0; i < N - 1; ++i) y[static_cast<std::size_t>(i)] = b.y[static_cast<std::size_t>(i)];
    rep.forward_preimages.emplace_back(y, b.det_dj);
    if (std::abs(b.det_dj) < bopts.nonregular_threshold) rep.violated = true;
  }
  return rep;
}

struct Assumption3Entry {
  double theta = 0;
  int n_branches = 0;
  std::vector<std::array<double, 3>> pairs;  // (i, j, |grad (F_i - F_j)|)
  bool flagged = false;
};

struct Assumption3Report {
  std::vector<Assumption3Entry> entries;
  int n_flagged = 0;
};

// Tangential gradient of F_i - F_j by finite differences of phase_F over
// nearby directions; near-zero gradients mark critical phase differences.
template <int N>
Assumption3Report assumption3_check(const Potential<N>& pot, const std::vector<Vec<N>>& omegas,
                                    const BranchFinder<N>& finder, const BranchSearchOptions& bopts,
                                    const IntegratorOptions& iopts, double fd_step = 1e-4,
                                    double grad_tol = 1e-6) {
  Assumption3Report rep;
  for (const auto& omega : omegas) {
    Assumption3Entry e;
    e.theta = std::acos(std::clamp(omega[N - 1], -1.0, 1.0));
    BranchSearch<N> search = finder.find(omega);
    e.n_branches = static_cast<int>(search.branches.size());
    if (e.n_branches >= 2) {
      auto tb = tangent_basis<N>(omega);
      // F per branch at omega displaced along each tangent direction.
      std::vector<std::array<double, 2 * (N - 1)>> fd(search.branches.size());
      bool ok = true;
      for (std::size_t bi = 0; bi < search.branches.size() && ok; ++bi) {
        int slot = 0;
        for (int t = 0; t < N - 1; ++t) {
          for (double sgn : {+1.0, -1.0}) {
            Vec<N> wp = normalized(omega + (sgn * fd_step) * tb[static_cast<std::size_t>(t)]);
            auto r = refine_branch(pot, search.branches[bi].y, wp, bopts, iopts);
            if (!r) {
              ok = false;
              break;
            }
            fd[bi][static_cast<std::size_t>(slot++)] = r->phase_f;
          }
          if (!ok) break;
        }
      }
      if (ok) {
        for (std::size_t i = 0; i < search.branches.size(); ++i)
          for (std::size_t j = i + 1; j < search.branches.size(); ++j) {
            double g2 = 0;
            for (int t = 0; t < N - 1; ++t) {
              double gi = (fd[i][static_cast<std::size_t>(2 * t)] - fd[i][static_cast<std::size_t>(2 * t + 1)]) / (2.0 * fd_step);
              double gj = (fd[j][static_cast<std::size_t>(2 * t)] - fd[j][static_cast<std::size_t>(2 * t + 1)]) / (2.0 * fd_step);
              g2 += (gi - gj) * (gi - gj);
            }
            double gn = std::sqrt(g2);
            e.pairs.push_back({static_cast<double>(i), static_cast<double>(j), gn});
            if (gn < grad_tol) e.flagged = true;
          }
      }
    }
    if (e.flagged) ++rep.n_flagged;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace sclab
