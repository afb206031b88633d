#pragma once

// Bicharacteristic tracer: integrates dx/ds = 2p, dp/ds = grad q with the
// action S and the tangent (variational) flow, watches det D(x)/D(y,s) for
// caustic crossings, and finishes rays analytically once they leave the
// support ball (the trajectory is an exact straight line from there on).

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "sclab/errors.hpp"
#include "sclab/geom.hpp"
#include "sclab/ode.hpp"
#include "sclab/potential.hpp"

namespace sclab {

struct IntegratorOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-12;
  double t_max = 0;             // 0: auto, 50 * (a + R_exit)
  double exit_radius = 0;       // 0: auto, R_sup + 0.5
  double dense_output_step = 0.02;
  double energy_tol = 1e-8;
  bool record_samples = true;

  void validate() const {
    if (!(rel_tol > 0) || rel_tol > 1e-4 || !(abs_tol > 0) || abs_tol > 1e-4)
      throw ConfigError("IntegratorOptions: tolerances must lie in (0, 1e-4]");
  }
};

template <int N>
struct RaySample {
  double s = 0;
  Vec<N> x{}, p{};
  double action = 0;
  Mat<N, N - 1> mx{}, mp{};
  double det_xys = 0;  // det D(x)/D(y,s)
};

template <int N>
struct Ray {
  Vec<N - 1> y{};
  std::vector<RaySample<N>> samples;
  bool exited = false;
  double exit_time = 0;
  Vec<N> x_exit{}, p_exit{};
  Mat<N, N - 1> mx_exit{}, mp_exit{};
  double action_exit = 0;
  Vec<N> p_inf{};       // J(y), unit
  double det_dj = 0;    // det of DJ/Dy in the canonical tangent basis at p_inf
  int maslov = 0;
  double energy_drift = 0;
  double phase_f = 0;   // S - <p_inf, x> on the outgoing line
};

namespace detail {

template <int N>
constexpr std::size_t state_dim() {
  return 2 * N + 1 + 2 * N * (N - 1);
}

// State layout: x[N], p[N], S, Mx (col-major, N x (N-1)), Mp (same shape).
template <int N>
struct RayState {
  static constexpr std::size_t kS = 2 * N;
  static constexpr std::size_t kMx = 2 * N + 1;
  static constexpr std::size_t kMp = kMx + N * (N - 1);

  static Vec<N> x(const State<state_dim<N>()>& u) {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = u[static_cast<std::size_t>(i)];
    return v;
  }
  static Vec<N> p(const State<state_dim<N>()>& u) {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = u[N + static_cast<std::size_t>(i)];
    return v;
  }
  static Mat<N, N - 1> mx(const State<state_dim<N>()>& u) {
    Mat<N, N - 1> m;
    for (int c = 0; c < N - 1; ++c)
      for (int r = 0; r < N; ++r) m(r, c) = u[kMx + static_cast<std::size_t>(c * N + r)];
    return m;
  }
  static Mat<N, N - 1> mp(const State<state_dim<N>()>& u) {
    Mat<N, N - 1> m;
    for (int c = 0; c < N - 1; ++c)
      for (int r = 0; r < N; ++r) m(r, c) = u[kMp + static_cast<std::size_t>(c * N + r)];
    return m;
  }

  // det [ Mx | 2p ]
  static double det_xys(const State<state_dim<N>()>& u) {
    Mat<N, N> m;
    for (int c = 0; c < N - 1; ++c)
      for (int r = 0; r < N; ++r) m(r, c) = u[kMx + static_cast<std::size_t>(c * N + r)];
    for (int r = 0; r < N; ++r) m(r, N - 1) = 2.0 * u[N + static_cast<std::size_t>(r)];
    return det(m);
  }
};

template <int N>
struct RayRhs {
  const Potential<N>* pot;

  void operator()(double, const State<state_dim<N>()>& u, State<state_dim<N>()>& du) const {
    using L = RayState<N>;
    Vec<N> x = L::x(u);
    Vec<N> g = pot->gradient(x);
    Mat<N, N> h = pot->hessian(x);
    double p2 = 0;
    for (int i = 0; i < N; ++i) {
      double pi = u[N + static_cast<std::size_t>(i)];
      du[static_cast<std::size_t>(i)] = 2.0 * pi;  // x' = 2p
      du[N + static_cast<std::size_t>(i)] = g[i];  // p' = grad q
      p2 += pi * pi;
    }
    du[L::kS] = 2.0 * p2;  // S' = <p, dx/ds>
    for (int c = 0; c < N - 1; ++c) {
      for (int r = 0; r < N; ++r) {
        du[L::kMx + static_cast<std::size_t>(c * N + r)] =
            2.0 * u[L::kMp + static_cast<std::size_t>(c * N + r)];
        double acc = 0;
        for (int k = 0; k < N; ++k)
          acc += h(r, k) * u[L::kMx + static_cast<std::size_t>(c * N + k)];
        du[L::kMp + static_cast<std::size_t>(c * N + r)] = acc;
      }
    }
  }
};

// Count positive roots of det[Mx + 2 tau Mp | 2p] for the straight outgoing
// line. Throws DegenerateCaustic on (near-)double roots.
template <int N>
int post_exit_caustics(const Mat<N, N - 1>& mx, const Mat<N, N - 1>& mp, const Vec<N>& p);

template <>
inline int post_exit_caustics<2>(const Mat<2, 1>& mx, const Mat<2, 1>& mp, const Vec<2>& p) {
  double c0 = det2(mx(0, 0), 2.0 * p[0], mx(1, 0), 2.0 * p[1]);
  double c1 = 2.0 * det2(mp(0, 0), 2.0 * p[0], mp(1, 0), 2.0 * p[1]);
  if (std::abs(c1) < 1e-14 * (std::abs(c0) + 1e-300)) return 0;
  double tau = -c0 / c1;
  return tau > 1e-9 ? 1 : 0;
}

template <>
inline int post_exit_caustics<3>(const Mat<3, 2>& mx, const Mat<3, 2>& mp, const Vec<3>& p) {
  auto det3c = [](const Vec<3>& a, const Vec<3>& b, const Vec<3>& c) {
    return dot(a, cross(b, c));
  };
  Vec<3> a1 = mx.col[0], a2 = mx.col[1];
  Vec<3> b1 = mp.col[0], b2 = mp.col[1];
  Vec<3> pp = 2.0 * p;
  double c0 = det3c(a1, a2, pp);
  double c1 = 2.0 * (det3c(b1, a2, pp) + det3c(a1, b2, pp));
  double c2 = 4.0 * det3c(b1, b2, pp);
  double scale = std::abs(c0) + std::abs(c1) + std::abs(c2) + 1e-300;
  if (std::abs(c2) < 1e-13 * scale) {
    if (std::abs(c1) < 1e-13 * scale) return 0;
    double tau = -c0 / c1;
    return tau > 1e-9 ? 1 : 0;
  }
  double disc = c1 * c1 - 4.0 * c2 * c0;
  if (std::abs(disc) < 1e-12 * (c1 * c1 + std::abs(4.0 * c2 * c0) + 1e-300))
    throw DegenerateCaustic("post-exit caustic has a near-double root");
  if (disc < 0) return 0;
  double sd = std::sqrt(disc);
  double q = -0.5 * (c1 + (c1 >= 0 ? sd : -sd));
  double t1 = q / c2;
  double t2 = (q != 0) ? c0 / q : 0.0;
  int n = 0;
  if (t1 > 1e-9) ++n;
  if (t2 > 1e-9) ++n;
  return n;
}

}  // namespace detail

// Trace the bicharacteristic launched from (y, -a) with momentum along the
// incoming axis. Integration stops once the ray is outside the support ball
// and moving outward; everything beyond is handled in closed form.
template <int N>
Ray<N> trace_ray(const Potential<N>& pot, const Vec<N - 1>& y, const IntegratorOptions& opts_in) {
  using L = detail::RayState<N>;
  constexpr std::size_t SD = detail::state_dim<N>();

  IntegratorOptions opts = opts_in;
  opts.validate();
  double r_sup = pot.support_radius();
  double a = pot.plane_offset();
  if (opts.exit_radius <= 0) opts.exit_radius = r_sup + 0.5;
  if (opts.exit_radius <= r_sup) throw ConfigError("IntegratorOptions: exit_radius must exceed R_sup");
  if (opts.t_max <= 0) opts.t_max = 50.0 * (a + opts.exit_radius);

  State<SD> u{};
  for (int i = 0; i < N - 1; ++i) u[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
  u[N - 1] = -a;
  u[2 * N - 1] = 1.0;  // p = theta_0 (the +N axis)
  u[L::kS] = -a;
  for (int j = 0; j < N - 1; ++j) u[L::kMx + static_cast<std::size_t>(j * N + j)] = 1.0;

  Ray<N> ray;
  ray.y = y;

  detail::RayRhs<N> rhs{&pot};
  Dopri5<SD, detail::RayRhs<N>> stepper(rhs, opts.rel_tol, opts.abs_tol);
  stepper.init(0.0, u);
  stepper.set_max_step(0.5 * (a + opts.exit_radius));

  auto energy = [&](const State<SD>& st) {
    Vec<N> x = L::x(st), p = L::p(st);
    return dot(p, p) - pot(x) - 1.0;
  };
  auto record = [&](double s, const State<SD>& st) {
    if (!opts.record_samples) return;
    RaySample<N> smp;
    smp.s = s;
    smp.x = L::x(st);
    smp.p = L::p(st);
    smp.action = st[L::kS];
    smp.mx = L::mx(st);
    smp.mp = L::mp(st);
    smp.det_xys = L::det_xys(st);
    ray.samples.push_back(smp);
  };

  record(0.0, u);
  double prev_det = L::det_xys(u);
  double det_scale = std::abs(prev_det);
  int consecutive_tiny = 0;

  bool done = false;
  while (!done) {
    double s_new = stepper.step();
    const State<SD>& st = stepper.state();
    ray.energy_drift = std::max(ray.energy_drift, std::abs(energy(st)));
    if (ray.energy_drift > opts.energy_tol)
      throw EnergyDrift("ray energy drift " + std::to_string(ray.energy_drift) + " at y launch");

    // Scan det D(x)/D(y,s) across the step on the dense interpolant.
    const DenseStep<SD>& ds = stepper.last_step();
    double h = s_new - ds.s0;
    int m = std::max(2, static_cast<int>(std::ceil(h / opts.dense_output_step)));
    double theta_prev = 0.0;
    for (int i = 1; i <= m; ++i) {
      double theta = static_cast<double>(i) / m;
      State<SD> ui = (i == m) ? st : ds.eval(theta);
      double d = L::det_xys(ui);
      det_scale = std::max(det_scale, std::abs(d));
      if (std::abs(d) < 1e-12 * det_scale) {
        if (++consecutive_tiny >= 5)
          throw DegenerateCaustic("det D(x)/D(y,s) vanishes over an interval");
      } else {
        consecutive_tiny = 0;
      }
      if (d * prev_det < 0) {
        // Bisect the sign change inside this step segment.
        double lo = theta_prev, hi = theta;
        double dlo = prev_det;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (lo + hi);
          double dm = L::det_xys(ds.eval(mid));
          if (dm == 0) {
            lo = hi = mid;
            break;
          }
          if (dm * dlo < 0)
            hi = mid;
          else {
            lo = mid;
            dlo = dm;
          }
          if ((hi - lo) * h < 1e-13) break;
        }
        State<SD> uc = ds.eval(0.5 * (lo + hi));
        Mat<N, N> full;
        Mat<N, N - 1> mxc = L::mx(uc);
        Vec<N> pc = L::p(uc);
        for (int c = 0; c < N - 1; ++c)
          for (int r = 0; r < N; ++r) full(r, c) = mxc(r, c);
        for (int r = 0; r < N; ++r) full(r, N - 1) = 2.0 * pc[r];
        int drop = N - rank(full, 1e-7);
        ray.maslov += std::max(drop, 1);
      }
      prev_det = d;
      theta_prev = theta;
      if (opts.record_samples && i < m) record(ds.s0 + theta * h, ui);
    }

    Vec<N> x = L::x(st), p = L::p(st);
    double r = norm(x);
    if (r > r_sup * (1.0 + 1e-12) + 1e-12 && dot(p, x) > 0) {
      done = true;
      ray.exited = true;
      ray.exit_time = s_new;
      ray.x_exit = x;
      ray.p_exit = p;
      ray.mx_exit = L::mx(st);
      ray.mp_exit = L::mp(st);
      ray.action_exit = st[L::kS];
      record(s_new, st);
    } else {
      record(s_new, st);
      if (s_new > opts.t_max)
        throw TrappedRay("ray did not leave the interaction region before T_max");
    }
  }

  // Outgoing line: direction, caustics at and beyond the exit point, phase.
  ray.p_inf = normalized(ray.p_exit);
  ray.maslov += detail::post_exit_caustics<N>(ray.mx_exit, ray.mp_exit, ray.p_exit);

  auto tb = tangent_basis<N>(ray.p_inf);
  Mat<N - 1, N - 1> dj;
  for (int j = 0; j < N - 1; ++j)
    for (int i = 0; i < N - 1; ++i) dj(i, j) = dot(tb[static_cast<std::size_t>(i)], ray.mp_exit.col[static_cast<std::size_t>(j)]);
  ray.det_dj = det(dj);

  // F = S - <omega, x>, evaluated beyond |x| = a where it is constant along
  // the line (S and <omega, x> both advance at rate 2 there). The triangle
  // bound |x(tau)| >= 2|p|tau - |x_e| guarantees the sample radius.
  double tau_f = (a + 1.0 + opts.exit_radius + norm(ray.x_exit)) / (2.0 * norm(ray.p_exit));
  Vec<N> xf = ray.x_exit + (2.0 * tau_f) * ray.p_exit;
  double sf = ray.action_exit + 2.0 * dot(ray.p_exit, ray.p_exit) * tau_f;
  ray.phase_f = sf - dot(ray.p_inf, xf);

  // A couple of synthesized post-exit samples so exports and invariant checks
  // see the straight outgoing segment.
  if (opts.record_samples) {
    double r_e = norm(ray.x_exit);
    for (double r_target : {opts.exit_radius, opts.exit_radius + 0.5 * a, a + opts.exit_radius}) {
      if (r_target <= r_e) continue;
      double tau = (r_target - r_e) / (2.0 * norm(ray.p_exit));
      RaySample<N> smp;
      smp.s = ray.exit_time + tau;
      smp.x = ray.x_exit + (2.0 * tau) * ray.p_exit;
      smp.p = ray.p_exit;
      smp.action = ray.action_exit + 2.0 * dot(ray.p_exit, ray.p_exit) * tau;
      smp.mx = ray.mx_exit;
      for (int c = 0; c < N - 1; ++c)
        for (int r = 0; r < N; ++r) smp.mx(r, c) += 2.0 * tau * ray.mp_exit(r, c);
      smp.mp = ray.mp_exit;
      Mat<N, N> full;
      for (int c = 0; c < N - 1; ++c)
        for (int r = 0; r < N; ++r) full(r, c) = smp.mx(r, c);
      for (int r = 0; r < N; ++r) full(r, N - 1) = 2.0 * smp.p[r];
      smp.det_xys = det(full);
      ray.samples.push_back(smp);
    }
  }
  return ray;
}

// Variant matching the spec vocabulary: the tangent flow is always carried,
// so this is an alias that guarantees samples are recorded.
template <int N>
Ray<N> variational_flow(const Potential<N>& pot, const Vec<N - 1>& y, const IntegratorOptions& opts) {
  return trace_ray(pot, y, opts);
}

template <int N>
Vec<N> direction_J(const Potential<N>& pot, const Vec<N - 1>& y, const IntegratorOptions& opts) {
  IntegratorOptions o = opts;
  o.record_samples = false;
  Ray<N> r = trace_ray(pot, y, o);
  if (!r.exited) throw TrappedRay("direction_J: ray did not exit");
  return r.p_inf;
}

template <int N>
int maslov_index(const Ray<N>& ray) {
  return ray.maslov;
}

// Action S(s) by monotone interpolation of the recorded samples.
template <int N>
double action_S(const Ray<N>& ray, double s) {
  if (ray.samples.empty()) throw Error("action_S: ray carries no samples");
  if (s <= ray.samples.front().s) return ray.samples.front().action;
  for (std::size_t i = 1; i < ray.samples.size(); ++i) {
    if (s <= ray.samples[i].s) {
      const auto& lo = ray.samples[i - 1];
      const auto& hi = ray.samples[i];
      double t = (s - lo.s) / (hi.s - lo.s);
      return lo.action + t * (hi.action - lo.action);
    }
  }
  // Beyond the last sample the ray is straight: S grows at rate 2|p|^2.
  const auto& last = ray.samples.back();
  return last.action + 2.0 * dot(last.p, last.p) * (s - last.s);
}

namespace detail {

template <int N>
struct BackwardRhs {
  const Potential<N>* pot;
  void operator()(double, const State<2 * N>& u, State<2 * N>& du) const {
    Vec<N> x;
    for (int i = 0; i < N; ++i) x[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
    Vec<N> g = pot->gradient(x);
    for (int i = 0; i < N; ++i) {
      du[static_cast<std::size_t>(i)] = -2.0 * u[N + static_cast<std::size_t>(i)];
      du[N + static_cast<std::size_t>(i)] = -g[i];
    }
  }
};

}  // namespace detail

// Integrate the exit state backward to s = 0 and measure the distance to the
// launch data (y, -a, theta_0). Time-reversal closure of the flow.
template <int N>
double backward_closure_error(const Potential<N>& pot, const Ray<N>& ray,
                              const IntegratorOptions& opts) {
  if (!ray.exited) throw Error("backward_closure_error: ray has not exited");
  detail::BackwardRhs<N> rhs{&pot};
  Dopri5<2 * N, detail::BackwardRhs<N>> stepper(rhs, opts.rel_tol, opts.abs_tol);
  State<2 * N> u{};
  for (int i = 0; i < N; ++i) {
    u[static_cast<std::size_t>(i)] = ray.x_exit[static_cast<std::size_t>(i)];
    u[N + static_cast<std::size_t>(i)] = ray.p_exit[static_cast<std::size_t>(i)];
  }
  stepper.init(0.0, u);
  stepper.set_max_step(0.5 * (pot.plane_offset() + pot.support_radius() + 1.0));
  while (stepper.time() < ray.exit_time - 1e-13) {
    double remaining = ray.exit_time - stepper.time();
    stepper.set_max_step(std::min(0.5 * (pot.plane_offset() + pot.support_radius() + 1.0), remaining));
    stepper.step();
  }
  const State<2 * N>& s = stepper.state();
  double err = 0;
  for (int i = 0; i < N - 1; ++i)
    err = std::max(err, std::abs(s[static_cast<std::size_t>(i)] - ray.y[static_cast<std::size_t>(i)]));
  err = std::max(err, std::abs(s[N - 1] + pot.plane_offset()));
  for (int i = 0; i < N; ++i) {
    double p_target = (i == N - 1) ? 1.0 : 0.0;
    err = std::max(err, std::abs(s[N + static_cast<std::size_t>(i)] - p_target));
  }
  return err;
}

struct NontrappingReport {
  int n_rays = 0;
  int n_trapped = 0;
  double max_exit_time = 0;
  double max_energy_drift = 0;
  std::vector<std::array<double, 2>> trapped_launches;
  bool ok() const { return n_trapped == 0; }
};

// Certify Assumption-1-style non-trapping on a uniform grid over the impact
// bounding box (plus a margin ring of trivially free launches).
template <int N>
NontrappingReport nontrapping_scan(const Potential<N>& pot, int grid_n, const IntegratorOptions& opts_in) {
  IntegratorOptions opts = opts_in;
  opts.record_samples = false;
  NontrappingReport rep;
  auto run = [&](const Vec<N - 1>& y) {
    ++rep.n_rays;
    try {
      Ray<N> r = trace_ray(pot, y, opts);
      rep.max_exit_time = std::max(rep.max_exit_time, r.exit_time);
      rep.max_energy_drift = std::max(rep.max_energy_drift, r.energy_drift);
    } catch (const TrappedRay&) {
      ++rep.n_trapped;
      std::array<double, 2> ty{};
      for (int i = 0; i < N - 1; ++i) ty[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
      rep.trapped_launches.push_back(ty);
    }
  };
  if constexpr (N == 3) {
    auto bb = pot.impact_set().bounding_box();
    double mx = 0.05 * (bb[1] - bb[0] + 1.0), my = 0.05 * (bb[3] - bb[2] + 1.0);
    for (int i = 0; i < grid_n; ++i)
      for (int j = 0; j < grid_n; ++j) {
        Vec<2> y = {bb[0] - mx + (bb[1] - bb[0] + 2 * mx) * (i + 0.5) / grid_n,
                    bb[2] - my + (bb[3] - bb[2] + 2 * my) * (j + 0.5) / grid_n};
        run(y);
      }
  } else {
    auto bb = pot.impact_set().bounding_box();
    double m = 0.05 * (bb[1] - bb[0] + 1.0);
    for (int i = 0; i < grid_n; ++i) {
      Vec<1> y = {bb[0] - m + (bb[1] - bb[0] + 2 * m) * (i + 0.5) / grid_n};
      run(y);
    }
  }
  return rep;
}

// CSV export: s, x_1..x_n, p_1..p_n, S, det D(x)/D(y,s) per sample row.
template <int N>
std::string ray_csv(const Ray<N>& ray) {
  std::string out = "s";
  for (int i = 1; i <= N; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= N; ++i) out += ",p" + std::to_string(i);
  out += ",S,det_dxdys\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    out += buf;
  };
  for (const auto& smp : ray.samples) {
    put(smp.s, ',');
    for (int i = 0; i < N; ++i) put(smp.x[static_cast<std::size_t>(i)], ',');
    for (int i = 0; i < N; ++i) put(smp.p[static_cast<std::size_t>(i)], ',');
    put(smp.action, ',');
    put(smp.det_xys, '\n');
  }
  return out;
}

}  // namespace sclab
