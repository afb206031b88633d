#pragma once

// Small fixed-dimension vector/matrix helpers for the n = 2, 3 dynamics.
// Everything is value-typed and allocation-free.

#include <array>
#include <cmath>
#include <cstddef>

namespace sclab {

template <int N>
using Vec = std::array<double, N>;

// Column-major fixed-size matrix, R rows x C cols.
template <int R, int C>
struct Mat {
  std::array<Vec<R>, C> col{};

  double& operator()(int r, int c) { return col[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]; }
  double operator()(int r, int c) const { return col[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]; }
};

template <int N>
inline Vec<N> operator+(Vec<N> a, const Vec<N>& b) {
  for (int i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <int N>
inline Vec<N> operator-(Vec<N> a, const Vec<N>& b) {
  for (int i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}

template <int N>
inline Vec<N> operator*(double s, Vec<N> a) {
  for (int i = 0; i < N; ++i) a[i] *= s;
  return a;
}

template <int N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0;
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <int N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <int N>
inline Vec<N> normalized(const Vec<N>& a) {
  double n = norm(a);
  return (1.0 / n) * a;
}

inline Vec<3> cross(const Vec<3>& a, const Vec<3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Angle between two nonzero vectors, robust near 0 and pi.
template <int N>
inline double angle_between(const Vec<N>& a, const Vec<N>& b) {
  double na = norm(a), nb = norm(b);
  double c = dot(a, b) / (na * nb);
  double s;
  if constexpr (N == 3) {
    s = norm(cross(a, b)) / (na * nb);
  } else {
    s = std::abs(a[0] * b[1] - a[1] * b[0]) / (na * nb);
  }
  return std::atan2(s, c);
}

inline double det2(double a, double b, double c, double d) { return a * d - b * c; }

template <int N>
inline double det(const Mat<N, N>& m) {
  if constexpr (N == 1) {
    return m(0, 0);
  } else if constexpr (N == 2) {
    return det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
  } else {
    static_assert(N == 3);
    return m(0, 0) * det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2)) -
           m(0, 1) * det2(m(1, 0), m(1, 2), m(2, 0), m(2, 2)) +
           m(0, 2) * det2(m(1, 0), m(1, 1), m(2, 0), m(2, 1));
  }
}

// Solve m x = b by Cramer's rule; caller guarantees m is well conditioned
// enough for the use site (Newton steps guard the determinant themselves).
template <int N>
inline Vec<N> solve(const Mat<N, N>& m, const Vec<N>& b) {
  double d = det(m);
  Vec<N> x{};
  for (int j = 0; j < N; ++j) {
    Mat<N, N> mj = m;
    for (int i = 0; i < N; ++i) mj(i, j) = b[i];
    x[j] = det(mj) / d;
  }
  return x;
}

// Rank of a small square matrix by row elimination with partial pivoting.
// tol is relative to the largest entry.
template <int N>
inline int rank(Mat<N, N> m, double tol) {
  double scale = 0;
  for (int c = 0; c < N; ++c)
    for (int r = 0; r < N; ++r) scale = std::max(scale, std::abs(m(r, c)));
  if (scale == 0) return 0;
  double thresh = tol * scale;
  int rk = 0;
  int row = 0;
  for (int c = 0; c < N && row < N; ++c) {
    int piv = row;
    for (int r = row + 1; r < N; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (std::abs(m(piv, c)) <= thresh) continue;
    if (piv != row)
      for (int cc = 0; cc < N; ++cc) std::swap(m.col[cc][piv], m.col[cc][row]);
    for (int r = row + 1; r < N; ++r) {
      double f = m(r, c) / m(row, c);
      for (int cc = c; cc < N; ++cc) m(r, cc) -= f * m(row, cc);
    }
    ++row;
    ++rk;
  }
  return rk;
}

// Deterministic orthonormal basis of the tangent plane to the unit sphere at
// unit vector p. For N == 2 the "plane" is a single direction.
template <int N>
inline std::array<Vec<N>, N - 1> tangent_basis(const Vec<N>& p) {
  if constexpr (N == 2) {
    return {Vec<2>{-p[1], p[0]}};
  } else {
    static_assert(N == 3);
    // Pick the axis least aligned with p to seed the first tangent.
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(p[i]) < std::abs(p[k])) k = i;
    Vec<3> e{};
    e[k] = 1.0;
    Vec<3> t1 = normalized(cross(p, e));
    Vec<3> t2 = cross(p, t1);
    return {t1, t2};
  }
}

}  // namespace sclab
