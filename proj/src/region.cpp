#include "sclab/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sclab/special.hpp"

namespace sclab {

namespace {

double sq(double v) { return v * v; }

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

struct Arc {
  double a0, a1;  // a0 < a1, angles on one circle
};

// Angular intervals of circle i covered by disk j, normalized into [0, 2pi).
void covered_intervals(const Disk& di, const Disk& dj, std::vector<Arc>& out) {
  double d = dist(di.c, dj.c);
  if (d >= di.r + dj.r) return;                    // disjoint
  if (d + di.r <= dj.r) {                          // circle i fully inside j
    out.push_back({0.0, 2.0 * M_PI});
    return;
  }
  if (d + dj.r <= di.r) return;                    // j inside i: no boundary cover
  double phi = std::atan2(dj.c[1] - di.c[1], dj.c[0] - di.c[0]);
  double ca = (d * d + di.r * di.r - dj.r * dj.r) / (2.0 * d * di.r);
  ca = std::clamp(ca, -1.0, 1.0);
  double alpha = std::acos(ca);
  double a0 = phi - alpha, a1 = phi + alpha;
  if (a0 < 0) {
    a0 += 2.0 * M_PI;
    a1 += 2.0 * M_PI;
  }
  if (a1 <= 2.0 * M_PI) {
    out.push_back({a0, a1});
  } else {
    out.push_back({a0, 2.0 * M_PI});
    out.push_back({0.0, a1 - 2.0 * M_PI});
  }
}

}  // namespace

double disk_union_area(const std::vector<Disk>& disks) {
  // Deduplicate coincident circles first; identical copies would otherwise
  // mark each other's full boundary as covered.
  std::vector<Disk> ds;
  for (const Disk& d : disks) {
    if (d.r <= 0) continue;
    bool dup = false;
    for (const Disk& e : ds)
      if (dist(d.c, e.c) < 1e-14 && std::abs(d.r - e.r) < 1e-14) dup = true;
    if (!dup) ds.push_back(d);
  }
  double area = 0;
  std::vector<Arc> cov;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    cov.clear();
    bool swallowed = false;
    for (std::size_t j = 0; j < ds.size() && !swallowed; ++j) {
      if (i == j) continue;
      double d = dist(ds[i].c, ds[j].c);
      if (d + ds[i].r <= ds[j].r) swallowed = true;
      covered_intervals(ds[i], ds[j], cov);
    }
    if (swallowed) continue;
    std::sort(cov.begin(), cov.end(), [](const Arc& a, const Arc& b) { return a.a0 < b.a0; });
    // Walk the complement of the covered set and accumulate the Green's
    // theorem line integral (x dy - y dx)/2 over each exposed arc.
    auto arc_term = [&](double a0, double a1) {
      const Disk& d = ds[i];
      return 0.5 * (d.r * d.r * (a1 - a0) + d.r * (d.c[0] * (std::sin(a1) - std::sin(a0)) +
                                                   d.c[1] * (std::cos(a0) - std::cos(a1))));
    };
    double cursor = 0;
    for (const Arc& c : cov) {
      if (c.a0 > cursor) area += arc_term(cursor, c.a0);
      cursor = std::max(cursor, c.a1);
    }
    if (cursor < 2.0 * M_PI) area += arc_term(cursor, 2.0 * M_PI);
  }
  return area;
}

DiskRegion::DiskRegion(std::vector<Disk> disks) : disks_(std::move(disks)) {
  for (const Disk& d : disks_)
    if (d.r <= 0) throw std::invalid_argument("DiskRegion: nonpositive radius");
  area_ = disk_union_area(disks_);
}

bool DiskRegion::contains(const std::array<double, 2>& y) const {
  for (const Disk& d : disks_)
    if (dist(y, d.c) <= d.r) return true;
  return false;
}

int DiskRegion::multiplicity(const std::array<double, 2>& y) const {
  int m = 0;
  for (const Disk& d : disks_)
    if (dist(y, d.c) <= d.r) ++m;
  return m;
}

std::array<double, 4> DiskRegion::bounding_box() const {
  if (disks_.empty()) return {0, 0, 0, 0};
  std::array<double, 4> bb = {1e300, -1e300, 1e300, -1e300};
  for (const Disk& d : disks_) {
    bb[0] = std::min(bb[0], d.c[0] - d.r);
    bb[1] = std::max(bb[1], d.c[0] + d.r);
    bb[2] = std::min(bb[2], d.c[1] - d.r);
    bb[3] = std::max(bb[3], d.c[1] + d.r);
  }
  return bb;
}

std::vector<PlanePoint> DiskRegion::quadrature(int n_radial, int n_azimuth) const {
  std::vector<PlanePoint> pts;
  Quadrature gr = gauss_legendre(n_radial, 0.0, 1.0);
  for (const Disk& d : disks_) {
    for (int ir = 0; ir < n_radial; ++ir) {
      double b = d.r * gr.x[static_cast<std::size_t>(ir)];
      double wb = d.r * d.r * gr.x[static_cast<std::size_t>(ir)] *
                  gr.w[static_cast<std::size_t>(ir)] * (2.0 * M_PI / n_azimuth);
      for (int ia = 0; ia < n_azimuth; ++ia) {
        double phi = 2.0 * M_PI * (ia + 0.5) / n_azimuth;
        PlanePoint p;
        p.y = {d.c[0] + b * std::cos(phi), d.c[1] + b * std::sin(phi)};
        int m = multiplicity(p.y);
        p.w = wb / std::max(m, 1);
        pts.push_back(p);
      }
    }
  }
  return pts;
}

IntervalRegion::IntervalRegion(std::vector<Interval> parts) {
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const Interval& p : parts) {
    if (p.hi <= p.lo) throw std::invalid_argument("IntervalRegion: empty interval");
    if (!merged_.empty() && p.lo <= merged_.back().hi)
      merged_.back().hi = std::max(merged_.back().hi, p.hi);
    else
      merged_.push_back(p);
  }
  for (const Interval& p : merged_) length_ += p.hi - p.lo;
}

bool IntervalRegion::contains(double y) const {
  for (const Interval& p : merged_)
    if (y >= p.lo && y <= p.hi) return true;
  return false;
}

std::array<double, 2> IntervalRegion::bounding_box() const {
  if (merged_.empty()) return {0, 0};
  return {merged_.front().lo, merged_.back().hi};
}

std::vector<PlanePoint> IntervalRegion::quadrature(int n_per_interval) const {
  std::vector<PlanePoint> pts;
  for (const Interval& p : merged_) {
    Quadrature g = gauss_legendre(n_per_interval, p.lo, p.hi);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      PlanePoint pp;
      pp.y = {g.x[i], 0.0};
      pp.w = g.w[i];
      pts.push_back(pp);
    }
  }
  return pts;
}

}  // namespace sclab
