#pragma once

// Impact regions on the launch plane: a union of disks (n = 3) or a union of
// intervals (n = 2), with membership tests, exact Lebesgue measure, and
// quadrature rules that weight overlaps by 1/multiplicity.

#include <array>
#include <vector>

namespace sclab {

struct Disk {
  std::array<double, 2> c{};
  double r = 0;
};

struct PlanePoint {
  std::array<double, 2> y{};  // second coord unused for the interval case
  double w = 0;
};

class DiskRegion {
 public:
  DiskRegion() = default;
  explicit DiskRegion(std::vector<Disk> disks);

  bool empty() const { return disks_.empty(); }
  const std::vector<Disk>& disks() const { return disks_; }
  bool contains(const std::array<double, 2>& y) const;
  int multiplicity(const std::array<double, 2>& y) const;
  double measure() const { return area_; }
  // xmin, xmax, ymin, ymax
  std::array<double, 4> bounding_box() const;
  // Per-disk polar rule (Gauss-Legendre radial x uniform azimuth), overlap
  // weighted by 1/multiplicity so the union is covered exactly once.
  std::vector<PlanePoint> quadrature(int n_radial, int n_azimuth) const;

 private:
  std::vector<Disk> disks_;
  double area_ = 0;
};

struct Interval {
  double lo = 0, hi = 0;
};

class IntervalRegion {
 public:
  IntervalRegion() = default;
  explicit IntervalRegion(std::vector<Interval> parts);  // merges overlaps

  bool empty() const { return merged_.empty(); }
  const std::vector<Interval>& intervals() const { return merged_; }
  bool contains(double y) const;
  double measure() const { return length_; }
  std::array<double, 2> bounding_box() const;
  std::vector<PlanePoint> quadrature(int n_per_interval) const;

 private:
  std::vector<Interval> merged_;
  double length_ = 0;
};

// Exact area of a union of disks (Green's theorem over exposed boundary arcs).
double disk_union_area(const std::vector<Disk>& disks);

}  // namespace sclab
