#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "sgf/errors.hpp"

namespace sgf {

// Hard cap on the base dimension; the flat-torus grids of interest are m = 2, 3.
inline constexpr int kMaxDim = 6;

using Coords = std::array<int, kMaxDim>;

class LatticeDomain;

// Ordered set of site indices on one domain. Always sorted ascending (row-major
// site order), which fixes every downstream iteration order.
struct SiteSet {
  std::vector<std::int64_t> sites;

  std::size_t size() const { return sites.size(); }
  bool empty() const { return sites.empty(); }
  auto begin() const { return sites.begin(); }
  auto end() const { return sites.end(); }
};

// Uniform periodic grid on the flat torus [0, period)^m with n_per_axis sites
// per axis. Distances use the minimal image per axis, so the cutoff radius
// R_M = period/4 keeps every ball of interest unambiguous.
class LatticeDomain {
 public:
  LatticeDomain(int dim, int sites_per_axis, double period);

  int dim() const { return m_; }
  int sites_per_axis() const { return n_; }
  double period() const { return period_; }
  double spacing() const { return h_; }
  double cutoff_radius() const { return period_ / 4.0; }  // R_M
  std::int64_t site_count() const { return site_count_; }
  double cell_volume() const;  // h^m
  double total_volume() const;

  Coords coords(std::int64_t site) const;
  std::int64_t site_at(const Coords& c) const;  // wraps coordinates
  double coordinate(std::int64_t site, int axis) const;

  // Neighbor along `axis` displaced by `step` cells (periodic wrap).
  std::int64_t neighbor(std::int64_t site, int axis, int step) const;

  // Minimal-image displacement vector from a to b, in length units.
  std::array<double, kMaxDim> displacement(std::int64_t a, std::int64_t b) const;
  double periodic_distance(std::int64_t a, std::int64_t b) const;

  // All sites with periodic_distance(center, x) <= R. Requires 0 < R < period/2.
  SiteSet ball_sites(std::int64_t center, double R) const;

  // Annulus R - width/2 <= d < R + width/2 standing in for the geodesic sphere
  // S_R. May be empty. Requires width >= h, R - width/2 >= 0,
  // R + width/2 < period/2. Surface integrals use shell_weight(width).
  SiteSet shell_sites(std::int64_t center, double R, double width) const;
  double shell_weight(double width) const;  // h^m / width

  bool operator==(const LatticeDomain& o) const {
    return m_ == o.m_ && n_ == o.n_ && period_ == o.period_;
  }

 private:
  int m_;
  int n_;
  double period_;
  double h_;
  std::int64_t site_count_;
  std::array<std::int64_t, kMaxDim> stride_;
};

// Snapshot index range [first, last], inclusive.
struct TimeWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const { return last - first + 1; }
};

enum class WindowKind {
  Parabolic,  // |t - t0| <= R^2
  Strip,      // t0 - 4R^2 <= t <= t0 - R^2
};

// Space-time window: ball of radius R around x0 times the snapshot range
// selected by `kind`. `times` must be sorted ascending. Throws
// EmptyWindowError when no snapshot falls inside the time range.
std::pair<SiteSet, TimeWindow> cylinder_window(const LatticeDomain& dom,
                                               const std::vector<double>& times,
                                               std::int64_t x0, double t0, double R,
                                               WindowKind kind = WindowKind::Parabolic);

}  // namespace sgf
