#include "sgf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgf {

LatticeDomain::LatticeDomain(int dim, int sites_per_axis, double period)
    : m_(dim), n_(sites_per_axis), period_(period) {
  if (dim < 2 || dim > kMaxDim)
    throw ConfigError("domain dimension must be in [2, " + std::to_string(kMaxDim) +
                      "], got " + std::to_string(dim));
  if (sites_per_axis < 4)
    throw ConfigError("sites per axis must be >= 4, got " + std::to_string(sites_per_axis));
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  h_ = period_ / n_;
  site_count_ = 1;
  for (int a = 0; a < m_; ++a) site_count_ *= n_;
  // Row-major: axis 0 varies slowest.
  std::int64_t s = 1;
  for (int a = m_ - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= n_;
  }
}

double LatticeDomain::cell_volume() const { return std::pow(h_, m_); }

double LatticeDomain::total_volume() const { return std::pow(period_, m_); }

Coords LatticeDomain::coords(std::int64_t site) const {
  Coords c{};
  for (int a = m_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(site % n_);
    site /= n_;
  }
  return c;
}

std::int64_t LatticeDomain::site_at(const Coords& c) const {
  std::int64_t idx = 0;
  for (int a = 0; a < m_; ++a) {
    int v = c[a] % n_;
    if (v < 0) v += n_;
    idx = idx * n_ + v;
  }
  return idx;
}

double LatticeDomain::coordinate(std::int64_t site, int axis) const {
  return coords(site)[axis] * h_;
}

std::int64_t LatticeDomain::neighbor(std::int64_t site, int axis, int step) const {
  const std::int64_t stride = stride_[axis];
  const int c = static_cast<int>((site / stride) % n_);
  int v = (c + step) % n_;
  if (v < 0) v += n_;
  return site + (static_cast<std::int64_t>(v) - c) * stride;
}

std::array<double, kMaxDim> LatticeDomain::displacement(std::int64_t a, std::int64_t b) const {
  const Coords ca = coords(a), cb = coords(b);
  std::array<double, kMaxDim> d{};
  for (int ax = 0; ax < m_; ++ax) {
    int diff = cb[ax] - ca[ax];
    if (diff > n_ / 2) diff -= n_;
    if (diff < -(n_ / 2)) diff += n_;
    // For even n the +n/2 and -n/2 images coincide; pick +n/2.
    if (2 * diff == -n_) diff = n_ / 2;
    d[ax] = diff * h_;
  }
  return d;
}

double LatticeDomain::periodic_distance(std::int64_t a, std::int64_t b) const {
  const auto d = displacement(a, b);
  double s = 0.0;
  for (int ax = 0; ax < m_; ++ax) s += d[ax] * d[ax];
  return std::sqrt(s);
}

namespace {

// Enumerates integer offsets in the box [-r, r]^m around `center`, keeping
// those whose wrapped distance satisfies `keep`. Offsets stay within one
// period, so each site appears at most twice (+-n/2 on even grids); the final
// sort+unique removes the duplicate.
template <typename Keep>
SiteSet collect_sites(const LatticeDomain& dom, std::int64_t center, int reach, Keep keep) {
  const int m = dom.dim();
  const int n = dom.sites_per_axis();
  reach = std::min(reach, n / 2);
  const Coords c0 = dom.coords(center);
  const double h = dom.spacing();

  SiteSet out;
  Coords off{};
  for (int a = 0; a < m; ++a) off[a] = -reach;
  for (;;) {
    double d2 = 0.0;
    for (int a = 0; a < m; ++a) {
      int w = std::abs(off[a]);
      w = std::min(w, n - w);
      d2 += double(w) * w * h * h;
    }
    if (keep(std::sqrt(d2))) {
      Coords c = c0;
      for (int a = 0; a < m; ++a) c[a] += off[a];
      out.sites.push_back(dom.site_at(c));
    }
    int a = m - 1;
    while (a >= 0 && off[a] == reach) off[a--] = -reach;
    if (a < 0) break;
    ++off[a];
  }
  std::sort(out.sites.begin(), out.sites.end());
  out.sites.erase(std::unique(out.sites.begin(), out.sites.end()), out.sites.end());
  return out;
}

}  // namespace

SiteSet LatticeDomain::ball_sites(std::int64_t center, double R) const {
  if (!(R > 0.0) || R >= period_ / 2.0)
    throw DomainError("ball radius must satisfy 0 < R < period/2");
  const int reach = static_cast<int>(std::floor(R / h_ + 1e-12));
  return collect_sites(*this, center, reach, [R](double d) { return d <= R + 1e-12 * R; });
}

SiteSet LatticeDomain::shell_sites(std::int64_t center, double R, double width) const {
  if (width < h_ - 1e-12 * h_) throw DomainError("shell width must be >= grid spacing");
  const double lo = R - width / 2.0, hi = R + width / 2.0;
  if (lo < -1e-12) throw DomainError("shell inner radius must be >= 0");
  if (hi >= period_ / 2.0) throw DomainError("shell outer radius must be < period/2");
  const int reach = static_cast<int>(std::floor(hi / h_ + 1e-12)) + 1;
  return collect_sites(*this, center, reach, [lo, hi](double d) { return d >= lo && d < hi; });
}

double LatticeDomain::shell_weight(double width) const { return cell_volume() / width; }

std::pair<SiteSet, TimeWindow> cylinder_window(const LatticeDomain& dom,
                                               const std::vector<double>& times,
                                               std::int64_t x0, double t0, double R,
                                               WindowKind kind) {
  if (!(R > 0.0) || R >= dom.period() / 2.0)
    throw DomainError("cylinder radius must satisfy 0 < R < period/2");
  double lo, hi;
  if (kind == WindowKind::Parabolic) {
    lo = t0 - R * R;
    hi = t0 + R * R;
  } else {
    lo = t0 - 4.0 * R * R;
    hi = t0 - R * R;
  }
  const double slack = 1e-12 * (1.0 + std::abs(t0));
  std::size_t first = times.size(), last = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= lo - slack && times[i] <= hi + slack) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if (first == times.size())
    throw EmptyWindowError("no snapshots in time window [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  return {dom.ball_sites(x0, R), TimeWindow{first, last}};
}

}  // namespace sgf
