// SPDX-License-Identifier: Apache-2.0
#include "strap/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strap/errors.hpp"

namespace strap {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

void check_coord(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw DimensionError("coordinates out of range: lat " + std::to_string(lat) + ", lon " +
                         std::to_string(lon));
  }
}
}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  check_coord(lat1, lon1);
  check_coord(lat2, lon2);
  // absolute deltas keep the result bit-symmetric under argument swap
  const double dphi = std::fabs(lat2 - lat1) * kDegToRad;
  const double dlam = std::fabs(lon2 - lon1) * kDegToRad;
  const double sp = std::sin(dphi * 0.5);
  const double sl = std::sin(dlam * 0.5);
  const double a =
      sp * sp + std::cos(lat1 * kDegToRad) * std::cos(lat2 * kDegToRad) * sl * sl;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

GridIndex GridIndex::build(const std::vector<GeoPoint>& points, double radius_km) {
  if (radius_km <= 0.0) throw ConfigError("grid index: radius must be positive");
  GridIndex g;
  if (points.empty()) return g;

  double lat_min = points[0].lat, lat_max = points[0].lat;
  for (const GeoPoint& p : points) {
    check_coord(p.lat, p.lon);
    lat_min = std::min(lat_min, p.lat);
    lat_max = std::max(lat_max, p.lat);
  }

  // Latitude: arc length along a meridian never exceeds the great-circle
  // distance, so a cell of radius_km worth of latitude suffices.
  const double lat_cell_rad = radius_km / kEarthRadiusKm;
  g.lat_cell_deg_ = lat_cell_rad / kDegToRad;

  // Longitude: from the haversine identity, two points within radius r obey
  //   sin(dlam/2) <= sin(r / 2R) / sqrt(cos(lat1) cos(lat2)),
  // so bound cos over the latitude band (padded by one lat cell).
  // cos is largest at the equator and shrinks toward the poles, so the band
  // minimum sits at whichever edge is closer to a pole.
  const double band_lo = std::max(-90.0, lat_min - g.lat_cell_deg_) * kDegToRad;
  const double band_hi = std::min(90.0, lat_max + g.lat_cell_deg_) * kDegToRad;
  const double min_cos = std::max(0.0, std::min(std::cos(band_lo), std::cos(band_hi)));
  const double s = std::sin(radius_km / (2.0 * kEarthRadiusKm));
  double lon_cell_deg;
  if (min_cos <= s) {
    lon_cell_deg = 360.0;  // near-polar band: collapse longitude to one column
  } else {
    lon_cell_deg = 2.0 * std::asin(s / min_cos) / kDegToRad;
  }
  g.lon_cell_deg_ = std::max(lon_cell_deg, 1e-12);
  g.lat_cell_deg_ = std::max(g.lat_cell_deg_, 1e-12);
  g.lat0_ = -90.0;
  g.lon0_ = -180.0;

  for (std::size_t i = 0; i < points.size(); ++i) {
    g.cells_[g.cell_key(points[i].lat, points[i].lon, 0, 0)].push_back(i);
  }
  return g;
}

std::uint64_t GridIndex::cell_key(double lat, double lon, long dx, long dy) const {
  const long cy = static_cast<long>(std::floor((lat - lat0_) / lat_cell_deg_)) + dy;
  const long cx = static_cast<long>(std::floor((lon - lon0_) / lon_cell_deg_)) + dx;
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx));
}

void GridIndex::candidates(double lat, double lon, std::vector<std::size_t>& out) const {
  out.clear();
  for (long dy = -1; dy <= 1; ++dy) {
    for (long dx = -1; dx <= 1; ++dx) {
      auto it = cells_.find(cell_key(lat, lon, dx, dy));
      if (it == cells_.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
}

}  // namespace strap
