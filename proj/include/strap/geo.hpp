// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace strap {

inline constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle distance on the spherical approximation. Symmetric in its
// arguments bit-for-bit. Throws DimensionError on out-of-range coordinates.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct GeoPoint {
  double lat = 0.0, lon = 0.0;
};

// Uniform lat/lon grid sized so that any two points within radius_km fall in
// the same or adjacent cells; a 3x3 neighborhood scan is therefore a superset
// of the true radius neighbors.
class GridIndex {
 public:
  static GridIndex build(const std::vector<GeoPoint>& points, double radius_km);

  // Indexes of all points in the 3x3 cell block around (lat, lon).
  void candidates(double lat, double lon, std::vector<std::size_t>& out) const;

 private:
  struct CellHash {
    std::size_t operator()(std::uint64_t v) const noexcept {
      v ^= v >> 33;
      v *= 0xFF51AFD7ED558CCDULL;
      v ^= v >> 33;
      return static_cast<std::size_t>(v);
    }
  };

  std::uint64_t cell_key(double lat, double lon, long dx, long dy) const;

  double lat0_ = 0.0, lon0_ = 0.0;
  double lat_cell_deg_ = 1.0, lon_cell_deg_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace strap
