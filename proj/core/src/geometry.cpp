#include "stp/geometry.hpp"

#include <algorithm>
#include <limits>

namespace stp::geo {

BoundingBox bounding_box(std::span<const Ring> rings) {
  BoundingBox box{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                  std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const auto& ring : rings)
    for (const auto& p : ring) {
      box.min_lat = std::min(box.min_lat, p.lat);
      box.max_lat = std::max(box.max_lat, p.lat);
      box.min_lon = std::min(box.min_lon, p.lon);
      box.max_lon = std::max(box.max_lon, p.lon);
    }
  return box;
}

bool is_closed_ring(const Ring& ring) { return ring.size() >= 4 && ring.front() == ring.back(); }

bool point_in_ring(GeoPoint p, const Ring& ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  if (n < 2) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double cross_lon = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < cross_lon) inside = !inside;
    }
  }
  return inside;
}

bool point_in_polygon(GeoPoint p, std::span<const Ring> rings) {
  bool inside = false;
  for (const auto& ring : rings)
    if (point_in_ring(p, ring)) inside = !inside;
  return inside;
}

}  // namespace stp::geo
