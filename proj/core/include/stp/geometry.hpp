#pragma once

#include <span>
#include <vector>

#include "stp/types.hpp"

namespace stp::geo {

// Closed ring: first point equals last, at least 4 points.
using Ring = std::vector<GeoPoint>;

struct BoundingBox {
  double min_lat = 0, min_lon = 0, max_lat = 0, max_lon = 0;

  bool contains(GeoPoint p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }
};

BoundingBox bounding_box(std::span<const Ring> rings);

bool is_closed_ring(const Ring& ring);

// Even-odd ray casting over all rings (holes fall out of the parity). A
// horizontal ray is cast towards +lon; an edge counts when exactly one of its
// endpoints lies strictly above the point's latitude and the crossing is
// strictly east of the point. Points on edges or vertices follow that rule.
bool point_in_polygon(GeoPoint p, std::span<const Ring> rings);
bool point_in_ring(GeoPoint p, const Ring& ring);

}  // namespace stp::geo
