#pragma once

#include <utility>
#include <vector>

namespace hotspot {

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const LonLat&) const = default;
};

/// Simple polygon in lon/lat degrees. The ring is implicitly closed: the
/// first vertex is not repeated at the end.
using Polygon = std::vector<LonLat>;

int distinct_vertices(const Polygon& poly);

/// Even-odd ray casting. Points exactly on an edge may land on either side.
bool contains(const Polygon& poly, LonLat p);

/// Area centroid; falls back to the vertex mean for zero-area rings.
LonLat centroid(const Polygon& poly);

}  // namespace hotspot
