#include "hotspot/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hotspot {

int distinct_vertices(const Polygon& poly) {
  std::vector<LonLat> seen;
  for (const auto& v : poly) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  }
  return static_cast<int>(seen.size());
}

bool contains(const Polygon& poly, LonLat p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

LonLat centroid(const Polygon& poly) {
  double area2 = 0.0, cx = 0.0, cy = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    double cross = a.lon * b.lat - b.lon * a.lat;
    area2 += cross;
    cx += (a.lon + b.lon) * cross;
    cy += (a.lat + b.lat) * cross;
  }
  if (std::abs(area2) < 1e-12) {
    LonLat mean;
    for (const auto& v : poly) {
      mean.lon += v.lon;
      mean.lat += v.lat;
    }
    if (n > 0) {
      mean.lon /= static_cast<double>(n);
      mean.lat /= static_cast<double>(n);
    }
    return mean;
  }
  return {cx / (3.0 * area2), cy / (3.0 * area2)};
}

}  // namespace hotspot
