#include "hotspot/encodings.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hotspot {

ChannelGroup group_of_channel(int channel) {
  for (int g = 0; g < kGroups; ++g) {
    const auto& spec = kChannelGroups[g];
    if (channel >= spec.first && channel < spec.first + spec.size) return static_cast<ChannelGroup>(g);
  }
  throw std::out_of_range("channel index " + std::to_string(channel) + " outside 0..10");
}

GroupedChannels group_channels(std::span<const double> x) {
  if (x.size() != 11) throw std::invalid_argument("group_channels expects 11 entries, got " + std::to_string(x.size()));
  GroupedChannels g;
  for (int i = 0; i < 7; ++i) g.infrared[i] = x[i];
  for (int i = 0; i < 2; ++i) g.visible[i] = x[7 + i];
  for (int i = 0; i < 2; ++i) g.water_vapor[i] = x[9 + i];
  return g;
}

std::array<double, 11> ungroup_channels(const GroupedChannels& g) {
  std::array<double, 11> x{};
  for (int i = 0; i < 7; ++i) x[i] = g.infrared[i];
  for (int i = 0; i < 2; ++i) x[7 + i] = g.visible[i];
  for (int i = 0; i < 2; ++i) x[9 + i] = g.water_vapor[i];
  return x;
}

std::vector<double> timestep_encoding(int t, int d) {
  if (d <= 0 || d % 2 != 0) throw std::invalid_argument("timestep encoding width must be even and positive");
  if (t < 0) throw std::invalid_argument("timestep must be non-negative");
  std::vector<double> e(static_cast<std::size_t>(d));
  for (int i = 0; i < d / 2; ++i) {
    const double angle = t / std::pow(10000.0, (2.0 * i) / d);
    e[2 * i] = std::sin(angle);
    e[2 * i + 1] = std::cos(angle);
  }
  return e;
}

std::array<double, 2> month_encoding(int month) {
  if (month < 1 || month > 12) throw std::out_of_range("month must be in 1..12, got " + std::to_string(month));
  const double angle = 2.0 * std::numbers::pi * (month - 1) / 12.0;
  return {std::sin(angle), std::cos(angle)};
}

std::array<double, 3> location_encoding(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw std::out_of_range("coordinates out of range");
  }
  const double phi = lat * std::numbers::pi / 180.0;
  const double lambda = lon * std::numbers::pi / 180.0;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

}  // namespace hotspot
