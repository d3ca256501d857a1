#pragma once

#include <array>
#include <span>
#include <vector>

namespace hotspot {

enum class ChannelGroup { infrared = 0, visible = 1, water_vapor = 2 };

inline constexpr int kGroups = 3;

/// Channel partition by central wavelength, 0-based: infrared = 0..6,
/// visible = 7..8, water vapor = 9..10.
struct ChannelGroupSpec {
  int first;
  int size;
};

inline constexpr std::array<ChannelGroupSpec, kGroups> kChannelGroups{{{0, 7}, {7, 2}, {9, 2}}};

/// Group of a 0-based channel index.
ChannelGroup group_of_channel(int channel);

struct GroupedChannels {
  std::array<double, 7> infrared{};
  std::array<double, 2> visible{};
  std::array<double, 2> water_vapor{};
};

GroupedChannels group_channels(std::span<const double> x);

/// Inverse of group_channels: concatenates the groups back into channel order.
std::array<double, 11> ungroup_channels(const GroupedChannels& g);

std::vector<double> timestep_encoding(int t, int d);
std::array<double, 2> month_encoding(int month);
std::array<double, 3> location_encoding(double lat, double lon);

}  // namespace hotspot
