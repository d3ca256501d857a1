#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "hotspot/encodings.hpp"
#include "hotspot/random.hpp"

using namespace hotspot;

TEST_CASE("group_channels routes channels by wavelength group") {
  std::array<double, 11> x{};
  for (int i = 0; i < 11; ++i) x[i] = i + 1;
  const auto g = group_channels(x);
  CHECK(g.infrared == std::array<double, 7>{1, 2, 3, 4, 5, 6, 7});
  CHECK(g.visible == std::array<double, 2>{8, 9});
  CHECK(g.water_vapor == std::array<double, 2>{10, 11});
  CHECK(ungroup_channels(g) == x);

  CHECK(group_of_channel(9) == ChannelGroup::water_vapor);  // channel 10, 1-based
  CHECK(group_of_channel(7) == ChannelGroup::visible);
  CHECK(group_of_channel(6) == ChannelGroup::infrared);
  CHECK_THROWS_AS(group_of_channel(11), std::out_of_range);

  const std::vector<double> ten(10, 0.0);
  CHECK_THROWS_AS(group_channels(ten), std::invalid_argument);
}

TEST_CASE("channel groups partition the 11 channels") {
  std::array<int, 11> hits{};
  for (const auto& g : kChannelGroups) {
    for (int c = g.first; c < g.first + g.size; ++c) ++hits[c];
  }
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("group_channels is a bijective rearrangement") {
  Rng rng = make_rng(1, "groups");
  std::normal_distribution<double> n(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 11> x{};
    for (auto& v : x) v = n(rng);
    CHECK(ungroup_channels(group_channels(x)) == x);
  }
}

TEST_CASE("timestep encoding examples") {
  for (int d : {2, 4, 8, 64}) {
    const auto e = timestep_encoding(0, d);
    for (int i = 0; i < d / 2; ++i) {
      CHECK(e[2 * i] == 0.0);
      CHECK(e[2 * i + 1] == 1.0);
    }
  }
  const auto e = timestep_encoding(5, 8);
  CHECK(e[2] == doctest::Approx(std::sin(5.0 / std::pow(10000.0, 2.0 / 8))));
  CHECK(e[3] == doctest::Approx(std::cos(5.0 / std::pow(10000.0, 2.0 / 8))));
  CHECK_THROWS_AS(timestep_encoding(1, 3), std::invalid_argument);
  CHECK_THROWS_AS(timestep_encoding(1, 0), std::invalid_argument);
}

TEST_CASE("timestep encoding is bounded and injective over a window") {
  for (int d : {4, 8, 32}) {
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 96; ++t) {
      rows.push_back(timestep_encoding(t, d));
      for (double v : rows.back()) CHECK(std::abs(v) <= 1.0);
    }
    for (int a = 0; a < 96; ++a) {
      for (int b = a + 1; b < 96; ++b) {
        double dist = 0.0;
        for (int k = 0; k < d; ++k) dist += std::abs(rows[a][k] - rows[b][k]);
        CHECK_MESSAGE(dist > 1e-9, "t=" << a << " and t=" << b << " collide at d=" << d);
      }
    }
  }
}

TEST_CASE("month encoding examples and circle property") {
  auto jan = month_encoding(1);
  CHECK(jan[0] == doctest::Approx(0.0));
  CHECK(jan[1] == doctest::Approx(1.0));
  auto apr = month_encoding(4);
  CHECK(apr[0] == doctest::Approx(1.0));
  CHECK(apr[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(month_encoding(13), std::out_of_range);
  CHECK_THROWS_AS(month_encoding(0), std::out_of_range);

  for (int a = 1; a <= 12; ++a) {
    const auto p = month_encoding(a);
    CHECK(p[0] * p[0] + p[1] * p[1] == doctest::Approx(1.0));
    for (int b = a + 1; b <= 12; ++b) {
      const auto q = month_encoding(b);
      CHECK(std::hypot(p[0] - q[0], p[1] - q[1]) > 0.1);
    }
  }
}

TEST_CASE("location encoding examples and properties") {
  const auto origin = location_encoding(0, 0);
  CHECK(origin[0] == doctest::Approx(1.0));
  CHECK(origin[1] == doctest::Approx(0.0));
  CHECK(origin[2] == doctest::Approx(0.0));
  for (double lon : {-180.0, -33.0, 0.0, 77.0, 180.0}) {
    const auto pole = location_encoding(90, lon);
    CHECK(pole[0] == doctest::Approx(0.0));
    CHECK(pole[1] == doctest::Approx(0.0));
    CHECK(pole[2] == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(location_encoding(91, 0), std::out_of_range);
  CHECK_THROWS_AS(location_encoding(0, -181), std::out_of_range);

  Rng rng = make_rng(2, "sphere");
  std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double la = lat(rng), lo = lon(rng);
    const auto p = location_encoding(la, lo);
    CHECK(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] == doctest::Approx(1.0));
    const auto q = location_encoding(-la, lo + 180.0);
    for (int k = 0; k < 3; ++k) CHECK(q[k] == doctest::Approx(-p[k]).epsilon(1e-12));
  }
}
