#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "hotspot/timeseries.hpp"
#include "json.hpp"
#include "support/fixtures.hpp"

using namespace hotspot;
using namespace hotspot::testing;

namespace {

CropBundle minimal_bundle() {
  CropBundle b;
  b.event_id = "tiny";
  b.bbox = {0.0, 0.0, 1.0, 1.0};
  b.rows = 1;
  b.cols = 1;
  b.timestamps = {parse_utc("2021-08-01T00:00:00Z"), parse_utc("2021-08-01T00:15:00Z")};
  for (int c = 0; c < kChannels; ++c) b.channels.push_back("c" + std::to_string(c));
  for (int i = 0; i < 2 * kChannels; ++i) b.data.push_back(static_cast<float>(i) * 0.5f);
  b.landcover = {4};
  b.aoi = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}};
  return b;
}

}  // namespace

TEST_CASE("utc timestamps parse and format symmetrically") {
  const auto t = parse_utc("2019-07-23T13:45:00Z");
  CHECK(format_utc(t) == "2019-07-23T13:45:00Z");
  CHECK(month_of(t) == 7);
  CHECK(parse_utc("2019-07-23T13:45Z") == t);
  CHECK(parse_utc("2019-07-23T13:45:00+00:00") == t);
  CHECK_THROWS(parse_utc("yesterday"));
}

TEST_CASE("minimal bundle round-trips through disk") {
  TempDir dir("bundle");
  const CropBundle b = minimal_bundle();
  write_crop_bundle(b, dir.path());
  CHECK(std::filesystem::exists(dir / "metadata.json"));
  CHECK(std::filesystem::exists(dir / "data.bin"));
  CHECK(std::filesystem::file_size(dir / "data.bin") == 2 * kChannels * 4);
  CHECK(same_bundle(read_crop_bundle(dir.path()), b));
}

TEST_CASE("NaN at a single cell survives the round-trip") {
  TempDir dir("nan");
  CropBundle b = minimal_bundle();
  b.data[b.offset(0, 0, 0) + 3] = std::nanf("");
  write_crop_bundle(b, dir.path());
  const CropBundle r = read_crop_bundle(dir.path());
  CHECK(same_bundle(r, b));
  for (std::size_t i = 0; i < r.data.size(); ++i) CHECK(std::isnan(r.data[i]) == (i == 3));
}

TEST_CASE("data.bin is little-endian binary32 in T,row,col,channel order") {
  TempDir dir("layout");
  Rng rng = make_rng(3, "layout");
  const CropBundle b = random_bundle(rng, 3, 2, 4, 0.0);
  write_crop_bundle(b, dir.path());
  const std::string blob = slurp(dir / "data.bin");
  const std::size_t t = 2, row = 1, col = 3, ch = 9;
  const std::size_t index = ((t * 2 + row) * 4 + col) * kChannels + ch;
  std::uint32_t bits = 0;
  for (int k = 3; k >= 0; --k) bits = (bits << 8) | static_cast<unsigned char>(blob[index * 4 + k]);
  CHECK(std::bit_cast<float>(bits) == b.at(t, 1, 3, 9));
}

TEST_CASE("metadata.json carries the documented keys") {
  TempDir dir("meta");
  write_crop_bundle(minimal_bundle(), dir.path());
  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  for (const char* key : {"event_id", "bbox", "rows", "cols", "T", "timestamps", "channels", "landcover", "aoi"}) {
    CHECK_MESSAGE(meta.contains(key), key);
  }
  CHECK(meta["T"] == 2);
  CHECK(meta["timestamps"][1] == "2021-08-01T00:15:00Z");
  CHECK(meta["aoi"].size() == 3);
}

TEST_CASE("bundle invariants are enforced before writing") {
  TempDir dir("reject");
  CropBundle b = minimal_bundle();

  SUBCASE("ten channels") {
    b.channels.pop_back();
    b.data.resize(2 * 10);
  }
  SUBCASE("landcover out of range") { b.landcover = {9}; }
  SUBCASE("repeated timestamp") { b.timestamps[1] = b.timestamps[0]; }
  SUBCASE("wrong extent") { b.data.push_back(1.0f); }
  SUBCASE("degenerate aoi") { b.aoi = {{0.1, 0.1}, {0.2, 0.2}, {0.1, 0.1}}; }

  CHECK_THROWS_AS(write_crop_bundle(b, dir.path()), InvariantError);
  CHECK_FALSE(std::filesystem::exists(dir / "data.bin"));
}

TEST_CASE("reading a damaged bundle fails with a format error") {
  TempDir dir("damaged");
  write_crop_bundle(minimal_bundle(), dir.path());

  SUBCASE("truncated data.bin") {
    std::string blob = slurp(dir / "data.bin");
    blob.resize(blob.size() - 4);
    spit(dir / "data.bin", blob);
    CHECK_THROWS_WITH_AS(read_crop_bundle(dir.path()), doctest::Contains("length mismatch"), FormatError);
  }
  SUBCASE("timestamps out of order") {
    auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
    std::swap(meta["timestamps"][0], meta["timestamps"][1]);
    spit(dir / "metadata.json", meta.dump());
    CHECK_THROWS_WITH_AS(read_crop_bundle(dir.path()), doctest::Contains("out of order"), FormatError);
  }
  SUBCASE("malformed json") {
    spit(dir / "metadata.json", "{\"event_id\": ");
    CHECK_THROWS_AS(read_crop_bundle(dir.path()), FormatError);
  }
  SUBCASE("missing data file") {
    std::filesystem::remove(dir / "data.bin");
    CHECK_THROWS_AS(read_crop_bundle(dir.path()), FormatError);
  }
}

TEST_CASE("a closing vertex repeated on disk is dropped on read") {
  TempDir dir("ring");
  const CropBundle b = minimal_bundle();
  write_crop_bundle(b, dir.path());
  auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  meta["aoi"].push_back(meta["aoi"][0]);
  spit(dir / "metadata.json", meta.dump());
  CHECK(read_crop_bundle(dir.path()).aoi == b.aoi);
}

TEST_CASE("random bundles round-trip field for field") {
  Rng rng = make_rng(11, "roundtrip");
  for (int trial = 0; trial < 25; ++trial) {
    const int steps = std::uniform_int_distribution<int>(1, 12)(rng);
    const int rows = std::uniform_int_distribution<int>(1, 6)(rng);
    const int cols = std::uniform_int_distribution<int>(1, 6)(rng);
    const CropBundle b = random_bundle(rng, steps, rows, cols, 0.1);
    TempDir dir("prop");
    write_crop_bundle(b, dir.path());
    CHECK(same_bundle(read_crop_bundle(dir.path()), b));
  }
}

TEST_CASE("pixel_at uses cell centers and NaN-derived validity") {
  CropBundle b = minimal_bundle();
  b.data[5] = std::nanf("");
  const PixelSeries px = pixel_at(b, 0, 0);
  CHECK(px.lat == doctest::Approx(0.5));
  CHECK(px.lon == doctest::Approx(0.5));
  CHECK(px.landcover == 4);
  int valid = 0;
  for (auto v : px.validity) valid += v;
  CHECK(valid == 2 * kChannels - 1);
  CHECK_FALSE(px.validity[5]);

  CHECK_THROWS_AS(pixel_at(b, 1, 0), std::out_of_range);
  CHECK_THROWS_AS(pixel_at(b, 0, -1), std::out_of_range);
}

TEST_CASE("pixel_at stays inside the bbox and counts NaNs exactly") {
  Rng rng = make_rng(5, "pixels");
  for (int trial = 0; trial < 10; ++trial) {
    const CropBundle b = random_bundle(rng, 4, 5, 7, 0.2);
    for (int r = 0; r < b.rows; ++r) {
      for (int c = 0; c < b.cols; ++c) {
        const PixelSeries px = pixel_at(b, r, c);
        CHECK(px.lat > b.bbox.south);
        CHECK(px.lat < b.bbox.north);
        CHECK(px.lon > b.bbox.west);
        CHECK(px.lon < b.bbox.east);
        int nan = 0, valid = 0;
        for (std::size_t t = 0; t < b.steps(); ++t) {
          for (int ch = 0; ch < kChannels; ++ch) nan += std::isnan(b.at(t, r, c, ch)) ? 1 : 0;
        }
        for (auto v : px.validity) valid += v;
        CHECK(valid == static_cast<int>(b.steps()) * kChannels - nan);
      }
    }
  }
  // row 0 is north
  const CropBundle b = random_bundle(rng, 1, 3, 1, 0.0);
  CHECK(pixel_at(b, 0, 0).lat > pixel_at(b, 2, 0).lat);
}

TEST_CASE("window_split examples") {
  auto split_of = [](int steps) {
    std::vector<float> values(static_cast<std::size_t>(steps) * kChannels);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i);
    std::vector<unsigned char> validity(values.size(), 1);
    return window_split(values, validity);
  };
  const auto two = split_of(192);
  REQUIRE(two.size() == 2);
  CHECK(two[0].window_index == 0);
  CHECK(two[1].window_index == 1);
  CHECK(two[1].first_step == 96);
  CHECK(split_of(96).size() == 1);
  const auto hundred = split_of(100);
  REQUIRE(hundred.size() == 1);
  CHECK(hundred[0].values.back() == static_cast<float>(96 * kChannels - 1));
  CHECK(split_of(0).empty());
}

TEST_CASE("window_split count and prefix property") {
  Rng rng = make_rng(9, "windows");
  for (int steps = 0; steps <= 400; steps += 7) {
    std::vector<float> values(static_cast<std::size_t>(steps) * kChannels);
    std::vector<unsigned char> validity(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng);
      validity[i] = static_cast<unsigned char>(i % 3 != 0);
    }
    const auto segs = window_split(values, validity);
    CHECK(segs.size() == static_cast<std::size_t>(steps / kWindow));
    std::vector<float> joined;
    std::vector<unsigned char> joined_valid;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      CHECK(segs[k].window_index == static_cast<int>(k));
      CHECK(segs[k].values.size() == static_cast<std::size_t>(kWindow * kChannels));
      joined.insert(joined.end(), segs[k].values.begin(), segs[k].values.end());
      joined_valid.insert(joined_valid.end(), segs[k].validity.begin(), segs[k].validity.end());
    }
    CHECK(std::equal(joined.begin(), joined.end(), values.begin()));
    CHECK(std::equal(joined_valid.begin(), joined_valid.end(), validity.begin()));
  }
}

TEST_CASE("pixel timeseries invariants") {
  Rng rng = make_rng(1, "pts");
  PixelTimeseries s = random_series(kWindow, rng);
  CHECK_NOTHROW(s.validate());
  SUBCASE("month") {
    s.month = 13;
    CHECK_THROWS_AS(s.validate(), InvariantError);
  }
  SUBCASE("latitude") {
    s.lat = 91.0;
    CHECK_THROWS_AS(s.validate(), InvariantError);
  }
  SUBCASE("non-finite valid value") {
    s.values[7] = std::nanf("");
    CHECK_THROWS_AS(s.validate(), InvariantError);
    s.validity[7] = 0;
    CHECK_NOTHROW(s.validate());
  }
}

TEST_CASE("event records need ordered times and a real polygon") {
  EventRecord e{"e", {{0, 0}, {1, 0}, {1, 1}}, parse_utc("2020-01-01T00:00:00Z"), parse_utc("2020-01-02T00:00:00Z")};
  CHECK_NOTHROW(e.validate());
  std::swap(e.start, e.end);
  CHECK_THROWS_AS(e.validate(), InvariantError);
  std::swap(e.start, e.end);
  e.aoi = {{0, 0}, {1, 1}};
  CHECK_THROWS_AS(e.validate(), InvariantError);
}

TEST_CASE("polygon helpers") {
  const Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(contains(square, {1, 1}));
  CHECK_FALSE(contains(square, {3, 1}));
  const LonLat c = centroid(square);
  CHECK(c.lon == doctest::Approx(1.0));
  CHECK(c.lat == doctest::Approx(1.0));
  CHECK(distinct_vertices({{0, 0}, {0, 0}, {1, 1}}) == 2);
}
