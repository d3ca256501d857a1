#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/model.hpp"
#include "hotspot/timeseries.hpp"
#include "hotspot/train.hpp"

namespace hotspot::testing {

inline PixelTimeseries random_series(int steps, Rng& rng, double invalid_rate = 0.0) {
  std::normal_distribution<double> value(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PixelTimeseries s;
  s.values.resize(static_cast<std::size_t>(steps) * kChannels);
  s.validity.resize(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const bool ok = unit(rng) >= invalid_rate;
    s.validity[i] = ok ? 1 : 0;
    s.values[i] = ok ? static_cast<float>(value(rng)) : std::nanf("");
  }
  s.lat = std::uniform_real_distribution<double>(-90.0, 90.0)(rng);
  s.lon = std::uniform_real_distribution<double>(-180.0, 180.0)(rng);
  s.month = std::uniform_int_distribution<int>(1, 12)(rng);
  s.landcover = std::uniform_int_distribution<int>(0, kLandcoverClasses - 1)(rng);
  s.label = std::uniform_int_distribution<int>(0, 1)(rng);
  s.event_id = "ev";
  return s;
}

// Replaces NaN at invalid positions by 0 so the window looks normalized.
inline PixelTimeseries zero_filled(PixelTimeseries s) {
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!s.validity[i]) s.values[i] = 0.0f;
  }
  return s;
}

inline ModelConfig reduced_config() {
  ModelConfig c;
  c.d_model = 8;
  c.attention_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.timesteps = 8;
  return c;
}

inline CropBundle random_bundle(Rng& rng, int steps, int rows, int cols, double nan_rate = 0.05) {
  CropBundle b;
  b.event_id = "bundle-" + std::to_string(std::uniform_int_distribution<int>(0, 9999)(rng));
  const double w = std::uniform_real_distribution<double>(-170.0, 160.0)(rng);
  const double s = std::uniform_real_distribution<double>(-80.0, 70.0)(rng);
  b.bbox = {w, s, w + 0.04 * cols, s + 0.04 * rows};
  b.rows = rows;
  b.cols = cols;
  const auto t0 = std::chrono::sys_days{std::chrono::year{2019} / 7 / 1};
  for (int t = 0; t < steps; ++t) b.timestamps.push_back(TimePoint{t0} + std::chrono::minutes{15 * t});
  for (int c = 0; c < kChannels; ++c) b.channels.push_back("ch" + std::to_string(c + 1));
  std::normal_distribution<float> value(280.0f, 15.0f);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  b.data.resize(static_cast<std::size_t>(steps) * rows * cols * kChannels);
  for (auto& v : b.data) v = unit(rng) < nan_rate ? std::nanf("") : value(rng);
  b.landcover.resize(static_cast<std::size_t>(rows * cols));
  for (auto& lc : b.landcover) lc = std::uniform_int_distribution<int>(0, 8)(rng);
  b.aoi = {{w + 0.01, s + 0.01}, {w + 0.03, s + 0.01}, {w + 0.03, s + 0.03}, {w + 0.01, s + 0.03}};
  return b;
}

}  // namespace hotspot::testing

namespace hotspot::testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hotspot-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace hotspot::testing

namespace hotspot::testing {

// A four-scheduler result table in percentage points.
inline ResultTable reference_table() {
  auto row = [](SchedulerKind k, double vm, double vs, double tm, double ts) {
    ResultRow r;
    r.scheduler = k;
    r.validation = {vm, vs};
    r.test = {tm, ts};
    return r;
  };
  return {row(SchedulerKind::step, 48.54, 3.41, 52.15, 2.78), row(SchedulerKind::linear, 60.57, 1.71, 60.49, 1.71),
          row(SchedulerKind::cosine, 60.27, 2.22, 63.58, 0.71),
          row(SchedulerKind::cosine_warmup, 50.85, 0.88, 53.78, 2.05)};
}

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(HOTSPOT_TEST_DATA_DIR) / name;
}

}  // namespace hotspot::testing
