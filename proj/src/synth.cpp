#include <cmath>
#include <cstdio>
#include <numbers>

#include "hotspot/dataset.hpp"
#include "hotspot/encodings.hpp"

namespace hotspot {

namespace {

constexpr double kCellDegrees = 0.04;  // ~4 km at mid latitudes
constexpr auto kCadence = std::chrono::minutes{15};

const std::vector<std::string>& channel_names() {
  static const std::vector<std::string> names{"IR_016", "IR_039", "IR_087", "IR_097", "IR_108", "IR_120",
                                              "IR_134", "VIS006", "VIS008", "WV_062", "WV_073"};
  return names;
}

}  // namespace

void SynthConfig::validate() const {
  if (events <= 0) throw std::invalid_argument("synth: events must be positive");
  if (rows < 3 || cols < 3) throw std::invalid_argument("synth: grid must be at least 3x3");
  if (steps < kWindow) throw std::invalid_argument("synth: steps must cover at least one 96-step window");
  if (!(sigma > 0.0)) throw std::invalid_argument("synth: sigma must be positive");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("synth: amplitude must be non-negative");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw std::invalid_argument("synth: missing_rate must be in [0,1)");
}

// Every event gets its own crop. The AoI is a square block of cells (a quarter
// of the shorter grid side, at least one cell) with its ring pulled a quarter
// cell inside the block so that exactly the block's cell centers fall inside.
// The event starts in the first eighth of the series and ends in the last
// eighth, so every overlapping window is mostly anomalous.
SynthOutput synth_generate(const SynthConfig& config) {
  config.validate();
  using namespace std::chrono;

  Rng channel_rng = make_rng(config.seed, "channels");
  std::array<double, kChannels> base{};
  std::array<double, kChannels> phase{};
  std::uniform_real_distribution<double> base_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  for (int c = 0; c < kChannels; ++c) {
    base[c] = base_dist(channel_rng);
    phase[c] = phase_dist(channel_rng);
  }
  const int infrared_end = kChannelGroups[0].first + kChannelGroups[0].size;

  const sys_days first_day{year{2012} / January / 1};
  const sys_days last_day{year{2022} / December / 31};
  const int day_span = static_cast<int>((last_day - first_day).count());

  SynthOutput out;
  for (int e = 0; e < config.events; ++e) {
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%03d", e);
    Rng rng = make_rng(config.seed, id);

    CropBundle b;
    b.event_id = id;
    b.rows = config.rows;
    b.cols = config.cols;
    b.channels = channel_names();
    const double west = std::uniform_real_distribution<double>(-9.0, 28.0)(rng);
    const double south = std::uniform_real_distribution<double>(36.0, 58.0)(rng);
    b.bbox = {west, south, west + config.cols * kCellDegrees, south + config.rows * kCellDegrees};

    const sys_days day = first_day + days{std::uniform_int_distribution<int>(0, day_span)(rng)};
    b.timestamps.reserve(static_cast<std::size_t>(config.steps));
    for (int t = 0; t < config.steps; ++t) b.timestamps.push_back(TimePoint{day} + duration_cast<seconds>(kCadence * t));

    const int block = std::max(1, std::min(config.rows, config.cols) / 4);
    const int r0 = std::uniform_int_distribution<int>(0, config.rows - block)(rng);
    const int c0 = std::uniform_int_distribution<int>(0, config.cols - block)(rng);
    const double dlat = (b.bbox.north - b.bbox.south) / b.rows;
    const double dlon = (b.bbox.east - b.bbox.west) / b.cols;
    const double north = b.bbox.north - (r0 + 0.25) * dlat;
    const double south_edge = b.bbox.north - (r0 + block - 0.25) * dlat;
    const double west_edge = b.bbox.west + (c0 + 0.25) * dlon;
    const double east_edge = b.bbox.west + (c0 + block - 0.25) * dlon;
    b.aoi = {{west_edge, south_edge}, {east_edge, south_edge}, {east_edge, north}, {west_edge, north}};

    const int start_step = std::uniform_int_distribution<int>(0, config.steps / 8)(rng);
    const int end_step = std::uniform_int_distribution<int>(7 * config.steps / 8, config.steps - 1)(rng);

    EventRecord ev;
    ev.event_id = id;
    ev.aoi = b.aoi;
    ev.start = b.timestamps[static_cast<std::size_t>(start_step)];
    ev.end = b.timestamps[static_cast<std::size_t>(end_step)];

    std::vector<char> inside(static_cast<std::size_t>(b.rows * b.cols));
    for (int r = 0; r < b.rows; ++r) {
      for (int c = 0; c < b.cols; ++c) {
        auto [lat, lon] = cell_center(b, r, c);
        inside[static_cast<std::size_t>(r * b.cols + c)] = contains(b.aoi, {lon, lat}) ? 1 : 0;
      }
    }

    b.landcover.resize(static_cast<std::size_t>(b.rows * b.cols));
    std::uniform_int_distribution<int> lc_dist(0, kLandcoverClasses - 1);
    for (auto& lc : b.landcover) lc = lc_dist(rng);

    std::normal_distribution<double> noise(0.0, config.sigma);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    b.data.resize(static_cast<std::size_t>(config.steps) * b.rows * b.cols * kChannels);
    std::size_t i = 0;
    for (int t = 0; t < config.steps; ++t) {
      const double day_fraction = static_cast<double>(t % kWindow) / kWindow;
      const bool active = t >= start_step && t <= end_step;
      for (int cell = 0; cell < b.rows * b.cols; ++cell) {
        for (int c = 0; c < kChannels; ++c, ++i) {
          double v = base[c] + config.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * day_fraction + phase[c]) +
                     noise(rng);
          if (active && inside[static_cast<std::size_t>(cell)] && c < infrared_end) v += config.amplitude;
          if (config.missing_rate > 0.0 && unit(rng) < config.missing_rate) v = std::nan("");
          b.data[i] = static_cast<float>(v);
        }
      }
    }

    out.bundles.push_back(std::move(b));
    out.events.push_back(std::move(ev));
  }
  return out;
}

}  // namespace hotspot
