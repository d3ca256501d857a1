#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hotspot/random.hpp"
#include "hotspot/timeseries.hpp"

namespace hotspot {

enum class Split { train = 0, validation = 1, test = 2 };

std::string to_string(Split s);
Split parse_split(std::string_view name);

struct SplitAssignment {
  std::map<std::string, Split> by_event;

  std::array<int, 3> counts() const;
  Split of(const std::string& event_id) const;
};

struct NormStats {
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> std{};
};

struct DatasetManifest {
  NormStats norm;
  SplitAssignment splits;
  double neg_ratio = 1.0;
  int buffer_cells = 2;
  std::array<double, 3> ratios{0.7, 0.15, 0.15};
  int lat_bins = 1;
  int lon_bins = 1;
  std::uint64_t seed = 0;
  std::string generator = "hotspot build-dataset";
  // windows and positives per split, indexed by Split
  std::array<int, 3> windows{};
  std::array<int, 3> positives{};
};

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

/// Labeled windows from one event crop.
///
/// Cells whose center lies inside the AoI contribute their windows that
/// overlap [start, end] as positives; in-AoI windows without overlap are
/// dropped. Negatives come from cells farther than `buffer_cells` (Chebyshev)
/// from every AoI cell, restricted to the window indices that produced
/// positives, and are sampled without replacement.
std::vector<PixelTimeseries> extract_labeled_pixels(const CropBundle& bundle, const EventRecord& event,
                                                    double neg_ratio, int buffer_cells, Rng& rng);

/// Geographically stratified event-level split. Events are bucketed on a
/// lat_bins x lon_bins grid over the range of AoI centroids; each bucket is
/// shuffled and apportioned by largest remainder. When there are at least
/// three events, an empty split receives one event from the largest split.
SplitAssignment assign_splits(std::span<const EventRecord> events, std::array<double, 3> ratios, int lat_bins,
                              int lon_bins, Rng& rng);

/// Largest-remainder apportionment of `n` seats; ties go to the earlier slot.
std::array<int, 3> apportion(int n, std::array<double, 3> ratios);

/// Population mean/std over valid positions; std below 1e-6 becomes 1.0.
NormStats compute_norm_stats(std::span<const PixelTimeseries> series);

/// Standardizes valid values with `stats` and writes 0 at invalid positions.
PixelTimeseries normalize(const PixelTimeseries& series, const NormStats& stats);

struct SynthConfig {
  int events = 12;
  int rows = 8;
  int cols = 8;
  int steps = 3 * kWindow;
  double sigma = 1.0;
  double amplitude = 3.0;
  double diurnal_amplitude = 1.0;
  double missing_rate = 0.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthOutput {
  std::vector<CropBundle> bundles;
  std::vector<EventRecord> events;
};

SynthOutput synth_generate(const SynthConfig& config);

void write_event_catalog(std::span<const EventRecord> events, const std::filesystem::path& path);
std::vector<EventRecord> read_event_catalog(const std::filesystem::path& path);

void write_series_file(std::span<const PixelTimeseries> series, const std::filesystem::path& path);
std::vector<PixelTimeseries> read_series_file(const std::filesystem::path& path);

struct BuildOptions {
  std::filesystem::path bundle_dir;
  std::filesystem::path out_dir;
  double neg_ratio = 1.0;
  int buffer_cells = 2;
  std::array<double, 3> ratios{0.7, 0.15, 0.15};
  int lat_bins = 1;
  int lon_bins = 1;
  std::uint64_t seed = 0;
};

/// Extracts, splits and writes `series_{split}.bin` plus `manifest.json`.
/// Bundles are read from `bundle_dir/<event_id>/`.
DatasetManifest build_dataset(std::span<const EventRecord> events, const BuildOptions& options);

struct Dataset {
  DatasetManifest manifest;
  std::vector<PixelTimeseries> train;
  std::vector<PixelTimeseries> validation;
  std::vector<PixelTimeseries> test;

  const std::vector<PixelTimeseries>& split(Split s) const;
};

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace hotspot
