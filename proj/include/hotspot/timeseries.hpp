#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hotspot/geometry.hpp"

namespace hotspot {

inline constexpr int kChannels = 11;
inline constexpr int kWindow = 96;
inline constexpr int kLandcoverClasses = 9;

using TimePoint = std::chrono::sys_seconds;

/// Thrown when a value violates one of the documented data-model invariants.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed or inconsistent files on disk.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ISO-8601 UTC, "YYYY-MM-DDTHH:MM:SSZ". Parsing also accepts a missing seconds
// field and a "+00:00" suffix.
TimePoint parse_utc(std::string_view text);
std::string format_utc(TimePoint t);
int month_of(TimePoint t);

struct BBox {
  double west = 0.0;
  double south = 0.0;
  double east = 0.0;
  double north = 0.0;

  bool operator==(const BBox&) const = default;
};

/// A spatio-temporal raster crop around one event.
///
/// `data` is laid out [T][row][col][channel]; missing observations are NaN.
struct CropBundle {
  std::string event_id;
  BBox bbox;
  int rows = 0;
  int cols = 0;
  std::vector<TimePoint> timestamps;
  std::vector<std::string> channels;
  std::vector<float> data;
  std::vector<int> landcover;  // row-major, rows*cols
  Polygon aoi;

  std::size_t steps() const { return timestamps.size(); }
  std::size_t offset(std::size_t t, int row, int col) const {
    return ((t * rows + row) * static_cast<std::size_t>(cols) + col) * kChannels;
  }
  float at(std::size_t t, int row, int col, int channel) const { return data[offset(t, row, col) + channel]; }

  /// Throws InvariantError describing the first violated invariant.
  void validate() const;
};

/// NaN-aware equality: NaN cells compare equal to NaN cells.
bool same_bundle(const CropBundle& a, const CropBundle& b);

struct EventRecord {
  std::string event_id;
  Polygon aoi;
  TimePoint start;
  TimePoint end;

  void validate() const;
};

/// One pixel's window of observations with its auxiliary attributes.
///
/// `values` and `validity` are [step][channel]. The default length is kWindow
/// but reduced-size windows are allowed for testing the model.
struct PixelTimeseries {
  std::vector<float> values;
  std::vector<unsigned char> validity;
  double lat = 0.0;
  double lon = 0.0;
  int month = 1;
  int landcover = 0;
  int label = 0;
  std::string event_id;
  int window_index = 0;

  int steps() const { return static_cast<int>(values.size() / kChannels); }
  float value(int t, int c) const { return values[static_cast<std::size_t>(t) * kChannels + c]; }
  bool valid(int t, int c) const { return validity[static_cast<std::size_t>(t) * kChannels + c] != 0; }

  void validate() const;
};

/// The full time series of a single cell.
struct PixelSeries {
  std::vector<float> values;  // [T][channel], NaN where missing
  std::vector<unsigned char> validity;
  double lat = 0.0;
  double lon = 0.0;
  int landcover = 0;
};

void write_crop_bundle(const CropBundle& bundle, const std::filesystem::path& dir);
CropBundle read_crop_bundle(const std::filesystem::path& dir);

/// Cell-center coordinates of a uniform lon/lat grid over the bundle bbox.
/// Row 0 is the northernmost row.
std::pair<double, double> cell_center(const CropBundle& bundle, int row, int col);

PixelSeries pixel_at(const CropBundle& bundle, int row, int col);

struct WindowSegment {
  int window_index = 0;
  int first_step = 0;
  std::vector<float> values;
  std::vector<unsigned char> validity;
};

/// Non-overlapping segments of exactly `window` steps from index 0; the
/// trailing remainder is dropped.
std::vector<WindowSegment> window_split(const std::vector<float>& values, const std::vector<unsigned char>& validity,
                                        int window = kWindow);

}  // namespace hotspot
