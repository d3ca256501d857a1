#include "hotspot/timeseries.hpp"

#include <cmath>
#include <cstdio>

#include "binary_io.hpp"
#include "json.hpp"

namespace hotspot {

using nlohmann::json;
namespace fs = std::filesystem;

TimePoint parse_utc(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, consumed = 0;
  std::string buf(text);
  int n = std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed);
  if (n < 6) {
    s = 0;
    consumed = 0;
    n = std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d%n", &y, &mo, &d, &h, &mi, &consumed);
    if (n < 5) throw FormatError("not an ISO-8601 UTC timestamp: '" + buf + "'");
  }
  std::string_view zone = std::string_view(buf).substr(static_cast<std::size_t>(consumed));
  if (zone != "Z" && zone != "+00:00" && !zone.empty()) {
    throw FormatError("timestamp must be UTC: '" + buf + "'");
  }
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0) {
    throw FormatError("invalid calendar timestamp: '" + buf + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_utc(TimePoint t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int month_of(TimePoint t) {
  using namespace std::chrono;
  year_month_day ymd{floor<days>(t)};
  return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

void CropBundle::validate() const {
  if (event_id.empty()) throw InvariantError("bundle event_id is empty");
  if (rows <= 0 || cols <= 0) throw InvariantError("bundle rows and cols must be positive");
  if (!(bbox.west < bbox.east) || !(bbox.south < bbox.north)) throw InvariantError("bundle bbox is degenerate");
  if (bbox.south < -90.0 || bbox.north > 90.0 || bbox.west < -180.0 || bbox.east > 180.0) {
    throw InvariantError("bundle bbox outside lon/lat range");
  }
  if (channels.size() != static_cast<std::size_t>(kChannels)) {
    throw InvariantError("bundle must have exactly 11 channels, got " + std::to_string(channels.size()));
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i - 1] < timestamps[i])) {
      throw InvariantError("bundle timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
  const std::size_t cells = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (data.size() != timestamps.size() * cells * kChannels) {
    throw InvariantError("bundle data extent does not equal T*rows*cols*11");
  }
  if (landcover.size() != cells) throw InvariantError("bundle landcover grid size mismatch");
  for (int lc : landcover) {
    if (lc < 0 || lc >= kLandcoverClasses) throw InvariantError("landcover value outside [0,8]: " + std::to_string(lc));
  }
  if (distinct_vertices(aoi) < 3) throw InvariantError("bundle aoi needs at least 3 distinct vertices");
  if (aoi.front() == aoi.back()) throw InvariantError("bundle aoi must not repeat its first vertex");
}

bool same_bundle(const CropBundle& a, const CropBundle& b) {
  if (a.event_id != b.event_id || !(a.bbox == b.bbox) || a.rows != b.rows || a.cols != b.cols ||
      a.timestamps != b.timestamps || a.channels != b.channels || a.landcover != b.landcover || a.aoi != b.aoi ||
      a.data.size() != b.data.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool na = std::isnan(a.data[i]);
    const bool nb = std::isnan(b.data[i]);
    if (na != nb) return false;
    if (!na && std::bit_cast<std::uint32_t>(a.data[i]) != std::bit_cast<std::uint32_t>(b.data[i])) return false;
  }
  return true;
}

void EventRecord::validate() const {
  if (event_id.empty()) throw InvariantError("event_id is empty");
  if (!(start < end)) throw InvariantError("event " + event_id + ": start must precede end");
  if (distinct_vertices(aoi) < 3) throw InvariantError("event " + event_id + ": aoi needs at least 3 distinct vertices");
}

void PixelTimeseries::validate() const {
  if (values.empty() || values.size() % kChannels != 0) throw InvariantError("series values are not steps x 11");
  if (validity.size() != values.size()) throw InvariantError("series validity size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (validity[i] && !std::isfinite(values[i])) throw InvariantError("non-finite value at a valid position");
  }
  if (month < 1 || month > 12) throw InvariantError("series month outside 1..12");
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) throw InvariantError("series location out of range");
  if (landcover < 0 || landcover >= kLandcoverClasses) throw InvariantError("series landcover outside [0,8]");
  if (label != 0 && label != 1) throw InvariantError("series label must be 0 or 1");
  if (window_index < 0) throw InvariantError("series window_index negative");
}

void write_crop_bundle(const CropBundle& bundle, const fs::path& dir) {
  bundle.validate();
  fs::create_directories(dir);

  json meta;
  meta["event_id"] = bundle.event_id;
  meta["bbox"] = {bundle.bbox.west, bundle.bbox.south, bundle.bbox.east, bundle.bbox.north};
  meta["rows"] = bundle.rows;
  meta["cols"] = bundle.cols;
  meta["T"] = bundle.timestamps.size();
  json stamps = json::array();
  for (auto t : bundle.timestamps) stamps.push_back(format_utc(t));
  meta["timestamps"] = std::move(stamps);
  meta["channels"] = bundle.channels;
  meta["landcover"] = bundle.landcover;
  json aoi = json::array();
  for (const auto& v : bundle.aoi) aoi.push_back({v.lon, v.lat});
  meta["aoi"] = std::move(aoi);

  std::string blob;
  detail::append_f32_le(blob, bundle.data);
  detail::write_file(dir / "metadata.json", meta.dump(2) + "\n");
  detail::write_file(dir / "data.bin", blob);
}

CropBundle read_crop_bundle(const fs::path& dir) {
  const fs::path meta_path = dir / "metadata.json";
  const fs::path data_path = dir / "data.bin";
  if (!fs::exists(meta_path)) throw FormatError("missing " + meta_path.string());
  if (!fs::exists(data_path)) throw FormatError("missing " + data_path.string());

  CropBundle b;
  std::size_t steps = 0;
  try {
    json meta = json::parse(detail::read_file(meta_path));
    b.event_id = meta.at("event_id").get<std::string>();
    auto bbox = meta.at("bbox").get<std::vector<double>>();
    if (bbox.size() != 4) throw FormatError("bbox must have 4 numbers");
    b.bbox = {bbox[0], bbox[1], bbox[2], bbox[3]};
    b.rows = meta.at("rows").get<int>();
    b.cols = meta.at("cols").get<int>();
    steps = meta.at("T").get<std::size_t>();
    for (const auto& s : meta.at("timestamps")) b.timestamps.push_back(parse_utc(s.get<std::string>()));
    b.channels = meta.at("channels").get<std::vector<std::string>>();
    b.landcover = meta.at("landcover").get<std::vector<int>>();
    for (const auto& v : meta.at("aoi")) {
      auto pair = v.get<std::vector<double>>();
      if (pair.size() != 2) throw FormatError("aoi vertices must be [lon,lat] pairs");
      b.aoi.push_back({pair[0], pair[1]});
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed " + meta_path.string() + ": " + e.what());
  }
  if (b.aoi.size() > 1 && b.aoi.front() == b.aoi.back()) b.aoi.pop_back();
  if (b.timestamps.size() != steps) throw FormatError("metadata T does not match timestamp count");
  for (std::size_t i = 1; i < b.timestamps.size(); ++i) {
    if (!(b.timestamps[i - 1] < b.timestamps[i])) {
      throw FormatError("timestamps out of order at index " + std::to_string(i));
    }
  }
  if (b.rows <= 0 || b.cols <= 0) throw FormatError("rows and cols must be positive");

  const std::string blob = detail::read_file(data_path);
  const std::size_t expected = steps * static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols) * kChannels;
  if (blob.size() != expected * 4) {
    throw FormatError("data.bin length mismatch: expected " + std::to_string(expected * 4) + " bytes, found " +
                      std::to_string(blob.size()));
  }
  b.data.resize(expected);
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t i = 0; i < expected; ++i) b.data[i] = detail::load_f32_le(p + 4 * i);

  try {
    b.validate();
  } catch (const InvariantError& e) {
    throw FormatError(std::string("invalid bundle in ") + dir.string() + ": " + e.what());
  }
  return b;
}

std::pair<double, double> cell_center(const CropBundle& bundle, int row, int col) {
  const double dlat = (bundle.bbox.north - bundle.bbox.south) / bundle.rows;
  const double dlon = (bundle.bbox.east - bundle.bbox.west) / bundle.cols;
  return {bundle.bbox.north - (row + 0.5) * dlat, bundle.bbox.west + (col + 0.5) * dlon};
}

PixelSeries pixel_at(const CropBundle& bundle, int row, int col) {
  if (row < 0 || row >= bundle.rows || col < 0 || col >= bundle.cols) {
    throw std::out_of_range("pixel (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                            std::to_string(bundle.rows) + "x" + std::to_string(bundle.cols) + " grid");
  }
  PixelSeries px;
  const std::size_t steps = bundle.steps();
  px.values.resize(steps * kChannels);
  px.validity.resize(steps * kChannels);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t src = bundle.offset(t, row, col);
    for (int c = 0; c < kChannels; ++c) {
      const float v = bundle.data[src + c];
      px.values[t * kChannels + c] = v;
      px.validity[t * kChannels + c] = std::isnan(v) ? 0 : 1;
    }
  }
  std::tie(px.lat, px.lon) = cell_center(bundle, row, col);
  px.landcover = bundle.landcover[static_cast<std::size_t>(row) * bundle.cols + col];
  return px;
}

std::vector<WindowSegment> window_split(const std::vector<float>& values, const std::vector<unsigned char>& validity,
                                        int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  if (values.size() % kChannels != 0 || validity.size() != values.size()) {
    throw std::invalid_argument("series must be T x 11 with matching validity");
  }
  const std::size_t steps = values.size() / kChannels;
  const std::size_t width = static_cast<std::size_t>(window) * kChannels;
  std::vector<WindowSegment> out;
  for (std::size_t k = 0; (k + 1) * window <= steps; ++k) {
    WindowSegment seg;
    seg.window_index = static_cast<int>(k);
    seg.first_step = static_cast<int>(k * window);
    seg.values.assign(values.begin() + k * width, values.begin() + (k + 1) * width);
    seg.validity.assign(validity.begin() + k * width, validity.begin() + (k + 1) * width);
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace hotspot
