#include "hotspot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binary_io.hpp"
#include "json.hpp"

namespace hotspot {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

std::array<int, 3> SplitAssignment::counts() const {
  std::array<int, 3> c{};
  for (const auto& [id, split] : by_event) ++c[static_cast<int>(split)];
  return c;
}

Split SplitAssignment::of(const std::string& event_id) const {
  auto it = by_event.find(event_id);
  if (it == by_event.end()) throw std::out_of_range("event '" + event_id + "' has no split");
  return it->second;
}

// ---------------------------------------------------------------------------
// manifest

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["channel_mean"] = m.norm.mean;
  j["channel_std"] = m.norm.std;
  json splits = json::object();
  for (const auto& [id, s] : m.splits.by_event) splits[id] = to_string(s);
  j["splits"] = std::move(splits);
  j["neg_ratio"] = m.neg_ratio;
  j["buffer_cells"] = m.buffer_cells;
  j["ratios"] = m.ratios;
  j["bins"] = {m.lat_bins, m.lon_bins};
  j["seed"] = m.seed;
  j["generator"] = m.generator;
  json counts = json::object();
  for (int s = 0; s < 3; ++s) {
    counts[to_string(static_cast<Split>(s))] = {{"windows", m.windows[s]}, {"positive", m.positives[s]}};
  }
  j["counts"] = std::move(counts);
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    json j = json::parse(text);
    m.norm.mean = j.at("channel_mean").get<std::array<double, kChannels>>();
    m.norm.std = j.at("channel_std").get<std::array<double, kChannels>>();
    for (const auto& [id, s] : j.at("splits").items()) m.splits.by_event[id] = parse_split(s.get<std::string>());
    m.neg_ratio = j.at("neg_ratio").get<double>();
    m.buffer_cells = j.at("buffer_cells").get<int>();
    m.ratios = j.at("ratios").get<std::array<double, 3>>();
    auto bins = j.at("bins").get<std::array<int, 2>>();
    m.lat_bins = bins[0];
    m.lon_bins = bins[1];
    m.seed = j.at("seed").get<std::uint64_t>();
    m.generator = j.value("generator", m.generator);
    if (j.contains("counts")) {
      for (int s = 0; s < 3; ++s) {
        const auto& c = j["counts"].at(to_string(static_cast<Split>(s)));
        m.windows[s] = c.at("windows").get<int>();
        m.positives[s] = c.at("positive").get<int>();
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  for (double s : m.norm.std) {
    if (!(s > 0.0)) throw FormatError("manifest std entries must be positive");
  }
  return m;
}

// ---------------------------------------------------------------------------
// extraction

namespace {

PixelTimeseries make_window(const PixelSeries& px, const WindowSegment& seg, const CropBundle& bundle,
                            const std::string& event_id, int label) {
  PixelTimeseries w;
  w.values = seg.values;
  w.validity = seg.validity;
  w.lat = px.lat;
  w.lon = px.lon;
  w.month = month_of(bundle.timestamps[static_cast<std::size_t>(seg.first_step)]);
  w.landcover = px.landcover;
  w.label = label;
  w.event_id = event_id;
  w.window_index = seg.window_index;
  return w;
}

}  // namespace

std::vector<PixelTimeseries> extract_labeled_pixels(const CropBundle& bundle, const EventRecord& event,
                                                    double neg_ratio, int buffer_cells, Rng& rng) {
  if (bundle.event_id != event.event_id) {
    throw std::invalid_argument("bundle '" + bundle.event_id + "' does not belong to event '" + event.event_id + "'");
  }
  if (!(neg_ratio >= 0.0)) throw std::invalid_argument("neg_ratio must be non-negative");
  if (buffer_cells < 0) throw std::invalid_argument("buffer_cells must be non-negative");
  if (bundle.steps() < static_cast<std::size_t>(kWindow)) {
    throw std::invalid_argument("bundle '" + bundle.event_id + "' covers fewer than 96 timesteps");
  }

  const int n_windows = static_cast<int>(bundle.steps() / kWindow);
  std::vector<char> overlaps(static_cast<std::size_t>(n_windows), 0);
  for (int k = 0; k < n_windows; ++k) {
    for (int t = k * kWindow; t < (k + 1) * kWindow; ++t) {
      const auto ts = bundle.timestamps[static_cast<std::size_t>(t)];
      if (ts >= event.start && ts <= event.end) {
        overlaps[static_cast<std::size_t>(k)] = 1;
        break;
      }
    }
  }

  std::vector<std::pair<int, int>> aoi_cells;
  for (int r = 0; r < bundle.rows; ++r) {
    for (int c = 0; c < bundle.cols; ++c) {
      auto [lat, lon] = cell_center(bundle, r, c);
      if (contains(event.aoi, {lon, lat})) aoi_cells.emplace_back(r, c);
    }
  }
  if (aoi_cells.empty()) throw std::runtime_error("event '" + event.event_id + "': no pixel intersects the AoI");

  std::vector<PixelTimeseries> out;
  for (auto [r, c] : aoi_cells) {
    const PixelSeries px = pixel_at(bundle, r, c);
    for (const auto& seg : window_split(px.values, px.validity)) {
      if (overlaps[static_cast<std::size_t>(seg.window_index)]) out.push_back(make_window(px, seg, bundle, event.event_id, 1));
    }
  }
  const std::size_t positives = out.size();
  if (positives == 0) {
    throw std::runtime_error("event '" + event.event_id + "': no window overlaps the event time range");
  }

  // (row, col, window) triples eligible as negatives
  std::vector<std::array<int, 3>> candidates;
  for (int r = 0; r < bundle.rows; ++r) {
    for (int c = 0; c < bundle.cols; ++c) {
      int dist = std::numeric_limits<int>::max();
      for (auto [ar, ac] : aoi_cells) dist = std::min(dist, std::max(std::abs(r - ar), std::abs(c - ac)));
      if (dist <= buffer_cells) continue;
      for (int k = 0; k < n_windows; ++k) {
        if (overlaps[static_cast<std::size_t>(k)]) candidates.push_back({r, c, k});
      }
    }
  }
  if (candidates.empty()) {
    throw std::runtime_error("event '" + event.event_id + "': no negative candidate beyond the " +
                             std::to_string(buffer_cells) + "-cell buffer");
  }

  const auto wanted = static_cast<std::size_t>(std::llround(neg_ratio * static_cast<double>(positives)));
  const std::size_t take = std::min(wanted, candidates.size());
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(take);
  std::sort(candidates.begin(), candidates.end());

  int cached_r = -1, cached_c = -1;
  PixelSeries px;
  std::vector<WindowSegment> segments;
  for (const auto& [r, c, k] : candidates) {
    if (r != cached_r || c != cached_c) {
      px = pixel_at(bundle, r, c);
      segments = window_split(px.values, px.validity);
      cached_r = r;
      cached_c = c;
    }
    out.push_back(make_window(px, segments[static_cast<std::size_t>(k)], bundle, event.event_id, 0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// splits

std::array<int, 3> apportion(int n, std::array<double, 3> ratios) {
  std::array<int, 3> seats{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = ratios[i] * n;
    seats[i] = static_cast<int>(std::floor(quota + 1e-9));
    remainder[i] = quota - seats[i];
    assigned += seats[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++seats[order[k % 3]];
  while (assigned > n) {
    // floating round-up overshoot; take back from the largest slot
    auto it = std::max_element(seats.begin(), seats.end());
    --*it;
    --assigned;
  }
  return seats;
}

SplitAssignment assign_splits(std::span<const EventRecord> events, std::array<double, 3> ratios, int lat_bins,
                              int lon_bins, Rng& rng) {
  if (events.empty()) throw std::invalid_argument("assign_splits: empty event list");
  if (lat_bins <= 0 || lon_bins <= 0) throw std::invalid_argument("assign_splits: bin counts must be positive");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw std::invalid_argument("assign_splits: ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("assign_splits: ratios must sum to 1");

  std::vector<LonLat> centers;
  centers.reserve(events.size());
  for (const auto& e : events) centers.push_back(centroid(e.aoi));
  auto [lat_lo, lat_hi] = std::minmax_element(centers.begin(), centers.end(),
                                              [](const LonLat& a, const LonLat& b) { return a.lat < b.lat; });
  auto [lon_lo, lon_hi] = std::minmax_element(centers.begin(), centers.end(),
                                              [](const LonLat& a, const LonLat& b) { return a.lon < b.lon; });
  const double lat_min = lat_lo->lat, lat_span = lat_hi->lat - lat_lo->lat;
  const double lon_min = lon_lo->lon, lon_span = lon_hi->lon - lon_lo->lon;
  auto bin = [](double v, double lo, double span, int bins) {
    if (span <= 0.0) return 0;
    return std::min(bins - 1, static_cast<int>(std::floor((v - lo) / span * bins)));
  };

  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(lat_bins * lon_bins));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const int b = bin(centers[i].lat, lat_min, lat_span, lat_bins) * lon_bins + bin(centers[i].lon, lon_min, lon_span, lon_bins);
    buckets[static_cast<std::size_t>(b)].push_back(i);
  }

  std::array<std::vector<std::size_t>, 3> members;
  for (auto& bucket : buckets) {
    if (bucket.empty()) continue;
    std::shuffle(bucket.begin(), bucket.end(), rng);
    const auto seats = apportion(static_cast<int>(bucket.size()), ratios);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (int k = 0; k < seats[s]; ++k) members[s].push_back(bucket[pos++]);
    }
  }

  if (events.size() >= 3) {
    for (int s = 0; s < 3; ++s) {
      if (!members[s].empty()) continue;
      int donor = 0;
      for (int d = 1; d < 3; ++d) {
        if (members[d].size() > members[donor].size()) donor = d;
      }
      members[s].push_back(members[donor].back());
      members[donor].pop_back();
    }
  }

  SplitAssignment out;
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i : members[s]) {
      auto [it, inserted] = out.by_event.emplace(events[i].event_id, static_cast<Split>(s));
      if (!inserted) throw std::invalid_argument("duplicate event_id '" + events[i].event_id + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// normalization

NormStats compute_norm_stats(std::span<const PixelTimeseries> series) {
  std::array<double, kChannels> sum{};
  std::array<long long, kChannels> count{};
  for (const auto& s : series) {
    for (int t = 0; t < s.steps(); ++t) {
      for (int c = 0; c < kChannels; ++c) {
        if (!s.valid(t, c)) continue;
        sum[c] += s.value(t, c);
        ++count[c];
      }
    }
  }
  NormStats stats;
  for (int c = 0; c < kChannels; ++c) {
    if (count[c] == 0) throw std::runtime_error("channel " + std::to_string(c) + " has no valid observations");
    stats.mean[c] = sum[c] / static_cast<double>(count[c]);
  }
  std::array<double, kChannels> sq{};
  for (const auto& s : series) {
    for (int t = 0; t < s.steps(); ++t) {
      for (int c = 0; c < kChannels; ++c) {
        if (!s.valid(t, c)) continue;
        const double d = s.value(t, c) - stats.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (int c = 0; c < kChannels; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(count[c]));
    stats.std[c] = sd < 1e-6 ? 1.0 : sd;
  }
  return stats;
}

PixelTimeseries normalize(const PixelTimeseries& series, const NormStats& stats) {
  PixelTimeseries out = series;
  for (int t = 0; t < series.steps(); ++t) {
    for (int c = 0; c < kChannels; ++c) {
      const std::size_t i = static_cast<std::size_t>(t) * kChannels + c;
      out.values[i] = series.validity[i] ? static_cast<float>((series.values[i] - stats.mean[c]) / stats.std[c]) : 0.0f;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// files

void write_event_catalog(std::span<const EventRecord> events, const fs::path& path) {
  json arr = json::array();
  for (const auto& e : events) {
    e.validate();
    json aoi = json::array();
    for (const auto& v : e.aoi) aoi.push_back({v.lon, v.lat});
    arr.push_back({{"event_id", e.event_id}, {"aoi", aoi}, {"start", format_utc(e.start)}, {"end", format_utc(e.end)}});
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file(path, arr.dump(2) + "\n");
}

std::vector<EventRecord> read_event_catalog(const fs::path& path) {
  std::vector<EventRecord> events;
  try {
    json arr = json::parse(detail::read_file(path));
    if (!arr.is_array()) throw FormatError("event catalog must be a JSON array");
    for (const auto& item : arr) {
      EventRecord e;
      e.event_id = item.at("event_id").get<std::string>();
      for (const auto& v : item.at("aoi")) {
        auto pair = v.get<std::vector<double>>();
        if (pair.size() != 2) throw FormatError("aoi vertices must be [lon,lat] pairs");
        e.aoi.push_back({pair[0], pair[1]});
      }
      if (e.aoi.size() > 1 && e.aoi.front() == e.aoi.back()) e.aoi.pop_back();
      e.start = parse_utc(item.at("start").get<std::string>());
      e.end = parse_utc(item.at("end").get<std::string>());
      e.validate();
      events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed event catalog " + path.string() + ": " + e.what());
  }
  return events;
}

void write_series_file(std::span<const PixelTimeseries> series, const fs::path& path) {
  std::string blob;
  for (const auto& s : series) {
    if (s.steps() != kWindow) throw InvariantError("series records must hold 96-step windows");
    json header = {{"event_id", s.event_id}, {"lat", s.lat},           {"lon", s.lon},
                   {"month", s.month},       {"landcover", s.landcover}, {"label", s.label},
                   {"window_index", s.window_index}};
    const std::string text = header.dump();
    detail::append_u64_le(blob, text.size());
    blob += text;
    std::vector<float> stored(s.values);
    for (std::size_t i = 0; i < stored.size(); ++i) {
      if (!s.validity[i]) stored[i] = std::numeric_limits<float>::quiet_NaN();
    }
    detail::append_f32_le(blob, stored);
    for (unsigned char v : s.validity) blob.push_back(static_cast<char>(v ? 1 : 0));
  }
  detail::write_file(path, blob);
}

std::vector<PixelTimeseries> read_series_file(const fs::path& path) {
  const std::string blob = detail::read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  const std::size_t n_values = static_cast<std::size_t>(kWindow) * kChannels;
  std::vector<PixelTimeseries> out;
  std::size_t pos = 0;
  while (pos < blob.size()) {
    if (blob.size() - pos < 8) throw FormatError(path.string() + ": truncated record header");
    const std::uint64_t len = detail::load_u64_le(p + pos);
    pos += 8;
    if (blob.size() - pos < len + n_values * 5) throw FormatError(path.string() + ": truncated record");
    PixelTimeseries s;
    try {
      json h = json::parse(blob.substr(pos, len));
      s.event_id = h.at("event_id").get<std::string>();
      s.lat = h.at("lat").get<double>();
      s.lon = h.at("lon").get<double>();
      s.month = h.at("month").get<int>();
      s.landcover = h.at("landcover").get<int>();
      s.label = h.at("label").get<int>();
      s.window_index = h.at("window_index").get<int>();
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": malformed record header: " + e.what());
    }
    pos += len;
    s.values.resize(n_values);
    for (std::size_t i = 0; i < n_values; ++i) s.values[i] = detail::load_f32_le(p + pos + 4 * i);
    pos += 4 * n_values;
    s.validity.assign(p + pos, p + pos + n_values);
    pos += n_values;
    try {
      s.validate();
    } catch (const InvariantError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

DatasetManifest build_dataset(std::span<const EventRecord> events, const BuildOptions& options) {
  std::set<std::string> ids;
  for (const auto& e : events) {
    e.validate();
    if (!ids.insert(e.event_id).second) throw std::invalid_argument("duplicate event_id '" + e.event_id + "'");
  }

  std::vector<std::vector<PixelTimeseries>> per_event;
  per_event.reserve(events.size());
  for (const auto& e : events) {
    const CropBundle bundle = read_crop_bundle(options.bundle_dir / e.event_id);
    Rng rng = make_rng(options.seed, "extract/" + e.event_id);
    per_event.push_back(extract_labeled_pixels(bundle, e, options.neg_ratio, options.buffer_cells, rng));
  }

  Rng split_rng = make_rng(options.seed, "splits");
  DatasetManifest m;
  m.splits = assign_splits(events, options.ratios, options.lat_bins, options.lon_bins, split_rng);
  m.neg_ratio = options.neg_ratio;
  m.buffer_cells = options.buffer_cells;
  m.ratios = options.ratios;
  m.lat_bins = options.lat_bins;
  m.lon_bins = options.lon_bins;
  m.seed = options.seed;

  std::array<std::vector<PixelTimeseries>, 3> by_split;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const int s = static_cast<int>(m.splits.of(events[i].event_id));
    for (auto& w : per_event[i]) {
      ++m.windows[s];
      m.positives[s] += w.label;
      by_split[s].push_back(std::move(w));
    }
  }
  if (by_split[0].empty()) throw std::runtime_error("train split holds no windows");
  m.norm = compute_norm_stats(by_split[0]);

  fs::create_directories(options.out_dir);
  for (int s = 0; s < 3; ++s) {
    write_series_file(by_split[s], options.out_dir / ("series_" + to_string(static_cast<Split>(s)) + ".bin"));
  }
  detail::write_file(options.out_dir / "manifest.json", manifest_to_json(m));
  return m;
}

const std::vector<PixelTimeseries>& Dataset::split(Split s) const {
  switch (s) {
    case Split::train:
      return train;
    case Split::validation:
      return validation;
    case Split::test:
      return test;
  }
  return train;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.manifest = manifest_from_json(detail::read_file(dir / "manifest.json"));
  d.train = read_series_file(dir / "series_train.bin");
  d.validation = read_series_file(dir / "series_validation.bin");
  d.test = read_series_file(dir / "series_test.bin");
  return d;
}

}  // namespace hotspot
