#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hotspot/model.hpp"
#include "hotspot/train.hpp"

namespace hotspot::testing {

// Central finite differences of the total loss, evaluated through the plain
// forward pass and the standalone loss functions only.
struct CoordinateCheck {
  std::string tensor;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct Coordinate {
  std::size_t tensor;
  Eigen::Index index;
};

inline std::vector<std::pair<std::string, double*>> flat_tensors(Params& p, std::vector<Eigen::Index>& sizes) {
  std::vector<std::pair<std::string, double*>> out;
  sizes.clear();
  for_each_tensor(p, [&](const std::string& name, auto& t) {
    out.emplace_back(name, t.data());
    sizes.push_back(t.size());
  });
  return out;
}

inline double relative_error(double a, double n) {
  const double scale = std::max({std::abs(a), std::abs(n), 1e-8});
  return std::abs(a - n) / scale;
}

inline std::vector<CoordinateCheck> check_gradient(const Params& params, std::span<const PixelTimeseries> batch,
                                                   std::span<const MaskSpec> masks, const Params& analytic,
                                                   std::span<const Coordinate> coords, LossOptions options = {}) {
  Params probe = params;
  Params grads = analytic;
  std::vector<Eigen::Index> sizes, gsizes;
  auto probe_t = flat_tensors(probe, sizes);
  auto grad_t = flat_tensors(grads, gsizes);
  std::vector<CoordinateCheck> out;
  for (const auto& c : coords) {
    double& theta = probe_t[c.tensor].second[c.index];
    const double saved = theta;
    const double h = 1e-4 * std::max(1.0, std::abs(saved));
    theta = saved + h;
    const double up = evaluate_loss(probe, batch, masks, options).total;
    theta = saved - h;
    const double down = evaluate_loss(probe, batch, masks, options).total;
    theta = saved;
    CoordinateCheck r;
    r.tensor = probe_t[c.tensor].first;
    r.index = c.index;
    r.numeric = (up - down) / (2.0 * h);
    r.analytic = grad_t[c.tensor].second[c.index];
    r.rel_error = relative_error(r.analytic, r.numeric);
    out.push_back(r);
  }
  return out;
}

// `count` coordinates drawn uniformly over all parameters.
inline std::vector<Coordinate> random_coordinates(const Params& params, int count, std::mt19937_64& rng) {
  Params copy = params;
  std::vector<Eigen::Index> sizes;
  flat_tensors(copy, sizes);
  std::vector<Eigen::Index> cumulative;
  Eigen::Index total = 0;
  for (auto s : sizes) cumulative.push_back(total += s);
  std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);
  std::vector<Coordinate> out;
  for (int i = 0; i < count; ++i) {
    const Eigen::Index flat = pick(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), flat);
    const std::size_t t = static_cast<std::size_t>(it - cumulative.begin());
    const Eigen::Index base = t == 0 ? 0 : cumulative[t - 1];
    out.push_back({t, flat - base});
  }
  return out;
}

// One random coordinate inside every tensor of the registry.
inline std::vector<Coordinate> per_tensor_coordinates(const Params& params, std::mt19937_64& rng) {
  Params copy = params;
  std::vector<Eigen::Index> sizes;
  flat_tensors(copy, sizes);
  std::vector<Coordinate> out;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    out.push_back({t, std::uniform_int_distribution<Eigen::Index>(0, sizes[t] - 1)(rng)});
  }
  return out;
}

}  // namespace hotspot::testing
