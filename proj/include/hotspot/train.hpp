#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/model.hpp"

namespace hotspot {

// ---------------------------------------------------------------------------
// losses

/// Mean squared error over positions that are both in a masked timestep and
/// valid in the target. 0 when there is no such position.
double loss_eo(std::span<const Mat> reconstruction, std::span<const PixelTimeseries> target,
               std::span<const MaskSpec> masks);
/// Mean cross-entropy of the 9-way landcover logits.
double loss_lc(const Mat& logits, std::span<const int> categories);
/// Mean binary cross-entropy on sigmoid(logit), log-sum-exp form.
double loss_cls(const Vec& logits, std::span<const int> labels);
/// eo + lc + cls, added in that order.
double total_loss(double eo, double lc, double cls);

struct LossBreakdown {
  double eo = 0.0;
  double lc = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

/// ssl_only drops the classification term from the objective (it is still
/// reported).
struct LossOptions {
  bool ssl_only = false;
};

struct BatchGradient {
  LossBreakdown loss;
  Params grads;
};

/// Objective and its analytic gradient for a batch of normalized windows.
BatchGradient loss_and_gradient(const Params& params, std::span<const PixelTimeseries> batch,
                                std::span<const MaskSpec> masks, LossOptions options = {});

/// Objective only, from the plain forward pass.
LossBreakdown evaluate_loss(const Params& params, std::span<const PixelTimeseries> batch,
                            std::span<const MaskSpec> masks, LossOptions options = {});

// ---------------------------------------------------------------------------
// schedulers

enum class SchedulerKind { step, linear, cosine, cosine_warmup };

std::string to_string(SchedulerKind k);
std::string display_name(SchedulerKind k);
SchedulerKind parse_scheduler(std::string_view name);

struct SchedulerConfig {
  double step_gamma = 0.1;
  int step_size = 30;
  int warmup_epochs = 10;
};

double scheduler_lr(SchedulerKind kind, int epoch, int total_epochs, double base_lr, const SchedulerConfig& cfg = {});

// ---------------------------------------------------------------------------
// optimizer

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  long long step = 0;
  Params m;
  Params v;
};

AdamState adam_init(const Params& params);

/// One bias-corrected Adam update. Parameters are rounded to binary32 after
/// the update. Throws std::runtime_error naming the tensor on a non-finite
/// gradient, leaving params and state untouched.
void adam_step(Params& params, const Params& grads, AdamState& state, double lr, const AdamConfig& cfg = {});

// ---------------------------------------------------------------------------
// training

struct RunConfig {
  int epochs = 100;
  double base_lr = 1e-3;
  int batch_size = 32;
  SchedulerKind scheduler = SchedulerKind::cosine;
  SchedulerConfig scheduler_cfg;
  std::uint64_t seed = 42;
  double mask_ratio = 0.75;
  AdamConfig adam;
  bool ssl_only = false;

  void validate() const;
};

std::string run_config_to_json(const RunConfig& r);
RunConfig run_config_from_json(const std::string& text);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double l_eo = 0.0;
  double l_lc = 0.0;
  double l_cls = 0.0;
  double l_tot = 0.0;
  double val_f1 = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

std::string history_csv(const TrainHistory& h);

struct TrainResult {
  Params params;
  TrainHistory history;
};

/// Called after every epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains on dataset.train, scoring dataset.validation each epoch. Returns the
/// final-epoch parameters. Deterministic in (run, dataset, model config).
TrainResult train(const RunConfig& run, const Dataset& dataset, const ModelConfig& model_config,
                  const EpochCallback& on_epoch = {});

/// Positive-class F1 of the model on raw windows at threshold 0.5.
double evaluate_f1(const Params& params, std::span<const PixelTimeseries> series, const NormStats& norm);

// ---------------------------------------------------------------------------
// experiments

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation.
MeanStd mean_std(std::span<const double> values);

/// One row per scheduler. F1 values are in percentage points.
struct ResultRow {
  SchedulerKind scheduler = SchedulerKind::cosine;
  MeanStd validation;
  MeanStd test;
  std::vector<double> validation_runs;
  std::vector<double> test_runs;
};

using ResultTable = std::vector<ResultRow>;

struct ExperimentConfig {
  std::vector<SchedulerKind> schedulers{SchedulerKind::step, SchedulerKind::linear, SchedulerKind::cosine,
                                        SchedulerKind::cosine_warmup};
  std::vector<std::uint64_t> seeds{17, 42, 91};
  RunConfig run;  // seed and scheduler are overridden per cell
  ModelConfig model;
};

/// Trains once per (scheduler, seed) and aggregates validation/test F1.
ResultTable run_experiment(const Dataset& dataset, const ExperimentConfig& config,
                           const std::function<void(SchedulerKind, std::uint64_t, double, double)>& on_cell = {});

}  // namespace hotspot
