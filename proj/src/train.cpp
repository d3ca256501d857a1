#include "hotspot/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hotspot/metrics.hpp"
#include "json.hpp"

namespace hotspot {

using nlohmann::json;

void RunConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (!(base_lr > 0.0)) throw std::invalid_argument("base_lr must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw std::invalid_argument("mask_ratio must be in [0,1]");
  if (scheduler_cfg.step_size <= 0) throw std::invalid_argument("step_size must be positive");
  if (scheduler_cfg.warmup_epochs < 0) throw std::invalid_argument("warmup_epochs must be non-negative");
}

std::string run_config_to_json(const RunConfig& r) {
  json j = {{"epochs", r.epochs},
            {"base_lr", r.base_lr},
            {"batch_size", r.batch_size},
            {"scheduler", to_string(r.scheduler)},
            {"step_gamma", r.scheduler_cfg.step_gamma},
            {"step_size", r.scheduler_cfg.step_size},
            {"warmup_epochs", r.scheduler_cfg.warmup_epochs},
            {"seed", r.seed},
            {"mask_ratio", r.mask_ratio},
            {"beta1", r.adam.beta1},
            {"beta2", r.adam.beta2},
            {"eps", r.adam.eps},
            {"ssl_only", r.ssl_only}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig r;
  try {
    json j = json::parse(text);
    r.epochs = j.value("epochs", r.epochs);
    r.base_lr = j.value("base_lr", r.base_lr);
    r.batch_size = j.value("batch_size", r.batch_size);
    if (j.contains("scheduler")) r.scheduler = parse_scheduler(j["scheduler"].get<std::string>());
    r.scheduler_cfg.step_gamma = j.value("step_gamma", r.scheduler_cfg.step_gamma);
    r.scheduler_cfg.step_size = j.value("step_size", r.scheduler_cfg.step_size);
    r.scheduler_cfg.warmup_epochs = j.value("warmup_epochs", r.scheduler_cfg.warmup_epochs);
    r.seed = j.value("seed", r.seed);
    r.mask_ratio = j.value("mask_ratio", r.mask_ratio);
    r.adam.beta1 = j.value("beta1", r.adam.beta1);
    r.adam.beta2 = j.value("beta2", r.adam.beta2);
    r.adam.eps = j.value("eps", r.adam.eps);
    r.ssl_only = j.value("ssl_only", r.ssl_only);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run config: ") + e.what());
  }
  r.validate();
  return r;
}

std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,lr,l_eo,l_lc,l_cls,l_tot,val_f1\n";
  char buf[256];
  for (const auto& e : h) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", e.epoch, e.lr, e.l_eo, e.l_lc, e.l_cls,
                  e.l_tot, e.val_f1);
    out += buf;
  }
  return out;
}

double evaluate_f1(const Params& params, std::span<const PixelTimeseries> series, const NormStats& norm) {
  const auto probs = predict_all(params, series, norm);
  std::vector<int> labels;
  labels.reserve(series.size());
  for (const auto& s : series) labels.push_back(s.label);
  return f1(confusion(probs, labels, kDecisionThreshold));
}

TrainResult train(const RunConfig& run, const Dataset& dataset, const ModelConfig& model_config,
                  const EpochCallback& on_epoch) {
  run.validate();
  ModelConfig config = model_config;
  config.mask_ratio = run.mask_ratio;
  config.validate();
  if (dataset.train.empty()) throw std::invalid_argument("train split is empty");
  if (dataset.validation.empty()) throw std::invalid_argument("validation split is empty");

  std::vector<PixelTimeseries> samples;
  samples.reserve(dataset.train.size());
  for (const auto& s : dataset.train) samples.push_back(normalize(s, dataset.manifest.norm));

  TrainResult result{init_params(config, run.seed), {}};
  AdamState state = adam_init(result.params);
  Rng shuffle_rng = make_rng(run.seed, "shuffle");
  Rng mask_rng = make_rng(run.seed, "mask");
  const LossOptions options{run.ssl_only};

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<PixelTimeseries> batch;
  std::vector<MaskSpec> masks;

  for (int epoch = 0; epoch < run.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = scheduler_lr(run.scheduler, epoch, run.epochs, run.base_lr, run.scheduler_cfg);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(run.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(run.batch_size));
      batch.clear();
      masks.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(samples[order[i]]);
        masks.push_back(sample_mask(config.timesteps, run.mask_ratio, mask_rng));
      }
      BatchGradient bg;
      try {
        bg = loss_and_gradient(result.params, batch, masks, options);
        adam_step(result.params, bg.grads, state, rec.lr, run.adam);
      } catch (const std::exception& e) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(batches) + ": " + e.what());
      }
      rec.l_eo += bg.loss.eo;
      rec.l_lc += bg.loss.lc;
      rec.l_cls += bg.loss.cls;
      rec.l_tot += bg.loss.total;
      ++batches;
    }
    rec.l_eo /= batches;
    rec.l_lc /= batches;
    rec.l_cls /= batches;
    rec.l_tot /= batches;
    rec.val_f1 = evaluate_f1(result.params, dataset.validation, dataset.manifest.norm);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  MeanStd r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(values.size()));
  return r;
}

ResultTable run_experiment(const Dataset& dataset, const ExperimentConfig& config,
                           const std::function<void(SchedulerKind, std::uint64_t, double, double)>& on_cell) {
  if (config.schedulers.empty()) throw std::invalid_argument("run_experiment: no schedulers");
  if (config.seeds.empty()) throw std::invalid_argument("run_experiment: no seeds");
  ResultTable table;
  for (SchedulerKind kind : config.schedulers) {
    ResultRow row;
    row.scheduler = kind;
    for (std::uint64_t seed : config.seeds) {
      RunConfig run = config.run;
      run.scheduler = kind;
      run.seed = seed;
      const TrainResult tr = train(run, dataset, config.model);
      const double val = 100.0 * tr.history.back().val_f1;
      const double test = 100.0 * evaluate_f1(tr.params, dataset.test, dataset.manifest.norm);
      row.validation_runs.push_back(val);
      row.test_runs.push_back(test);
      if (on_cell) on_cell(kind, seed, val, test);
    }
    row.validation = mean_std(row.validation_runs);
    row.test = mean_std(row.test_runs);
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace hotspot
