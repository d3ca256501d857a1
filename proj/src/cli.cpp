#include "hotspot/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "binary_io.hpp"
#include "hotspot/dataset.hpp"
#include "hotspot/metrics.hpp"
#include "hotspot/model.hpp"
#include "hotspot/train.hpp"

namespace hotspot {

namespace fs = std::filesystem;

namespace {

std::pair<int, int> parse_pair(const std::string& text, const char* what) {
  int a = 0, b = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> a >> sep >> b) || (sep != 'x' && sep != 'X') || !in.eof()) {
    throw std::invalid_argument(std::string(what) + " must look like AxB, got '" + text + "'");
  }
  return {a, b};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::array<double, 3> parse_ratios(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 3) throw std::invalid_argument("--ratios needs three comma-separated values");
  return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
}

fs::path csv_sibling(const fs::path& p) {
  fs::path csv = p;
  if (csv.extension() == ".csv") return csv.string() + ".csv";
  return csv.replace_extension(".csv");
}

struct SynthArgs {
  std::string out;
  int events = 12;
  std::string grid = "8x8";
  int steps = 3 * kWindow;
  double sigma = 1.0;
  double amplitude = 3.0;
  double diurnal = 1.0;
  double missing = 0.0;
  std::uint64_t seed = 7;
};

struct BuildArgs {
  std::string events;
  std::string crops;
  std::string out;
  double neg_ratio = 1.0;
  int buffer = 2;
  std::string ratios = "0.7,0.15,0.15";
  std::string bins = "1x1";
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string dataset;
  std::string model_config;
  std::string run_config;
  std::string scheduler;
  std::uint64_t seed = 42;
  std::string out;
  bool ssl_only = false;
  int epochs = 0;
};

struct EvaluateArgs {
  std::string checkpoint;
  std::string dataset;
  std::string split = "test";
};

struct ExperimentArgs {
  std::string dataset;
  std::string schedulers = "step,linear,cosine,cosine_warmup";
  std::string seeds = "17,42,91";
  std::string out;
  std::string model_config;
  std::string run_config;
  int epochs = 0;
  bool ssl_only = false;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg;
  cfg.events = a.events;
  std::tie(cfg.rows, cfg.cols) = parse_pair(a.grid, "--grid");
  cfg.steps = a.steps;
  cfg.sigma = a.sigma;
  cfg.amplitude = a.amplitude;
  cfg.diurnal_amplitude = a.diurnal;
  cfg.missing_rate = a.missing;
  cfg.seed = a.seed;
  const SynthOutput synth = synth_generate(cfg);
  const fs::path dir = a.out;
  for (const auto& b : synth.bundles) write_crop_bundle(b, dir / b.event_id);
  write_event_catalog(synth.events, dir / "events.json");
  out << "wrote " << synth.bundles.size() << " crop bundles and " << (dir / "events.json").string() << "\n";
  return 0;
}

int run_build(const BuildArgs& a, std::ostream& out) {
  const auto events = read_event_catalog(a.events);
  BuildOptions opt;
  opt.bundle_dir = a.crops;
  opt.out_dir = a.out;
  opt.neg_ratio = a.neg_ratio;
  opt.buffer_cells = a.buffer;
  opt.ratios = parse_ratios(a.ratios);
  std::tie(opt.lat_bins, opt.lon_bins) = parse_pair(a.bins, "--bins");
  opt.seed = a.seed;
  const DatasetManifest m = build_dataset(events, opt);
  const auto counts = m.splits.counts();
  for (int s = 0; s < 3; ++s) {
    out << to_string(static_cast<Split>(s)) << ": " << counts[s] << " events, " << m.windows[s] << " windows ("
        << m.positives[s] << " positive)\n";
  }
  return 0;
}

ModelConfig load_model_config(const std::string& path) {
  if (path.empty()) return {};
  return model_config_from_json(detail::read_file(path));
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return {};
  return run_config_from_json(detail::read_file(path));
}

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(a.dataset);
  const ModelConfig model = load_model_config(a.model_config);
  RunConfig run = load_run_config(a.run_config);
  if (!a.scheduler.empty()) run.scheduler = parse_scheduler(a.scheduler);
  run.seed = a.seed;
  if (a.ssl_only) run.ssl_only = true;
  if (a.epochs > 0) run.epochs = a.epochs;

  const TrainResult result = train(run, data, model, [&](const EpochRecord& e) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "epoch %3d  lr %.3e  loss %.4f (eo %.4f lc %.4f cls %.4f)  val_f1 %.4f\n",
                  e.epoch, e.lr, e.l_tot, e.l_eo, e.l_lc, e.l_cls, e.val_f1);
    err << buf;
  });
  const fs::path dir = a.out;
  save_checkpoint(result.params, dir);
  detail::write_file(dir / "history.csv", history_csv(result.history));
  detail::write_file(dir / "run_config.json", run_config_to_json(run));
  out << "checkpoint written to " << dir.string() << " (final val_f1 " << result.history.back().val_f1 << ")\n";
  return 0;
}

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Params params = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.dataset);
  const auto& series = data.split(parse_split(a.split));
  const auto probs = predict_all(params, series, data.manifest.norm);
  std::vector<int> labels;
  for (const auto& s : series) labels.push_back(s.label);
  const ConfusionCounts c = confusion(probs, labels, kDecisionThreshold);
  char buf[200];
  std::snprintf(buf, sizeof(buf), "split=%s windows=%lld tp=%lld fp=%lld fn=%lld tn=%lld f1=%.4f\n", a.split.c_str(),
                c.total(), c.tp, c.fp, c.fn, c.tn, f1(c));
  out << buf;
  return 0;
}

int run_experiment_cmd(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(a.dataset);
  ExperimentConfig cfg;
  cfg.model = load_model_config(a.model_config);
  cfg.run = load_run_config(a.run_config);
  if (a.epochs > 0) cfg.run.epochs = a.epochs;
  if (a.ssl_only) cfg.run.ssl_only = true;
  cfg.schedulers.clear();
  for (const auto& s : split_list(a.schedulers)) cfg.schedulers.push_back(parse_scheduler(s));
  cfg.seeds.clear();
  for (const auto& s : split_list(a.seeds)) cfg.seeds.push_back(std::stoull(s));

  const auto started = std::chrono::steady_clock::now();
  const ResultTable table = run_experiment(data, cfg, [&](SchedulerKind k, std::uint64_t seed, double val, double test) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-13s seed %-4llu val_f1 %6.2f  test_f1 %6.2f\n", to_string(k).c_str(),
                  static_cast<unsigned long long>(seed), val, test);
    err << buf;
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const fs::path path = a.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const std::string text = render_table(table);
  detail::write_file(path, text);
  detail::write_file(csv_sibling(path), render_table_csv(table));
  out << text;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "elapsed %.1f s\n", seconds);
  err << buf;
  return 0;
}

}  // namespace

int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pixel-timeseries hotspot detection with a masked autoencoder", "hotspot"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic crop bundles and an event catalog");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--events", synth.events, "number of events");
  synth_cmd->add_option("--grid", synth.grid, "grid size RxC");
  synth_cmd->add_option("--steps", synth.steps, "timesteps per bundle (15-min cadence)");
  synth_cmd->add_option("--sigma", synth.sigma, "white-noise standard deviation");
  synth_cmd->add_option("--amplitude", synth.amplitude, "infrared anomaly added inside the AoI during the event");
  synth_cmd->add_option("--diurnal", synth.diurnal, "diurnal-cycle amplitude");
  synth_cmd->add_option("--missing-rate", synth.missing, "fraction of observations set missing");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-dataset", "extract labeled windows and split by event");
  build_cmd->add_option("--events", build.events, "event catalog JSON")->required();
  build_cmd->add_option("--crops", build.crops, "directory holding one crop bundle per event")->required();
  build_cmd->add_option("--out", build.out, "dataset output directory")->required();
  build_cmd->add_option("--neg-ratio", build.neg_ratio, "negative windows per positive window");
  build_cmd->add_option("--buffer", build.buffer, "cells between the AoI and negative candidates");
  build_cmd->add_option("--ratios", build.ratios, "train,validation,test fractions");
  build_cmd->add_option("--bins", build.bins, "geographic stratification grid LATxLON");
  build_cmd->add_option("--seed", build.seed, "sampling seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train one model");
  train_cmd->add_option("--dataset", tr.dataset, "dataset directory")->required();
  train_cmd->add_option("--model-config", tr.model_config, "model configuration JSON");
  train_cmd->add_option("--run-config", tr.run_config, "run configuration JSON");
  train_cmd->add_option("--scheduler", tr.scheduler, "step | linear | cosine | cosine_warmup");
  train_cmd->add_option("--seed", tr.seed, "run seed");
  train_cmd->add_option("--out", tr.out, "checkpoint directory")->required();
  train_cmd->add_option("--epochs", tr.epochs, "override the run configuration's epoch count");
  train_cmd->add_flag("--ssl-only", tr.ssl_only, "drop the classification loss");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on one split");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint directory or its header.json")->required();
  eval_cmd->add_option("--dataset", ev.dataset, "dataset directory")->required();
  eval_cmd->add_option("--split", ev.split, "train | validation | test")
      ->check(CLI::IsMember({"train", "validation", "test"}));

  ExperimentArgs ex;
  auto* exp_cmd = app.add_subcommand("experiment", "train every scheduler for every seed and tabulate F1");
  exp_cmd->add_option("--dataset", ex.dataset, "dataset directory")->required();
  exp_cmd->add_option("--schedulers", ex.schedulers, "comma-separated scheduler kinds");
  exp_cmd->add_option("--seeds", ex.seeds, "comma-separated seeds");
  exp_cmd->add_option("--out", ex.out, "result table path; a .csv is written next to it")->required();
  exp_cmd->add_option("--model-config", ex.model_config, "model configuration JSON");
  exp_cmd->add_option("--run-config", ex.run_config, "run configuration JSON");
  exp_cmd->add_option("--epochs", ex.epochs, "override the run configuration's epoch count");
  exp_cmd->add_flag("--ssl-only", ex.ssl_only, "drop the classification loss");

  std::vector<std::string> storage{"hotspot"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    err << app.help();
    return code == 0 ? 1 : code;
  }

  try {
    if (*synth_cmd) return run_synth(synth, out);
    if (*build_cmd) return run_build(build, out);
    if (*train_cmd) return run_train(tr, out, err);
    if (*eval_cmd) return run_evaluate(ev, out);
    if (*exp_cmd) return run_experiment_cmd(ex, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 1;
}

}  // namespace hotspot
