#include <cmath>
#include <numbers>

#include "hotspot/train.hpp"

namespace hotspot {

std::string to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::step:
      return "step";
    case SchedulerKind::linear:
      return "linear";
    case SchedulerKind::cosine:
      return "cosine";
    case SchedulerKind::cosine_warmup:
      return "cosine_warmup";
  }
  return "?";
}

std::string display_name(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::step:
      return "Step LR";
    case SchedulerKind::linear:
      return "Linear";
    case SchedulerKind::cosine:
      return "Cosine";
    case SchedulerKind::cosine_warmup:
      return "Cosine Warmup";
  }
  return "?";
}

SchedulerKind parse_scheduler(std::string_view name) {
  if (name == "step") return SchedulerKind::step;
  if (name == "linear") return SchedulerKind::linear;
  if (name == "cosine") return SchedulerKind::cosine;
  if (name == "cosine_warmup") return SchedulerKind::cosine_warmup;
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

double scheduler_lr(SchedulerKind kind, int epoch, int total_epochs, double base_lr, const SchedulerConfig& cfg) {
  if (total_epochs <= 0 || epoch < 0 || epoch >= total_epochs) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(total_epochs) + ")");
  }
  const double pi = std::numbers::pi;
  switch (kind) {
    case SchedulerKind::step:
      if (cfg.step_size <= 0) throw std::invalid_argument("step_size must be positive");
      return base_lr * std::pow(cfg.step_gamma, epoch / cfg.step_size);
    case SchedulerKind::linear:
      return base_lr * (1.0 - static_cast<double>(epoch) / total_epochs);
    case SchedulerKind::cosine:
      return base_lr * 0.5 * (1.0 + std::cos(pi * epoch / total_epochs));
    case SchedulerKind::cosine_warmup: {
      const int warmup = cfg.warmup_epochs;
      if (warmup < 0) throw std::invalid_argument("warmup_epochs must be non-negative");
      if (epoch < warmup) return base_lr * (epoch + 1) / warmup;
      return base_lr * 0.5 * (1.0 + std::cos(pi * (epoch - warmup) / (total_epochs - warmup)));
    }
  }
  throw std::invalid_argument("unknown scheduler kind");
}

namespace {

struct Slot {
  std::string name;
  double* data;
  Eigen::Index size;
};

std::vector<Slot> slots(Params& p) {
  std::vector<Slot> out;
  for_each_tensor(p, [&](const std::string& name, auto& t) { out.push_back({name, t.data(), t.size()}); });
  return out;
}

std::vector<Slot> slots(const Params& p) {
  std::vector<Slot> out;
  for_each_tensor(p, [&](const std::string& name, const auto& t) {
    out.push_back({name, const_cast<double*>(t.data()), t.size()});
  });
  return out;
}

}  // namespace

AdamState adam_init(const Params& params) { return {0, zeros_like(params), zeros_like(params)}; }

void adam_step(Params& params, const Params& grads, AdamState& state, double lr, const AdamConfig& cfg) {
  auto p = slots(params);
  const auto g = slots(grads);
  auto m = slots(state.m);
  auto v = slots(state.v);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw std::invalid_argument("adam_step: gradient registry does not match parameters");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i].size != p[i].size) throw std::invalid_argument("adam_step: shape mismatch at " + p[i].name);
    for (Eigen::Index k = 0; k < g[i].size; ++k) {
      if (!std::isfinite(g[i].data[k])) throw std::runtime_error("non-finite gradient in parameter " + p[i].name);
    }
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (Eigen::Index k = 0; k < p[i].size; ++k) {
      const double gk = g[i].data[k];
      double& mk = m[i].data[k];
      double& vk = v[i].data[k];
      mk = cfg.beta1 * mk + (1.0 - cfg.beta1) * gk;
      vk = cfg.beta2 * vk + (1.0 - cfg.beta2) * gk * gk;
      const double update = lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps);
      p[i].data[k] = static_cast<double>(static_cast<float>(p[i].data[k] - update));
    }
  }
}

}  // namespace hotspot
