#include <cmath>

#include "hotspot/train.hpp"
#include "tape.hpp"

namespace hotspot {

namespace {

// Shared by loss_eo and loss_and_gradient so both sum in the same order.
void eo_accumulate(const Mat& recon, const PixelTimeseries& target, const MaskSpec& mask, double& sum, long long& count) {
  for (int t : mask.timesteps) {
    for (int c = 0; c < kChannels; ++c) {
      if (!target.valid(t, c)) continue;
      const double diff = recon(t, c) - target.value(t, c);
      sum += diff * diff;
      ++count;
    }
  }
}

long long eo_count(const PixelTimeseries& target, const MaskSpec& mask) {
  long long n = 0;
  for (int t : mask.timesteps) {
    for (int c = 0; c < kChannels; ++c) n += target.valid(t, c) ? 1 : 0;
  }
  return n;
}

// -log softmax(logits)[category]
double cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& logits, int category) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return lse - logits(category);
}

double bce_with_logit(double z, int label) {
  return std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
}

void check_category(int c) {
  if (c < 0 || c >= kLandcoverClasses) throw std::invalid_argument("landcover category outside [0,8]: " + std::to_string(c));
}

void check_label(int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1, got " + std::to_string(y));
}

}  // namespace

double loss_eo(std::span<const Mat> reconstruction, std::span<const PixelTimeseries> target,
               std::span<const MaskSpec> masks) {
  if (reconstruction.size() != target.size() || masks.size() != target.size()) {
    throw std::invalid_argument("loss_eo: batch sizes differ");
  }
  double sum = 0.0;
  long long count = 0;
  for (std::size_t b = 0; b < target.size(); ++b) {
    const auto& r = reconstruction[b];
    if (r.rows() != target[b].steps() || r.cols() != kChannels ||
        target[b].validity.size() != target[b].values.size()) {
      throw std::invalid_argument("loss_eo: reconstruction and target shapes differ");
    }
    for (int t : masks[b].timesteps) {
      if (t < 0 || t >= r.rows()) throw std::invalid_argument("loss_eo: mask timestep out of range");
    }
    eo_accumulate(r, target[b], masks[b], sum, count);
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double loss_lc(const Mat& logits, std::span<const int> categories) {
  if (logits.rows() != static_cast<Eigen::Index>(categories.size()) || logits.cols() != kLandcoverClasses) {
    throw std::invalid_argument("loss_lc: logits must be B x 9");
  }
  if (categories.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < categories.size(); ++b) {
    check_category(categories[b]);
    sum += cross_entropy(logits.row(static_cast<Eigen::Index>(b)), categories[b]);
  }
  return sum / static_cast<double>(categories.size());
}

double loss_cls(const Vec& logits, std::span<const int> labels) {
  if (logits.size() != static_cast<Eigen::Index>(labels.size())) throw std::invalid_argument("loss_cls: size mismatch");
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    check_label(labels[b]);
    sum += bce_with_logit(logits(static_cast<Eigen::Index>(b)), labels[b]);
  }
  return sum / static_cast<double>(labels.size());
}

double total_loss(double eo, double lc, double cls) {
  if (!std::isfinite(eo) || !std::isfinite(lc) || !std::isfinite(cls)) {
    throw std::invalid_argument("total_loss: non-finite component");
  }
  double total = eo;
  total += lc;
  total += cls;
  return total;
}

LossBreakdown evaluate_loss(const Params& params, std::span<const PixelTimeseries> batch,
                            std::span<const MaskSpec> masks, LossOptions options) {
  const ModelOutput out = forward(params, batch, masks);
  std::vector<int> categories, labels;
  for (const auto& s : batch) {
    categories.push_back(s.landcover);
    labels.push_back(s.label);
  }
  LossBreakdown l;
  l.eo = loss_eo(out.reconstruction, batch, masks);
  l.lc = loss_lc(out.landcover_logits, categories);
  l.cls = loss_cls(out.hotspot_logit, labels);
  l.total = total_loss(l.eo, l.lc, options.ssl_only ? 0.0 : l.cls);
  return l;
}

BatchGradient loss_and_gradient(const Params& params, std::span<const PixelTimeseries> batch,
                                std::span<const MaskSpec> masks, LossOptions options) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  if (masks.size() != batch.size()) throw std::invalid_argument("loss_and_gradient: one mask per sample required");
  long long n_eo = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    detail::check_sample(params.config, batch[b], masks[b]);
    check_category(batch[b].landcover);
    check_label(batch[b].label);
    n_eo += eo_count(batch[b], masks[b]);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double cls_weight = options.ssl_only ? 0.0 : 1.0;

  BatchGradient result{{}, zeros_like(params)};
  double eo_sum = 0.0, lc_sum = 0.0, cls_sum = 0.0;
  long long counted = 0;
  detail::SampleTape tape;
  detail::SampleGrad grad;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& s = batch[b];
    const auto out = detail::forward_sample(params, s, masks[b], tape);

    eo_accumulate(out.reconstruction, s, masks[b], eo_sum, counted);
    grad.reconstruction = Mat::Zero(out.reconstruction.rows(), kChannels);
    for (int t : masks[b].timesteps) {
      for (int c = 0; c < kChannels; ++c) {
        if (s.valid(t, c)) grad.reconstruction(t, c) = 2.0 * (out.reconstruction(t, c) - s.value(t, c)) / n_eo;
      }
    }

    const Eigen::RowVectorXd logits = out.landcover_logits.transpose();
    lc_sum += cross_entropy(logits, s.landcover);
    const double mx = logits.maxCoeff();
    Vec softmax = (out.landcover_logits.array() - mx).exp();
    softmax /= softmax.sum();
    softmax(s.landcover) -= 1.0;
    grad.landcover_logits = softmax * inv_b;

    cls_sum += bce_with_logit(out.hotspot_logit, s.label);
    grad.hotspot_logit = cls_weight * (sigmoid(out.hotspot_logit) - s.label) * inv_b;

    detail::backward_sample(params, tape, grad, result.grads);
  }
  result.loss.eo = n_eo == 0 ? 0.0 : eo_sum / static_cast<double>(n_eo);
  result.loss.lc = lc_sum / static_cast<double>(batch.size());
  result.loss.cls = cls_sum / static_cast<double>(batch.size());
  result.loss.total = total_loss(result.loss.eo, result.loss.lc, options.ssl_only ? 0.0 : result.loss.cls);
  return result;
}

}  // namespace hotspot
