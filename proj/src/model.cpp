#include <algorithm>
#include <cmath>
#include <numeric>

#include "hotspot/model.hpp"
#include "json.hpp"
#include "tape.hpp"

namespace hotspot {

using nlohmann::json;

void ModelConfig::validate() const {
  if (d_model <= 0 || d_model % 2 != 0) throw std::invalid_argument("d_model must be even and positive");
  if (attention_heads <= 0 || d_model % attention_heads != 0) {
    throw std::invalid_argument("d_model (" + std::to_string(d_model) + ") must be divisible by attention_heads (" +
                                std::to_string(attention_heads) + ")");
  }
  if (encoder_layers < 0 || decoder_layers < 0) throw std::invalid_argument("layer counts must be non-negative");
  if (ff_width < 0) throw std::invalid_argument("ff_width must be non-negative");
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw std::invalid_argument("mask_ratio must be in [0,1]");
  if (timesteps <= 0) throw std::invalid_argument("timesteps must be positive");
}

std::string model_config_to_json(const ModelConfig& c) {
  json j = {{"d_model", c.d_model},
            {"encoder_layers", c.encoder_layers},
            {"decoder_layers", c.decoder_layers},
            {"attention_heads", c.attention_heads},
            {"ff_width", c.feed_forward()},
            {"mask_ratio", c.mask_ratio},
            {"timesteps", c.timesteps}};
  return j.dump(2) + "\n";
}

ModelConfig model_config_from_json(const std::string& text) {
  ModelConfig c;
  try {
    json j = json::parse(text);
    c.d_model = j.value("d_model", c.d_model);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.attention_heads = j.value("attention_heads", c.attention_heads);
    c.ff_width = j.value("ff_width", c.ff_width);
    c.mask_ratio = j.value("mask_ratio", c.mask_ratio);
    c.timesteps = j.value("timesteps", c.timesteps);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// parameters

namespace {

Linear make_linear(int out, int in) { return {Mat::Zero(out, in), Vec::Zero(out)}; }
LayerNorm make_norm(int d) { return {Vec::Ones(d), Vec::Zero(d)}; }
Attention make_attention(int d) { return {make_linear(d, d), make_linear(d, d), make_linear(d, d), make_linear(d, d)}; }
FeedForward make_ffn(int d, int f) { return {make_linear(f, d), make_linear(d, f)}; }

Params allocate(const ModelConfig& c) {
  const int d = c.d_model;
  Params p;
  p.config = c;
  for (int g = 0; g < kGroups; ++g) {
    p.group_proj[g] = make_linear(d, kChannelGroups[g].size);
    p.recon_heads[g] = make_linear(kChannelGroups[g].size, d);
  }
  p.group_embed = Mat::Zero(kGroups, d);
  p.landcover_embed = Mat::Zero(kLandcoverClasses, d);
  p.mask_token = Vec::Zero(d);
  p.month_proj = Mat::Zero(d, 2);
  p.location_proj = Mat::Zero(d, 3);
  for (int l = 0; l < c.encoder_layers; ++l) {
    p.encoder.push_back({make_norm(d), make_attention(d), make_norm(d), make_ffn(d, c.feed_forward())});
  }
  p.encoder_norm = make_norm(d);
  for (int l = 0; l < c.decoder_layers; ++l) {
    p.decoder.push_back({make_norm(d), make_attention(d), make_norm(d), make_attention(d), make_norm(d),
                         make_ffn(d, c.feed_forward())});
  }
  p.decoder_norm = make_norm(d);
  p.landcover_head = make_linear(kLandcoverClasses, d);
  p.hotspot_head = make_linear(1, d);
  return p;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<TensorInfo> tensor_registry(const Params& p) {
  std::vector<TensorInfo> out;
  for_each_tensor(p, [&](const std::string& name, const auto& t) {
    using T = std::decay_t<decltype(t)>;
    if constexpr (T::ColsAtCompileTime == 1) {
      out.push_back({name, {static_cast<int>(t.size())}});
    } else {
      out.push_back({name, {static_cast<int>(t.rows()), static_cast<int>(t.cols())}});
    }
  });
  return out;
}

std::size_t parameter_count(const Params& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

Params zeros_like(const Params& p) {
  Params z = p;
  for_each_tensor(z, [](const std::string&, auto& t) { t.setZero(); });
  return z;
}

Params init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Params p = allocate(config);
  Rng rng = make_rng(seed, "init");
  for_each_tensor(p, [&](const std::string& name, auto& t) {
    if (ends_with(name, ".bias") || ends_with(name, ".beta")) {
      t.setZero();
    } else if (ends_with(name, ".gamma")) {
      t.setOnes();
    } else {
      using T = std::decay_t<decltype(t)>;
      const double fan_in = T::ColsAtCompileTime == 1 ? static_cast<double>(t.size()) : static_cast<double>(t.cols());
      const double fan_out = T::ColsAtCompileTime == 1 ? 1.0 : static_cast<double>(t.rows());
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      // fill in row-major order so the draw sequence matches the file layout
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = dist(rng);
      }
    }
  });
  round_to_binary32(p);
  return p;
}

void round_to_binary32(Params& p) {
  for_each_tensor(p, [](const std::string&, auto& t) {
    t = t.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  });
}

bool all_finite(const Params& p) {
  bool ok = true;
  for_each_tensor(p, [&](const std::string&, const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

bool identical(const Params& a, const Params& b) {
  if (!(a.config == b.config)) return false;
  std::vector<const double*> pa, pb;
  std::vector<Eigen::Index> sa, sb;
  for_each_tensor(a, [&](const std::string&, const auto& t) {
    pa.push_back(t.data());
    sa.push_back(t.size());
  });
  for_each_tensor(b, [&](const std::string&, const auto& t) {
    pb.push_back(t.data());
    sb.push_back(t.size());
  });
  if (sa != sb) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!std::equal(pa[i], pa[i] + sa[i], pb[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// masks

MaskSpec sample_mask(int ts, double ratio, Rng& rng) {
  if (ts < 0) throw std::invalid_argument("sample_mask: ts must be non-negative");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("sample_mask: ratio must be in [0,1]");
  const int count = std::min(ts, static_cast<int>(std::ceil(ratio * ts - 1e-9)));
  MaskSpec m;
  std::vector<int> all(static_cast<std::size_t>(ts));
  std::iota(all.begin(), all.end(), 0);
  std::sample(all.begin(), all.end(), std::back_inserter(m.timesteps), count, rng);
  std::bernoulli_distribution hide(ratio);
  m.landcover = hide(rng);
  return m;
}

// ---------------------------------------------------------------------------
// forward / backward

namespace detail {

namespace {

Mat positional_table(int timesteps, int d) {
  Mat pe(timesteps, d);
  for (int t = 0; t < timesteps; ++t) {
    const auto e = timestep_encoding(t, d);
    for (int i = 0; i < d; ++i) pe(t, i) = e[static_cast<std::size_t>(i)];
  }
  return pe;
}

const Mat& positional(int timesteps, int d) {
  thread_local int cached_t = -1, cached_d = -1;
  thread_local Mat table;
  if (cached_t != timesteps || cached_d != d) {
    table = positional_table(timesteps, d);
    cached_t = timesteps;
    cached_d = d;
  }
  return table;
}

// Rows t * groups + g of `tokens` gathered into a (timesteps x d) block.
Mat gather_group(const Mat& tokens, int timesteps, int g) {
  Mat out(timesteps, tokens.cols());
  for (int t = 0; t < timesteps; ++t) out.row(t) = tokens.row(t * kGroups + g);
  return out;
}

}  // namespace

void check_sample(const ModelConfig& config, const PixelTimeseries& series, const MaskSpec& mask) {
  if (series.values.size() != static_cast<std::size_t>(config.timesteps) * kChannels ||
      series.validity.size() != series.values.size()) {
    throw std::invalid_argument("series shape (" + std::to_string(series.steps()) + " steps) does not match model (" +
                                std::to_string(config.timesteps) + " x 11)");
  }
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (series.validity[i] && !std::isfinite(series.values[i])) {
      throw std::invalid_argument("non-finite input value at a valid position");
    }
  }
  if (series.landcover < 0 || series.landcover >= kLandcoverClasses) {
    throw std::invalid_argument("landcover category outside [0,8]");
  }
  int prev = -1;
  for (int t : mask.timesteps) {
    if (t <= prev || t >= config.timesteps) throw std::invalid_argument("mask timesteps must be sorted, unique and in range");
    prev = t;
  }
}

SampleResult forward_sample(const Params& params, const PixelTimeseries& series, const MaskSpec& mask, SampleTape& tape) {
  const ModelConfig& c = params.config;
  const int ts = c.timesteps;
  const int d = c.d_model;
  const int n = c.tokens();

  tape.inputs.resize(ts, kChannels);
  for (int t = 0; t < ts; ++t) {
    for (int ch = 0; ch < kChannels; ++ch) tape.inputs(t, ch) = series.valid(t, ch) ? series.value(t, ch) : 0.0;
  }
  tape.masked.assign(static_cast<std::size_t>(ts), 0);
  for (int t : mask.timesteps) tape.masked[static_cast<std::size_t>(t)] = 1;
  tape.landcover_masked = mask.landcover;
  tape.landcover = series.landcover;
  const auto me = month_encoding(series.month);
  const auto le = location_encoding(series.lat, series.lon);
  tape.month = {me[0], me[1]};
  tape.location = {le[0], le[1], le[2]};

  const Vec context = params.month_proj * tape.month + params.location_proj * tape.location;
  const Mat& pe = positional(ts, d);

  Mat x(n, d);
  for (int g = 0; g < kGroups; ++g) {
    const auto& spec = kChannelGroups[g];
    Mat projected = nn::linear_forward(params.group_proj[g], tape.inputs.middleCols(spec.first, spec.size));
    for (int t = 0; t < ts; ++t) {
      auto row = x.row(t * kGroups + g);
      if (tape.masked[static_cast<std::size_t>(t)]) {
        row = params.mask_token.transpose();
      } else {
        row = projected.row(t);
      }
      row += pe.row(t) + params.group_embed.row(g) + context.transpose();
    }
  }
  if (tape.landcover_masked) {
    x.row(n - 1) = params.mask_token.transpose();
  } else {
    x.row(n - 1) = params.landcover_embed.row(tape.landcover);
  }
  x.row(n - 1) += context.transpose();

  const int heads = c.attention_heads;
  tape.encoder.resize(params.encoder.size());
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const auto& layer = params.encoder[l];
    auto& lt = tape.encoder[l];
    Mat h = nn::layer_norm_forward(layer.norm1, x, lt.norm1);
    x += nn::attention_forward(layer.self_attn, heads, h, h, lt.attn);
    h = nn::layer_norm_forward(layer.norm2, x, lt.norm2);
    x += nn::feed_forward_forward(layer.ffn, h, lt.ffn);
  }
  tape.encoded = nn::layer_norm_forward(params.encoder_norm, x, tape.encoder_norm);

  Mat y = tape.encoded;
  tape.decoder.resize(params.decoder.size());
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    const auto& layer = params.decoder[l];
    auto& lt = tape.decoder[l];
    Mat h = nn::layer_norm_forward(layer.norm1, y, lt.norm1);
    y += nn::attention_forward(layer.self_attn, heads, h, h, lt.self_attn);
    h = nn::layer_norm_forward(layer.norm2, y, lt.norm2);
    y += nn::attention_forward(layer.cross_attn, heads, h, tape.encoded, lt.cross_attn);
    h = nn::layer_norm_forward(layer.norm3, y, lt.norm3);
    y += nn::feed_forward_forward(layer.ffn, h, lt.ffn);
  }
  tape.decoded = nn::layer_norm_forward(params.decoder_norm, y, tape.decoder_norm);

  SampleResult out;
  out.reconstruction.resize(ts, kChannels);
  for (int g = 0; g < kGroups; ++g) {
    const auto& spec = kChannelGroups[g];
    out.reconstruction.middleCols(spec.first, spec.size) =
        nn::linear_forward(params.recon_heads[g], gather_group(tape.decoded, ts, g));
  }
  out.landcover_logits = nn::linear_forward(params.landcover_head, tape.decoded.row(n - 1)).transpose();
  const Mat pooled = tape.encoded.colwise().mean();
  out.hotspot_logit = nn::linear_forward(params.hotspot_head, pooled)(0, 0);
  return out;
}

void backward_sample(const Params& params, const SampleTape& tape, const SampleGrad& grad, Params& grads) {
  const ModelConfig& c = params.config;
  const int ts = c.timesteps;
  const int d = c.d_model;
  const int n = c.tokens();
  const int heads = c.attention_heads;

  Mat d_decoded = Mat::Zero(n, d);
  for (int g = 0; g < kGroups; ++g) {
    const auto& spec = kChannelGroups[g];
    Mat dg = nn::linear_backward(params.recon_heads[g], gather_group(tape.decoded, ts, g),
                                 grad.reconstruction.middleCols(spec.first, spec.size), grads.recon_heads[g]);
    for (int t = 0; t < ts; ++t) d_decoded.row(t * kGroups + g) += dg.row(t);
  }
  d_decoded.row(n - 1) += nn::linear_backward(params.landcover_head, tape.decoded.row(n - 1),
                                              grad.landcover_logits.transpose(), grads.landcover_head);

  Mat d_encoded = Mat::Zero(n, d);
  {
    const Mat pooled = tape.encoded.colwise().mean();
    Mat dz(1, 1);
    dz(0, 0) = grad.hotspot_logit;
    const Mat d_pooled = nn::linear_backward(params.hotspot_head, pooled, dz, grads.hotspot_head);
    d_encoded.rowwise() += d_pooled.row(0) / static_cast<double>(n);
  }

  Mat dy = nn::layer_norm_backward(params.decoder_norm, tape.decoder_norm, d_decoded, grads.decoder_norm);
  Mat dq, dkv;
  for (std::size_t l = params.decoder.size(); l-- > 0;) {
    const auto& layer = params.decoder[l];
    auto& gl = grads.decoder[l];
    const auto& lt = tape.decoder[l];
    dy += nn::layer_norm_backward(layer.norm3, lt.norm3, nn::feed_forward_backward(layer.ffn, lt.ffn, dy, gl.ffn), gl.norm3);
    nn::attention_backward(layer.cross_attn, heads, lt.cross_attn, dy, gl.cross_attn, dq, dkv);
    d_encoded += dkv;
    dy += nn::layer_norm_backward(layer.norm2, lt.norm2, dq, gl.norm2);
    nn::attention_backward(layer.self_attn, heads, lt.self_attn, dy, gl.self_attn, dq, dkv);
    dq += dkv;
    dy += nn::layer_norm_backward(layer.norm1, lt.norm1, dq, gl.norm1);
  }
  d_encoded += dy;

  Mat dx = nn::layer_norm_backward(params.encoder_norm, tape.encoder_norm, d_encoded, grads.encoder_norm);
  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    const auto& layer = params.encoder[l];
    auto& gl = grads.encoder[l];
    const auto& lt = tape.encoder[l];
    dx += nn::layer_norm_backward(layer.norm2, lt.norm2, nn::feed_forward_backward(layer.ffn, lt.ffn, dx, gl.ffn), gl.norm2);
    nn::attention_backward(layer.self_attn, heads, lt.attn, dx, gl.self_attn, dq, dkv);
    dq += dkv;
    dx += nn::layer_norm_backward(layer.norm1, lt.norm1, dq, gl.norm1);
  }

  // embedding
  const Vec d_context = dx.colwise().sum().transpose();
  grads.month_proj.noalias() += d_context * tape.month.transpose();
  grads.location_proj.noalias() += d_context * tape.location.transpose();
  for (int g = 0; g < kGroups; ++g) {
    const auto& spec = kChannelGroups[g];
    Mat d_projected = gather_group(dx, ts, g);
    grads.group_embed.row(g) += d_projected.colwise().sum();
    for (int t = 0; t < ts; ++t) {
      if (tape.masked[static_cast<std::size_t>(t)]) {
        grads.mask_token += d_projected.row(t).transpose();
        d_projected.row(t).setZero();
      }
    }
    nn::linear_backward(params.group_proj[g], tape.inputs.middleCols(spec.first, spec.size), d_projected,
                        grads.group_proj[g]);
  }
  if (tape.landcover_masked) {
    grads.mask_token += dx.row(n - 1).transpose();
  } else {
    grads.landcover_embed.row(tape.landcover) += dx.row(n - 1);
  }
}

}  // namespace detail

ModelOutput forward(const Params& params, std::span<const PixelTimeseries> batch, std::span<const MaskSpec> masks) {
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  if (masks.size() != batch.size()) throw std::invalid_argument("forward: one mask per sample required");
  for (std::size_t b = 0; b < batch.size(); ++b) detail::check_sample(params.config, batch[b], masks[b]);

  ModelOutput out;
  out.reconstruction.reserve(batch.size());
  out.landcover_logits.resize(static_cast<Eigen::Index>(batch.size()), kLandcoverClasses);
  out.hotspot_logit.resize(static_cast<Eigen::Index>(batch.size()));
  detail::SampleTape tape;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    auto r = detail::forward_sample(params, batch[b], masks[b], tape);
    out.reconstruction.push_back(std::move(r.reconstruction));
    out.landcover_logits.row(static_cast<Eigen::Index>(b)) = r.landcover_logits.transpose();
    out.hotspot_logit(static_cast<Eigen::Index>(b)) = r.hotspot_logit;
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double predict(const Params& params, const PixelTimeseries& series, const NormStats& norm) {
  series.validate();
  const PixelTimeseries x = normalize(series, norm);
  const MaskSpec none;
  const auto out = forward(params, std::span(&x, 1), std::span(&none, 1));
  return sigmoid(out.hotspot_logit(0));
}

std::vector<double> predict_all(const Params& params, std::span<const PixelTimeseries> series, const NormStats& norm) {
  std::vector<double> probs;
  probs.reserve(series.size());
  for (const auto& s : series) probs.push_back(predict(params, s, norm));
  return probs;
}

}  // namespace hotspot
