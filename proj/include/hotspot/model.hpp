#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/encodings.hpp"
#include "hotspot/random.hpp"
#include "hotspot/timeseries.hpp"

namespace hotspot {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ModelConfig {
  int d_model = 64;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int attention_heads = 4;
  int ff_width = 0;  // 0 selects 4 * d_model
  double mask_ratio = 0.75;
  int timesteps = kWindow;

  int feed_forward() const { return ff_width > 0 ? ff_width : 4 * d_model; }
  /// 3 group tokens per timestep plus the landcover token.
  int tokens() const { return kGroups * timesteps + 1; }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

std::string model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const std::string& text);

// Linear weights are (out x in): y = W x + b.
struct Linear {
  Mat weight;
  Vec bias;
};

struct LayerNorm {
  Vec gamma;
  Vec beta;
};

struct Attention {
  Linear query, key, value, output;
};

struct FeedForward {
  Linear up, down;
};

struct EncoderLayer {
  LayerNorm norm1;
  Attention self_attn;
  LayerNorm norm2;
  FeedForward ffn;
};

struct DecoderLayer {
  LayerNorm norm1;
  Attention self_attn;
  LayerNorm norm2;
  Attention cross_attn;
  LayerNorm norm3;
  FeedForward ffn;
};

/// All learned tensors. Their order in for_each_tensor is the checkpoint
/// registry and must not change.
struct Params {
  ModelConfig config;
  std::array<Linear, kGroups> group_proj;
  Mat group_embed;      // groups x d
  Mat landcover_embed;  // 9 x d
  Vec mask_token;
  Mat month_proj;     // d x 2
  Mat location_proj;  // d x 3
  std::vector<EncoderLayer> encoder;
  LayerNorm encoder_norm;
  std::vector<DecoderLayer> decoder;
  LayerNorm decoder_norm;
  std::array<Linear, kGroups> recon_heads;
  Linear landcover_head;
  Linear hotspot_head;
};

namespace detail {

template <class L, class F>
void visit_linear(const std::string& name, L& l, F& f) {
  f(name + ".weight", l.weight);
  f(name + ".bias", l.bias);
}

template <class N, class F>
void visit_norm(const std::string& name, N& n, F& f) {
  f(name + ".gamma", n.gamma);
  f(name + ".beta", n.beta);
}

template <class A, class F>
void visit_attention(const std::string& name, A& a, F& f) {
  visit_linear(name + ".query", a.query, f);
  visit_linear(name + ".key", a.key, f);
  visit_linear(name + ".value", a.value, f);
  visit_linear(name + ".output", a.output, f);
}

template <class FF, class F>
void visit_ffn(const std::string& name, FF& ffn, F& f) {
  visit_linear(name + ".up", ffn.up, f);
  visit_linear(name + ".down", ffn.down, f);
}

inline constexpr std::array<const char*, kGroups> kGroupNames{"infrared", "visible", "water_vapor"};

}  // namespace detail

/// Calls f(name, tensor) for every learned tensor in registry order. Works
/// for both `Params&` and `const Params&`.
template <class P, class F>
void for_each_tensor(P& p, F&& f) {
  using namespace detail;
  for (int g = 0; g < kGroups; ++g) visit_linear(std::string("embed.") + kGroupNames[g], p.group_proj[g], f);
  f("embed.group", p.group_embed);
  f("embed.landcover", p.landcover_embed);
  f("embed.mask_token", p.mask_token);
  f("embed.month", p.month_proj);
  f("embed.location", p.location_proj);
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string pre = "encoder." + std::to_string(l);
    visit_norm(pre + ".norm1", p.encoder[l].norm1, f);
    visit_attention(pre + ".self_attn", p.encoder[l].self_attn, f);
    visit_norm(pre + ".norm2", p.encoder[l].norm2, f);
    visit_ffn(pre + ".ffn", p.encoder[l].ffn, f);
  }
  visit_norm("encoder.norm", p.encoder_norm, f);
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const std::string pre = "decoder." + std::to_string(l);
    visit_norm(pre + ".norm1", p.decoder[l].norm1, f);
    visit_attention(pre + ".self_attn", p.decoder[l].self_attn, f);
    visit_norm(pre + ".norm2", p.decoder[l].norm2, f);
    visit_attention(pre + ".cross_attn", p.decoder[l].cross_attn, f);
    visit_norm(pre + ".norm3", p.decoder[l].norm3, f);
    visit_ffn(pre + ".ffn", p.decoder[l].ffn, f);
  }
  visit_norm("decoder.norm", p.decoder_norm, f);
  for (int g = 0; g < kGroups; ++g) visit_linear(std::string("head.recon.") + kGroupNames[g], p.recon_heads[g], f);
  visit_linear("head.landcover", p.landcover_head, f);
  visit_linear("head.hotspot", p.hotspot_head, f);
}

struct TensorInfo {
  std::string name;
  std::vector<int> shape;  // [n] for vectors, [rows, cols] for matrices
};

std::vector<TensorInfo> tensor_registry(const Params& p);
std::size_t parameter_count(const Params& p);

/// Params with the same config and shapes, all zero.
Params zeros_like(const Params& p);

/// Xavier-uniform weights (fan_in = cols, fan_out = rows; a vector counts as
/// 1 x n), zero biases, unit layer-norm gains. Values are rounded to binary32
/// so that checkpoints reproduce them exactly.
Params init_params(const ModelConfig& config, std::uint64_t seed);

/// Rounds every parameter to the nearest binary32 value.
void round_to_binary32(Params& p);

bool all_finite(const Params& p);
bool identical(const Params& a, const Params& b);

/// Masked timesteps for one sample plus whether its landcover token is hidden.
struct MaskSpec {
  std::vector<int> timesteps;  // sorted, unique
  bool landcover = false;
};

/// Draws ceil(ratio * ts) distinct timesteps uniformly without replacement,
/// then hides the landcover token with probability `ratio`, from the same
/// generator.
MaskSpec sample_mask(int ts, double ratio, Rng& rng);

struct ModelOutput {
  std::vector<Mat> reconstruction;  // per sample: timesteps x 11
  Mat landcover_logits;             // B x 9
  Vec hotspot_logit;                // B

  std::size_t batch() const { return reconstruction.size(); }
};

/// Runs the masked autoencoder over a batch of normalized windows. Values at
/// invalid positions are read as 0.
ModelOutput forward(const Params& params, std::span<const PixelTimeseries> batch, std::span<const MaskSpec> masks);

double sigmoid(double z);

/// Hotspot probability of a raw (un-normalized) window under an empty mask.
double predict(const Params& params, const PixelTimeseries& series, const NormStats& norm);
std::vector<double> predict_all(const Params& params, std::span<const PixelTimeseries> series, const NormStats& norm);

inline constexpr double kDecisionThreshold = 0.5;

/// Writes `header.json` and `weights.bin` into `dir`.
void save_checkpoint(const Params& params, const std::filesystem::path& dir);
/// Accepts the checkpoint directory or the path of its header.json.
Params load_checkpoint(const std::filesystem::path& path);

}  // namespace hotspot
