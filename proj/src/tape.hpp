#pragma once

#include <vector>

#include "hotspot/model.hpp"
#include "layers.hpp"

namespace hotspot::detail {

struct EncoderTape {
  nn::NormTape norm1;
  nn::AttentionTape attn;
  nn::NormTape norm2;
  nn::FeedForwardTape ffn;
};

struct DecoderTape {
  nn::NormTape norm1;
  nn::AttentionTape self_attn;
  nn::NormTape norm2;
  nn::AttentionTape cross_attn;
  nn::NormTape norm3;
  nn::FeedForwardTape ffn;
};

/// Activations of one sample's forward pass, kept for the backward pass.
struct SampleTape {
  Mat inputs;  // timesteps x 11, zero at invalid positions
  std::vector<char> masked;
  bool landcover_masked = false;
  int landcover = 0;
  Eigen::Vector2d month;
  Eigen::Vector3d location;
  std::vector<EncoderTape> encoder;
  nn::NormTape encoder_norm;
  Mat encoded;
  std::vector<DecoderTape> decoder;
  nn::NormTape decoder_norm;
  Mat decoded;
};

struct SampleResult {
  Mat reconstruction;  // timesteps x 11
  Vec landcover_logits;
  double hotspot_logit = 0.0;
};

/// Gradient of the objective with respect to one sample's outputs.
struct SampleGrad {
  Mat reconstruction;
  Vec landcover_logits;
  double hotspot_logit = 0.0;
};

/// Checks shapes, ranges and finiteness; throws std::invalid_argument.
void check_sample(const ModelConfig& config, const PixelTimeseries& series, const MaskSpec& mask);

SampleResult forward_sample(const Params& params, const PixelTimeseries& series, const MaskSpec& mask, SampleTape& tape);
/// Accumulates parameter gradients into `grads`.
void backward_sample(const Params& params, const SampleTape& tape, const SampleGrad& grad, Params& grads);

}  // namespace hotspot::detail
