#pragma once

#include <vector>

#include "hotspot/model.hpp"

// Row-major token convention: activations are (tokens x features).
namespace hotspot::nn {

inline constexpr double kNormEps = 1e-5;

Mat linear_forward(const Linear& l, const Mat& x);
/// Accumulates weight/bias gradients into `grad` and returns dL/dx.
Mat linear_backward(const Linear& l, const Mat& x, const Mat& dy, Linear& grad);

struct NormTape {
  Mat xhat;
  Vec inv_std;
};

Mat layer_norm_forward(const LayerNorm& n, const Mat& x, NormTape& tape);
Mat layer_norm_backward(const LayerNorm& n, const NormTape& tape, const Mat& dy, LayerNorm& grad);

struct AttentionTape {
  Mat xq, xkv;
  Mat q, k, v;
  std::vector<Mat> probs;  // per head, (queries x keys)
  Mat context;
};

Mat attention_forward(const Attention& a, int heads, const Mat& xq, const Mat& xkv, AttentionTape& tape);
/// dxq and dxkv are overwritten.
void attention_backward(const Attention& a, int heads, const AttentionTape& tape, const Mat& dy, Attention& grad,
                        Mat& dxq, Mat& dxkv);

struct FeedForwardTape {
  Mat x, pre, act;
};

Mat feed_forward_forward(const FeedForward& f, const Mat& x, FeedForwardTape& tape);
Mat feed_forward_backward(const FeedForward& f, const FeedForwardTape& tape, const Mat& dy, FeedForward& grad);

}  // namespace hotspot::nn
