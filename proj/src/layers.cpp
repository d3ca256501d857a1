#include "layers.hpp"

#include <cmath>
#include <numbers>

namespace hotspot::nn {

Mat linear_forward(const Linear& l, const Mat& x) {
  Mat y = x * l.weight.transpose();
  y.rowwise() += l.bias.transpose();
  return y;
}

Mat linear_backward(const Linear& l, const Mat& x, const Mat& dy, Linear& grad) {
  grad.weight.noalias() += dy.transpose() * x;
  grad.bias += dy.colwise().sum().transpose();
  return dy * l.weight;
}

Mat layer_norm_forward(const LayerNorm& n, const Mat& x, NormTape& tape) {
  Vec mean = x.rowwise().mean();
  Mat centered = x.colwise() - mean;
  Vec var = centered.array().square().rowwise().mean();
  tape.inv_std = (var.array() + kNormEps).rsqrt();
  tape.xhat = centered.array().colwise() * tape.inv_std.array();
  Mat y = tape.xhat.array().rowwise() * n.gamma.transpose().array();
  y.rowwise() += n.beta.transpose();
  return y;
}

Mat layer_norm_backward(const LayerNorm& n, const NormTape& tape, const Mat& dy, LayerNorm& grad) {
  grad.gamma += dy.cwiseProduct(tape.xhat).colwise().sum().transpose();
  grad.beta += dy.colwise().sum().transpose();
  Mat dxhat = dy.array().rowwise() * n.gamma.transpose().array();
  Vec mean_d = dxhat.rowwise().mean();
  Vec mean_dx = dxhat.cwiseProduct(tape.xhat).rowwise().mean();
  Mat dx = dxhat.colwise() - mean_d;
  dx.array() -= tape.xhat.array().colwise() * mean_dx.array();
  return dx.array().colwise() * tape.inv_std.array();
}

Mat attention_forward(const Attention& a, int heads, const Mat& xq, const Mat& xkv, AttentionTape& tape) {
  tape.xq = xq;
  tape.xkv = xkv;
  tape.q = linear_forward(a.query, xq);
  tape.k = linear_forward(a.key, xkv);
  tape.v = linear_forward(a.value, xkv);
  const int d = static_cast<int>(tape.q.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  tape.probs.resize(static_cast<std::size_t>(heads));
  tape.context.resize(xq.rows(), d);
  for (int h = 0; h < heads; ++h) {
    Mat& p = tape.probs[static_cast<std::size_t>(h)];
    p.noalias() = (tape.q.middleCols(h * dh, dh) * scale) * tape.k.middleCols(h * dh, dh).transpose();
    Vec row_max = p.rowwise().maxCoeff();
    p.colwise() -= row_max;
    p = p.array().exp();
    Vec row_sum = p.rowwise().sum();
    p.array().colwise() /= row_sum.array();
    tape.context.middleCols(h * dh, dh).noalias() = p * tape.v.middleCols(h * dh, dh);
  }
  return linear_forward(a.output, tape.context);
}

void attention_backward(const Attention& a, int heads, const AttentionTape& tape, const Mat& dy, Attention& grad,
                        Mat& dxq, Mat& dxkv) {
  Mat dcontext = linear_backward(a.output, tape.context, dy, grad.output);
  const int d = static_cast<int>(tape.q.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat dq(tape.q.rows(), d), dk(tape.k.rows(), d), dv(tape.v.rows(), d);
  Mat dp, ds;
  for (int h = 0; h < heads; ++h) {
    const Mat& p = tape.probs[static_cast<std::size_t>(h)];
    auto dctx_h = dcontext.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh).noalias() = p.transpose() * dctx_h;
    dp.noalias() = dctx_h * tape.v.middleCols(h * dh, dh).transpose();
    Vec inner = dp.cwiseProduct(p).rowwise().sum();
    ds = p.array() * (dp.colwise() - inner).array();
    dq.middleCols(h * dh, dh).noalias() = (ds * tape.k.middleCols(h * dh, dh)) * scale;
    dk.middleCols(h * dh, dh).noalias() = (ds.transpose() * tape.q.middleCols(h * dh, dh)) * scale;
  }
  dxq = linear_backward(a.query, tape.xq, dq, grad.query);
  dxkv = linear_backward(a.key, tape.xkv, dk, grad.key);
  dxkv += linear_backward(a.value, tape.xkv, dv, grad.value);
}

namespace {

constexpr double kGeluC = 0.044715;
const double kGeluK = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

// tanh approximation of GELU; smooth everywhere, which keeps finite-difference
// checks clean.
Mat feed_forward_forward(const FeedForward& f, const Mat& x, FeedForwardTape& tape) {
  tape.x = x;
  tape.pre = linear_forward(f.up, x);
  auto u = tape.pre.array();
  tape.act = 0.5 * u * (1.0 + (kGeluK * (u + kGeluC * u.cube())).tanh());
  return linear_forward(f.down, tape.act);
}

Mat feed_forward_backward(const FeedForward& f, const FeedForwardTape& tape, const Mat& dy, FeedForward& grad) {
  Mat dact = linear_backward(f.down, tape.act, dy, grad.down);
  auto u = tape.pre.array();
  Eigen::ArrayXXd th = (kGeluK * (u + kGeluC * u.cube())).tanh();
  Eigen::ArrayXXd dgelu = 0.5 * (1.0 + th) + 0.5 * u * (1.0 - th.square()) * kGeluK * (1.0 + 3.0 * kGeluC * u.square());
  Mat dpre = dact.array() * dgelu;
  return linear_backward(f.up, tape.x, dpre, grad.up);
}

}  // namespace hotspot::nn
