#include "disent/nn.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "disent/errors.hpp"

namespace disent {

namespace {

void leaky_inplace(Mat& m) {
  m = m.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

Mat leaky_derivative(const Mat& pre) {
  return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
}

}  // namespace

void Mlp::check_dims(const std::vector<Eigen::Index>& dims, double dropout) {
  if (dims.size() < 2) throw ValidationError("mlp: need at least input and output dims");
  for (auto d : dims) {
    if (d < 1) throw ValidationError("mlp: layer dimensions must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("mlp: dropout must be in [0, 1)");
}

Mlp::Mlp(std::vector<Eigen::Index> dims, Head head, double dropout, Rng& init)
    : head_(head), dropout_(dropout) {
  check_dims(dims, dropout);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    layer.weight.resize(dims[l + 1], dims[l]);
    layer.bias.resize(dims[l + 1]);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = bound * (2.0 * init.uniform() - 1.0);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias(i) = bound * (2.0 * init.uniform() - 1.0);
    }
    layer.grad_weight = Mat::Zero(dims[l + 1], dims[l]);
    layer.grad_bias = Vec::Zero(dims[l + 1]);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::zeros(std::vector<Eigen::Index> dims, Head head, double dropout) {
  check_dims(dims, dropout);
  Mlp net;
  net.head_ = head;
  net.dropout_ = dropout;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.weight = Mat::Zero(dims[l + 1], dims[l]);
    layer.bias = Vec::Zero(dims[l + 1]);
    layer.grad_weight = Mat::Zero(dims[l + 1], dims[l]);
    layer.grad_bias = Vec::Zero(dims[l + 1]);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::vector<Eigen::Index> Mlp::dims() const {
  std::vector<Eigen::Index> d;
  if (layers_.empty()) return d;
  d.push_back(layers_.front().in());
  for (const auto& l : layers_) d.push_back(l.out());
  return d;
}

Mat Mlp::apply_head(Mat logits) const {
  switch (head_) {
    case Head::Logits: return logits;
    case Head::Sigmoid: return logits.unaryExpr([](double v) { return sigmoid(v); });
    case Head::Softmax: return softmax_rows(logits);
  }
  return logits;
}

Mat Mlp::forward(const Mat& x, bool train, Rng* rng) {
  if (layers_.empty()) throw StateError("mlp: network has no layers");
  if (x.cols() != input_dim()) {
    throw ValidationError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(input_dim()));
  }
  const bool use_dropout = train && dropout_ > 0.0;
  if (use_dropout && rng == nullptr) throw ValidationError("mlp: train-mode dropout needs an rng");

  acts_.assign(layers_.size(), Mat());
  pre_.assign(layers_.size() - 1, Mat());
  masks_.assign(layers_.size() - 1, Mat());

  Mat a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    Mat h = a * layer.weight.transpose();
    h.rowwise() += layer.bias.transpose();
    acts_[l] = std::move(a);
    if (l + 1 == layers_.size()) {
      out_ = apply_head(std::move(h));
      break;
    }
    pre_[l] = h;
    leaky_inplace(h);
    if (use_dropout) {
      const double keep = 1.0 - dropout_;
      Mat mask(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng->uniform() < dropout_ ? 0.0 : 1.0 / keep;
      }
      h.array() *= mask.array();
      masks_[l] = std::move(mask);
    }
    a = std::move(h);
  }
  cache_version_ = version_;
  return out_;
}

Mat Mlp::infer(const Mat& x) const {
  if (layers_.empty()) throw StateError("mlp: network has no layers");
  if (x.cols() != input_dim()) {
    throw ValidationError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(input_dim()));
  }
  Mat a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Mat h = a * layers_[l].weight.transpose();
    h.rowwise() += layers_[l].bias.transpose();
    if (l + 1 == layers_.size()) return apply_head(std::move(h));
    leaky_inplace(h);
    a = std::move(h);
  }
  return a;
}

Mat Mlp::backward(const Mat& upstream, bool accumulate) {
  if (!has_cache()) throw StateError("mlp: backward without a matching forward pass");
  if (upstream.rows() != out_.rows() || upstream.cols() != out_.cols()) {
    throw ValidationError("mlp: upstream gradient shape does not match the last output");
  }
  Mat g;
  switch (head_) {
    case Head::Logits:
      g = upstream;
      break;
    case Head::Sigmoid:
      g = upstream.array() * out_.array() * (1.0 - out_.array());
      break;
    case Head::Softmax: {
      const Vec dot = (upstream.array() * out_.array()).rowwise().sum();
      g = out_.array() * (upstream.colwise() - dot).array();
      break;
    }
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    DenseLayer& layer = layers_[l];
    if (accumulate) {
      layer.grad_weight.noalias() += g.transpose() * acts_[l];
      layer.grad_bias += g.colwise().sum().transpose();
    }
    Mat ga = g * layer.weight;
    if (l == 0) return ga;
    if (masks_[l - 1].size() > 0) ga.array() *= masks_[l - 1].array();
    ga.array() *= leaky_derivative(pre_[l - 1]).array();
    g = std::move(ga);
  }
  return g;
}

void Mlp::zero_grad() {
  for (auto& l : layers_) {
    l.grad_weight.setZero();
    l.grad_bias.setZero();
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

double Mlp::grad_norm() const {
  double s = 0.0;
  for (const auto& l : layers_) s += l.grad_weight.squaredNorm() + l.grad_bias.squaredNorm();
  return std::sqrt(s);
}

std::uint64_t Mlp::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : layers_) {
    feed(l.weight.data(), l.weight.size());
    feed(l.bias.data(), l.bias.size());
  }
  return h;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Mat log_softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

LossGrad cross_entropy(const Mat& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || labels.empty()) {
    throw ValidationError("cross_entropy: logits rows and label count differ");
  }
  const double n = static_cast<double>(labels.size());
  LossGrad out;
  out.grad = softmax_rows(logits);
  const Mat logp = log_softmax_rows(logits);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= logits.cols()) throw ValidationError("cross_entropy: label out of range");
    out.loss -= logp(static_cast<Eigen::Index>(i), y);
    out.grad(static_cast<Eigen::Index>(i), y) -= 1.0;
  }
  out.loss /= n;
  out.grad /= n;
  return out;
}

LossGrad bce_with_logits(const Mat& logits, std::span<const double> targets) {
  if (logits.cols() != 1 || static_cast<std::size_t>(logits.rows()) != targets.size() ||
      targets.empty()) {
    throw ValidationError("bce_with_logits: expected an n x 1 logit column matching targets");
  }
  const double n = static_cast<double>(targets.size());
  LossGrad out;
  out.grad.resize(logits.rows(), 1);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double s = logits(i, 0);
    const double t = targets[static_cast<std::size_t>(i)];
    out.loss -= t * log_sigmoid(s) + (1.0 - t) * log_sigmoid(-s);
    out.grad(i, 0) = (sigmoid(s) - t) / n;
  }
  out.loss /= n;
  return out;
}

std::vector<int> argmax_rows(const Mat& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index k;
    m.row(i).maxCoeff(&k);
    out[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  return out;
}

double accuracy(const Mat& scores, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const auto pred = argmax_rows(scores);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

OptimizerState::OptimizerState(const Mlp& net, AdamWOptions opts) : options(opts) {
  for (const auto& l : net.layers()) {
    m_w.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    v_w.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    m_b.push_back(Vec::Zero(l.bias.size()));
    v_b.push_back(Vec::Zero(l.bias.size()));
  }
}

void step(Mlp& net, OptimizerState& opt) {
  auto& layers = net.layers();
  if (opt.m_w.size() != layers.size()) {
    throw ValidationError("optimizer: state does not match the network");
  }
  const double norm = net.grad_norm();
  if (!std::isfinite(norm)) throw NumericError("optimizer: non-finite gradient");

  const AdamWOptions& o = opt.options;
  const double scale = (o.clip_norm > 0.0 && norm > o.clip_norm) ? o.clip_norm / norm : 1.0;
  ++opt.steps;
  const double t = static_cast<double>(opt.steps);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  const double decay = 1.0 - o.lr * o.weight_decay;

  auto update = [&](auto& param, auto& grad, auto& m, auto& v) {
    grad *= scale;
    m = o.beta1 * m + (1.0 - o.beta1) * grad;
    v = o.beta2 * v + (1.0 - o.beta2) * grad.cwiseAbs2();
    param *= decay;
    param.array() -= o.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + o.eps);
    grad.setZero();
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, layers[l].grad_weight, opt.m_w[l], opt.v_w[l]);
    update(layers[l].bias, layers[l].grad_bias, opt.m_b[l], opt.v_b[l]);
  }
  net.touch();
}

}  // namespace disent
