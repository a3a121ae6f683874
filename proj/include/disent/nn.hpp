#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disent/linalg.hpp"
#include "disent/rng.hpp"

namespace disent {

inline constexpr double kLeakySlope = 0.01;

enum class Head { Logits, Sigmoid, Softmax };

struct DenseLayer {
  Mat weight;  // out x in
  Vec bias;
  Mat grad_weight;
  Vec grad_bias;

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }
};

// Feed-forward stack: dense -> LeakyReLU -> dropout, repeated, then a dense
// output layer passed through `head`. Gradients accumulate into the layer
// buffers until zero_grad() (or an optimizer step) clears them.
class Mlp {
 public:
  Mlp() = default;
  // dims = {input, hidden..., output}; fan-in scaled uniform init.
  Mlp(std::vector<Eigen::Index> dims, Head head, double dropout, Rng& init);
  static Mlp zeros(std::vector<Eigen::Index> dims, Head head, double dropout = 0.0);

  // Caches intermediates for backward(). Dropout (inverted scaling) only in
  // train mode, which requires an rng.
  Mat forward(const Mat& x, bool train = false, Rng* rng = nullptr);
  // Stateless evaluation, no dropout; safe to call concurrently.
  Mat infer(const Mat& x) const;

  // upstream = dLoss/dOutput for the last forward(). Adds parameter gradients
  // when `accumulate` is set and returns dLoss/dInput.
  Mat backward(const Mat& upstream, bool accumulate = true);

  void zero_grad();
  bool has_cache() const { return cache_version_ == version_ && !acts_.empty(); }

  Eigen::Index input_dim() const { return layers_.empty() ? 0 : layers_.front().in(); }
  Eigen::Index output_dim() const { return layers_.empty() ? 0 : layers_.back().out(); }
  Head head() const { return head_; }
  double dropout() const { return dropout_; }
  std::vector<Eigen::Index> dims() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const;
  double grad_norm() const;
  // FNV-1a over the raw parameter bytes.
  std::uint64_t checksum() const;
  // Invalidate cached intermediates after a parameter change.
  void touch() { ++version_; }

 private:
  Mat apply_head(Mat logits) const;
  static void check_dims(const std::vector<Eigen::Index>& dims, double dropout);

  std::vector<DenseLayer> layers_;
  Head head_ = Head::Logits;
  double dropout_ = 0.0;

  // forward() cache
  std::vector<Mat> acts_;   // input to each layer
  std::vector<Mat> pre_;    // pre-activation of each hidden layer
  std::vector<Mat> masks_;  // dropout masks (empty when unused)
  Mat out_;
  std::uint64_t version_ = 0;
  std::uint64_t cache_version_ = ~0ULL;
};

Mat softmax_rows(const Mat& logits);
Mat log_softmax_rows(const Mat& logits);
double sigmoid(double x);
double log_sigmoid(double x);

struct LossGrad {
  double loss = 0.0;
  Mat grad;  // dLoss/dLogits, same shape as the input
};

// Mean -log softmax(logits)[label], max-shifted.
LossGrad cross_entropy(const Mat& logits, std::span<const int> labels);

// Mean binary cross-entropy of sigmoid(logits) against targets in [0, 1].
LossGrad bce_with_logits(const Mat& logits, std::span<const double> targets);

std::vector<int> argmax_rows(const Mat& m);
double accuracy(const Mat& scores, std::span<const int> labels);

struct AdamWOptions {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double clip_norm = 1.0;  // global norm; <= 0 disables
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamWOptions options;
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;
  std::int64_t steps = 0;

  OptimizerState() = default;
  OptimizerState(const Mlp& net, AdamWOptions opts);
};

// Decoupled weight decay Adam after global-norm clipping. Zeroes the
// gradients. Throws NumericError on a non-finite gradient.
void step(Mlp& net, OptimizerState& opt);

}  // namespace disent
