#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disent/estimator_spec.hpp"
#include "disent/estimators.hpp"
#include "disent/nn.hpp"
#include "disent/prob.hpp"

namespace disent {

// How the encoder step sees the density-ratio correction.
//   Frozen        the critic is evaluated and its logits enter the loss as
//                 constants; no gradient flows through R.
//   ThroughInput  critic parameters stay fixed but the gradient of the
//                 correction flows back through the critic's z input.
enum class CriticGradient { Frozen, ThroughInput };

std::string to_string(CriticGradient g);
CriticGradient parse_critic_gradient(const std::string& text);

struct LearningRates {
  double encoder = 1e-3;
  double classifier = 1e-3;
  double critic = 1e-3;
  double decoder = 1e-3;
};

struct TrainingConfig {
  double lambda = 0.0;
  EstimatorSpec estimator;
  int unroll = 5;
  int encoder_steps = 20000;
  int batch_size = 64;
  LearningRates lr;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  Eigen::Index hidden = 128;
  Eigen::Index latent_dim = 16;
  double dropout = 0.1;          // classifier and decoder
  double encoder_dropout = 0.0;
  CriticGradient critic_gradient = CriticGradient::Frozen;
  std::uint64_t seed = 0;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Encoder f_e, attribute classifier C_c, ratio critic C_R, task head f_d.
struct ModelBundle {
  Mlp encoder;
  Mlp classifier;
  RatioCritic critic;
  Mlp decoder;

  static ModelBundle create(Eigen::Index input_dim, int attr_classes, int target_classes,
                            const TrainingConfig& config, Rng& init);
  // Throws ValidationError if the encoder output does not feed the heads.
  void validate() const;
};

struct LogRow {
  int step = 0;
  double task_loss = 0.0;
  double attr_ce = 0.0;
  double critic_loss = 0.0;
  double surrogate_value = 0.0;
};

struct CompositeLoss {
  double total = 0.0;
  double task = 0.0;       // downstream cross-entropy
  double surrogate = 0.0;  // the lambda-weighted term before weighting
  SurrogateGradient detail;
};

struct CompositeOptions {
  bool accumulate_encoder_grads = true;
  bool encoder_train_mode = true;
  // Fixed critic logits to use instead of evaluating the critic (finite
  // difference checks hold the critic output constant this way).
  const std::vector<double>* critic_logits = nullptr;
};

// L = CE(f_d(f_e(x)), l) + lambda * I_hat(f_e(x); y). Adds dL/dtheta_e to the
// encoder gradient buffers; the other components are read-only. Throws
// NumericError naming the term that went non-finite.
CompositeLoss composite_loss(ModelBundle& bundle, const Mat& x, std::span<const int> y,
                             std::span<const int> l, const TrainingConfig& config, Rng& rng,
                             const CompositeOptions& options = {});

struct TrainingResult {
  ModelBundle models;
  std::vector<LogRow> log;
  bool diverged = false;
  int diverged_step = -1;
  std::string error;
};

// Alternating optimisation: per outer step, `unroll` updates of the critic,
// classifier and decoder on batches from `aux` (D'), then one encoder update
// on a batch from `enc` (D).
class Trainer {
 public:
  Trainer(const TaskData& enc, const TaskData& aux, TrainingConfig config);

  // Inner updates only; never modifies the encoder. Returns (critic loss,
  // classifier CE, decoder CE) of the last inner iteration.
  struct InnerLosses {
    double critic = 0.0;
    double classifier = 0.0;
    double decoder = 0.0;
  };
  InnerLosses inner_steps();
  // One encoder update; never modifies classifier, critic or decoder.
  CompositeLoss encoder_step();
  // Runs the full budget, stopping at the first non-finite quantity.
  TrainingResult run();

  ModelBundle& models() { return models_; }
  const TrainingConfig& config() const { return config_; }
  int step() const { return step_; }

 private:
  void draw_batch(const TaskData& data, Rng& rng, Mat& x, std::vector<int>& y,
                  std::vector<int>& l) const;

  const TaskData& enc_;
  const TaskData& aux_;
  TrainingConfig config_;
  ModelBundle models_;
  OptimizerState opt_encoder_, opt_classifier_, opt_critic_, opt_decoder_;
  Rng batch_rng_, negative_rng_, dropout_rng_, surrogate_rng_;
  int step_ = 0;
};

TrainingResult train(const TaskData& enc, const TaskData& aux, const TrainingConfig& config);

// Representations of a data set under a (frozen) encoder.
Mat encode(const Mlp& encoder, const Mat& x);

}  // namespace disent
