#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disent/estimator_spec.hpp"
#include "disent/nn.hpp"
#include "disent/prob.hpp"

namespace disent {

struct CriticOptions {
  Eigen::Index hidden = 128;
  int hidden_layers = 2;
  std::size_t batch_size = 256;  // positives + negatives per step
  double lr = 1e-3;
  double weight_decay = 0.01;
  double dropout = 0.0;
};

// Density-ratio critic over [z, onehot(y)] with a single logit output.
// sigmoid(logit) estimates the probability that (z, y) came from p_ZY rather
// than from q(y|z) p(z), so R = sigmoid / (1 - sigmoid) = exp(logit).
struct RatioCritic {
  Mlp net;
  Eigen::Index feature_dim = 0;
  int num_classes = 0;
  std::int64_t steps = 0;
  double last_loss = 0.0;
  bool ready = false;  // trained, or constructed as the identity ratio

  RatioCritic() = default;
  RatioCritic(Eigen::Index feature_dim, int num_classes, const CriticOptions& options, Rng& init);
  // Zero network: logit 0 everywhere, R = 1.
  static RatioCritic identity(Eigen::Index feature_dim, int num_classes,
                              const CriticOptions& options = {});

  Mat inputs(const Mat& z, std::span<const int> labels) const;
  std::vector<double> logits(const Mat& z, std::span<const int> labels) const;
};

// Class probabilities of a classifier, whatever its head (logits are softmaxed).
Mat class_probs(const Mlp& classifier, const Mat& features);

// Pairs (z_i, yhat_i) with yhat_i ~ q(. | z_i): draws from q(y|z) p(z).
LabeledBatch make_negatives(const LabeledBatch& batch, const Mlp& classifier, Rng& rng);

// One BCE step on all given rows (positives target 1, negatives 0).
double critic_update(RatioCritic& critic, OptimizerState& opt, const LabeledBatch& positives,
                     const LabeledBatch& negatives);

// Fresh critic trained for `steps` minibatch steps on balanced positives and
// negatives. Throws ValidationError on unbalanced input, NumericError on a
// non-finite loss.
RatioCritic train_ratio_critic(const LabeledBatch& positives, const LabeledBatch& negatives,
                               std::size_t steps, Rng& rng, const CriticOptions& options = {});

// sigmoid(logit) clamped to [eps, 1 - eps], then the odds.
double ratio_from_logit(double logit, double eps = 1e-6);
// log of ratio_from_logit, computed as the clamped logit.
double log_ratio_from_logit(double logit, double eps = 1e-6);
double ratio(const RatioCritic& critic, const Vec& z, int y, double eps = 1e-6);

double estimate_entropy_upper(const LabeledBatch& batch, const Mlp& classifier,
                              const EstimatorSpec& spec);

struct CondEntropyEstimate {
  double ce = 0.0;          // -(1/n) sum log q(y_i|z_i)
  double correction = 0.0;  // estimated KL or Renyi divergence
  double value = 0.0;       // ce - correction
};

// Requires spec.kind in {KL, Renyi} and a ready critic (StateError otherwise).
CondEntropyEstimate estimate_cond_entropy_lower(const LabeledBatch& batch, const Mlp& classifier,
                                                const RatioCritic& critic,
                                                const EstimatorSpec& spec);

struct SurrogateEstimate {
  double entropy_term = 0.0;
  double ce_term = 0.0;
  double correction_term = 0.0;
  double value = 0.0;  // entropy_term - (ce_term - correction_term)
};

SurrogateEstimate estimate_mi_surrogate(const LabeledBatch& batch, const Mlp& classifier,
                                        const RatioCritic& critic, const EstimatorSpec& spec);

// Sampled contrastive bound with a fresh uniform permutation.
double estimate_vclub_s(const LabeledBatch& batch, const Mlp& classifier, Rng& rng);
double vclub_s_with_permutation(const LabeledBatch& batch, const Mlp& classifier,
                                std::span<const std::size_t> perm);

struct AdversarialTerm {
  double ce = 0.0;
  Mat grad_logits;  // dCE/dlogits; the encoder ascends along it
};

AdversarialTerm adversarial_ce_term(const LabeledBatch& batch, const Mlp& discriminator);

// Surrogate value and its gradient with respect to the classifier logits
// and, for KL / Renyi, the critic logits. This is the piece of the composite
// objective that sees the representation.
//   KL / Renyi  H_up - CE + D        (critic logits required)
//   vCLUB-S     mean log-contrast under `perm`
//   AdvCE       -CE
struct SurrogateGradient {
  double value = 0.0;
  double entropy_term = 0.0;
  double ce_term = 0.0;
  double correction_term = 0.0;
  Mat d_class_logits;
  std::vector<double> d_critic_logits;
};

SurrogateGradient surrogate_gradient(const Mat& class_logits, std::span<const int> labels,
                                     std::span<const double> critic_logits,
                                     const EstimatorSpec& spec,
                                     std::span<const std::size_t> perm = {});

}  // namespace disent
