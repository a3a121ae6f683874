#include "disent/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "disent/errors.hpp"
#include "disent/kernels.hpp"

namespace disent {

namespace {

Vec entropy_weights(std::span<const int> labels, int k, EntropyWeighting weighting) {
  if (weighting == EntropyWeighting::UniformClasses) {
    return Vec::Constant(k, 1.0 / static_cast<double>(k));
  }
  Vec w = Vec::Zero(k);
  for (int y : labels) w(y) += 1.0;
  return w / static_cast<double>(labels.size());
}

double entropy_upper_from_probs(const Mat& q, std::span<const int> labels,
                                EntropyWeighting weighting) {
  const Vec w = entropy_weights(labels, static_cast<int>(q.cols()), weighting);
  const Vec qbar = kernels::column_means(q);
  double h = 0.0;
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    if (w(k) > 0.0) h -= w(k) * std::log(qbar(k));
  }
  return h;
}

double divergence_from_log_ratios(std::span<const double> log_r, const EstimatorSpec& spec) {
  if (spec.kind == EstimatorKind::KL) return kernels::mean(log_r);
  const double a1 = *spec.alpha - 1.0;
  return kernels::log_mean_exp(log_r, a1) / a1;
}

void check_classifier(const LabeledBatch& batch, const Mlp& classifier) {
  batch.validate();
  if (classifier.input_dim() != batch.features.cols()) {
    throw ValidationError("classifier input dimension does not match the batch features");
  }
  if (classifier.output_dim() != batch.num_classes) {
    throw ValidationError("classifier output dimension must equal |Y|");
  }
}

void check_critic(const LabeledBatch& batch, const RatioCritic& critic) {
  if (!critic.ready) throw StateError("ratio critic has not been trained");
  if (critic.feature_dim != batch.features.cols() || critic.num_classes != batch.num_classes) {
    throw ValidationError("critic input dimension must equal d + |Y|");
  }
}

std::vector<double> clamped_log_ratios(std::span<const double> logits, double eps) {
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = log_ratio_from_logit(logits[i], eps);
  return out;
}

std::vector<Eigen::Index> critic_dims(Eigen::Index in, const CriticOptions& o) {
  std::vector<Eigen::Index> dims{in};
  for (int l = 0; l < o.hidden_layers; ++l) dims.push_back(o.hidden);
  dims.push_back(1);
  return dims;
}

}  // namespace

RatioCritic::RatioCritic(Eigen::Index feature_dim_, int num_classes_, const CriticOptions& options,
                         Rng& init)
    : net(critic_dims(feature_dim_ + num_classes_, options), Head::Logits, options.dropout, init),
      feature_dim(feature_dim_),
      num_classes(num_classes_) {}

RatioCritic RatioCritic::identity(Eigen::Index feature_dim, int num_classes,
                                  const CriticOptions& options) {
  RatioCritic c;
  c.net = Mlp::zeros(critic_dims(feature_dim + num_classes, options), Head::Logits);
  c.feature_dim = feature_dim;
  c.num_classes = num_classes;
  c.ready = true;
  return c;
}

Mat RatioCritic::inputs(const Mat& z, std::span<const int> labels) const {
  if (z.cols() != feature_dim || static_cast<std::size_t>(z.rows()) != labels.size()) {
    throw ValidationError("critic: feature matrix does not match critic shape");
  }
  Mat in = Mat::Zero(z.rows(), feature_dim + num_classes);
  in.leftCols(feature_dim) = z;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ValidationError("critic: label out of range");
    in(static_cast<Eigen::Index>(i), feature_dim + labels[i]) = 1.0;
  }
  return in;
}

std::vector<double> RatioCritic::logits(const Mat& z, std::span<const int> labels) const {
  const Mat out = net.infer(inputs(z, labels));
  return std::vector<double>(out.data(), out.data() + out.size());
}

Mat class_probs(const Mlp& classifier, const Mat& features) {
  switch (classifier.head()) {
    case Head::Softmax: return classifier.infer(features);
    case Head::Logits: return softmax_rows(classifier.infer(features));
    case Head::Sigmoid: break;
  }
  throw ValidationError("classifier must have a logits or softmax head");
}

LabeledBatch make_negatives(const LabeledBatch& batch, const Mlp& classifier, Rng& rng) {
  check_classifier(batch, classifier);
  const Mat q = class_probs(classifier, batch.features);
  LabeledBatch neg{batch.features, std::vector<int>(batch.size()), batch.num_classes};
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    neg.labels[static_cast<std::size_t>(i)] =
        sample_categorical(std::span<const double>(q.row(i).data(), q.cols()), rng);
  }
  return neg;
}

double critic_update(RatioCritic& critic, OptimizerState& opt, const LabeledBatch& positives,
                     const LabeledBatch& negatives) {
  const auto np = static_cast<Eigen::Index>(positives.size());
  const auto nn = static_cast<Eigen::Index>(negatives.size());
  Mat in(np + nn, critic.feature_dim + critic.num_classes);
  in.topRows(np) = critic.inputs(positives.features, positives.labels);
  in.bottomRows(nn) = critic.inputs(negatives.features, negatives.labels);
  std::vector<double> targets(static_cast<std::size_t>(np + nn), 0.0);
  std::fill(targets.begin(), targets.begin() + np, 1.0);

  const Mat logits = critic.net.forward(in, false);
  const LossGrad lg = bce_with_logits(logits, targets);
  if (!std::isfinite(lg.loss)) throw NumericError("critic: non-finite loss");
  critic.net.backward(lg.grad);
  step(critic.net, opt);
  ++critic.steps;
  critic.last_loss = lg.loss;
  critic.ready = true;
  return lg.loss;
}

RatioCritic train_ratio_critic(const LabeledBatch& positives, const LabeledBatch& negatives,
                               std::size_t steps, Rng& rng, const CriticOptions& options) {
  positives.validate();
  negatives.validate();
  if (positives.size() != negatives.size()) {
    throw ValidationError("critic: positives and negatives must be balanced");
  }
  if (positives.dim() != negatives.dim() || positives.num_classes != negatives.num_classes) {
    throw ValidationError("critic: positives and negatives differ in shape");
  }
  Rng init = rng.split("critic-init");
  Rng draws = rng.split("critic-batches");
  RatioCritic critic(positives.features.cols(), positives.num_classes, options, init);
  OptimizerState opt(critic.net, {options.lr, options.weight_decay});

  const std::size_t half = std::max<std::size_t>(1, options.batch_size / 2);
  LabeledBatch pos_mb{Mat(static_cast<Eigen::Index>(half), positives.features.cols()),
                      std::vector<int>(half), positives.num_classes};
  LabeledBatch neg_mb = pos_mb;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < half; ++i) {
      const std::size_t a = draws.below(positives.size());
      const std::size_t b = draws.below(negatives.size());
      pos_mb.features.row(static_cast<Eigen::Index>(i)) =
          positives.features.row(static_cast<Eigen::Index>(a));
      pos_mb.labels[i] = positives.labels[a];
      neg_mb.features.row(static_cast<Eigen::Index>(i)) =
          negatives.features.row(static_cast<Eigen::Index>(b));
      neg_mb.labels[i] = negatives.labels[b];
    }
    critic_update(critic, opt, pos_mb, neg_mb);
  }
  critic.ready = true;
  return critic;
}

double ratio_from_logit(double logit, double eps) {
  const double s = std::clamp(sigmoid(logit), eps, 1.0 - eps);
  return s / (1.0 - s);
}

double log_ratio_from_logit(double logit, double eps) {
  const double bound = std::log((1.0 - eps) / eps);
  return std::clamp(logit, -bound, bound);
}

double ratio(const RatioCritic& critic, const Vec& z, int y, double eps) {
  const Mat zr = z.transpose();
  const int label[1] = {y};
  return ratio_from_logit(critic.logits(zr, label).front(), eps);
}

double estimate_entropy_upper(const LabeledBatch& batch, const Mlp& classifier,
                              const EstimatorSpec& spec) {
  check_classifier(batch, classifier);
  return entropy_upper_from_probs(class_probs(classifier, batch.features), batch.labels,
                                  spec.entropy_weighting);
}

CondEntropyEstimate estimate_cond_entropy_lower(const LabeledBatch& batch, const Mlp& classifier,
                                                const RatioCritic& critic,
                                                const EstimatorSpec& spec) {
  spec.validate();
  if (spec.kind != EstimatorKind::KL && spec.kind != EstimatorKind::Renyi) {
    throw ValidationError("conditional entropy estimate needs a KL or Renyi estimator");
  }
  check_classifier(batch, classifier);
  check_critic(batch, critic);
  CondEntropyEstimate e;
  e.ce = -kernels::mean_log_at(class_probs(classifier, batch.features), batch.labels);
  const auto log_r =
      clamped_log_ratios(critic.logits(batch.features, batch.labels), spec.ratio_clamp_eps);
  e.correction = divergence_from_log_ratios(log_r, spec);
  e.value = e.ce - e.correction;
  return e;
}

SurrogateEstimate estimate_mi_surrogate(const LabeledBatch& batch, const Mlp& classifier,
                                        const RatioCritic& critic, const EstimatorSpec& spec) {
  const CondEntropyEstimate cond = estimate_cond_entropy_lower(batch, classifier, critic, spec);
  SurrogateEstimate s;
  s.entropy_term = estimate_entropy_upper(batch, classifier, spec);
  s.ce_term = cond.ce;
  s.correction_term = cond.correction;
  s.value = s.entropy_term - cond.value;
  return s;
}

double vclub_s_with_permutation(const LabeledBatch& batch, const Mlp& classifier,
                                std::span<const std::size_t> perm) {
  check_classifier(batch, classifier);
  return kernels::mean_log_contrast(class_probs(classifier, batch.features), batch.labels, perm);
}

double estimate_vclub_s(const LabeledBatch& batch, const Mlp& classifier, Rng& rng) {
  const auto perm = rng.permutation(batch.size());
  return vclub_s_with_permutation(batch, classifier, perm);
}

AdversarialTerm adversarial_ce_term(const LabeledBatch& batch, const Mlp& discriminator) {
  check_classifier(batch, discriminator);
  if (discriminator.head() != Head::Logits) {
    throw ValidationError("adversarial term expects a discriminator with a logits head");
  }
  const LossGrad lg = cross_entropy(discriminator.infer(batch.features), batch.labels);
  return {lg.loss, lg.grad};
}

SurrogateGradient surrogate_gradient(const Mat& class_logits, std::span<const int> labels,
                                     std::span<const double> critic_logits,
                                     const EstimatorSpec& spec,
                                     std::span<const std::size_t> perm) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (class_logits.rows() != n || n == 0) {
    throw ValidationError("surrogate: logits rows and label count differ");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Mat q = softmax_rows(class_logits);
  SurrogateGradient g;

  switch (spec.kind) {
    case EstimatorKind::KL:
    case EstimatorKind::Renyi: {
      if (static_cast<Eigen::Index>(critic_logits.size()) != n) {
        throw ValidationError("surrogate: critic logits required for KL / Renyi");
      }
      const auto k = static_cast<int>(q.cols());
      const Vec w = entropy_weights(labels, k, spec.entropy_weighting);
      const Vec qbar = kernels::column_means(q);
      g.entropy_term = entropy_upper_from_probs(q, labels, spec.entropy_weighting);
      g.ce_term = -kernels::mean_log_at(q, labels);
      const auto log_r = clamped_log_ratios(critic_logits, spec.ratio_clamp_eps);
      g.correction_term = divergence_from_log_ratios(log_r, spec);
      g.value = g.entropy_term - g.ce_term + g.correction_term;

      // dH_up/dq_ik = -w_k / (n qbar_k), pulled back through the softmax.
      Mat dq(n, k);
      for (Eigen::Index c = 0; c < k; ++c) {
        dq.col(c).setConstant(w(c) > 0.0 ? -w(c) * inv_n / qbar(c) : 0.0);
      }
      const Vec dot = (dq.array() * q.array()).rowwise().sum();
      g.d_class_logits = q.array() * (dq.colwise() - dot).array();
      // d(-CE)/dlogits = (onehot - q) / n
      g.d_class_logits -= q * inv_n;
      for (Eigen::Index i = 0; i < n; ++i) g.d_class_logits(i, labels[i]) += inv_n;

      g.d_critic_logits.assign(static_cast<std::size_t>(n), 0.0);
      const double bound = std::log((1.0 - spec.ratio_clamp_eps) / spec.ratio_clamp_eps);
      if (spec.kind == EstimatorKind::KL) {
        for (std::size_t i = 0; i < log_r.size(); ++i) {
          if (std::abs(critic_logits[i]) < bound) g.d_critic_logits[i] = inv_n;
        }
      } else {
        const double a1 = *spec.alpha - 1.0;
        const double m = *std::max_element(log_r.begin(), log_r.end()) * a1;
        double z = 0.0;
        for (double lr : log_r) z += std::exp(a1 * lr - m);
        for (std::size_t i = 0; i < log_r.size(); ++i) {
          if (std::abs(critic_logits[i]) < bound) {
            g.d_critic_logits[i] = std::exp(a1 * log_r[i] - m) / z;
          }
        }
      }
      break;
    }
    case EstimatorKind::VClubS: {
      if (static_cast<Eigen::Index>(perm.size()) != n) {
        throw ValidationError("surrogate: vCLUB-S needs a permutation of the batch");
      }
      g.value = kernels::mean_log_contrast(q, labels, perm);
      g.d_class_logits = Mat::Zero(n, q.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        g.d_class_logits(i, labels[static_cast<std::size_t>(i)]) += inv_n;
        g.d_class_logits(i, labels[perm[static_cast<std::size_t>(i)]]) -= inv_n;
      }
      break;
    }
    case EstimatorKind::AdvCE: {
      const LossGrad lg = cross_entropy(class_logits, labels);
      g.ce_term = lg.loss;
      g.value = -lg.loss;
      g.d_class_logits = -lg.grad;
      break;
    }
  }
  return g;
}

}  // namespace disent
