#include "disent/train.hpp"

#include <cmath>

#include "disent/errors.hpp"

namespace disent {

std::string to_string(CriticGradient g) {
  return g == CriticGradient::Frozen ? "frozen" : "through-input";
}

CriticGradient parse_critic_gradient(const std::string& text) {
  if (text == "frozen") return CriticGradient::Frozen;
  if (text == "through-input") return CriticGradient::ThroughInput;
  throw ValidationError("critic_gradient: expected 'frozen' or 'through-input', got '" + text + "'");
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ValidationError("config: " + key + " " + why);
  };
  if (!std::isfinite(lambda) || lambda < 0.0) fail("lambda", "must be finite and >= 0");
  estimator.validate();
  if (unroll < 1) fail("unroll", "must be >= 1");
  if (encoder_steps < 0) fail("encoder_steps", "must be >= 0");
  if (batch_size < 2) fail("batch_size", "must be >= 2");
  for (double r : {lr.encoder, lr.classifier, lr.critic, lr.decoder}) {
    if (!(r > 0.0) || !std::isfinite(r)) fail("lr", "must be finite and > 0");
  }
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be >= 0");
  if (hidden < 1) fail("hidden", "must be >= 1");
  if (latent_dim < 1) fail("latent_dim", "must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout", "must be in [0, 1)");
  if (!(encoder_dropout >= 0.0 && encoder_dropout < 1.0)) fail("encoder_dropout", "must be in [0, 1)");
}

ModelBundle ModelBundle::create(Eigen::Index input_dim, int attr_classes, int target_classes,
                                const TrainingConfig& c, Rng& init) {
  Rng enc_init = init.split("encoder");
  Rng cls_init = init.split("classifier");
  Rng critic_init = init.split("critic");
  Rng dec_init = init.split("decoder");
  CriticOptions critic_options;
  critic_options.hidden = c.hidden;
  critic_options.lr = c.lr.critic;
  critic_options.weight_decay = c.weight_decay;
  ModelBundle b{
      Mlp({input_dim, c.hidden, c.hidden, c.latent_dim}, Head::Logits, c.encoder_dropout, enc_init),
      Mlp({c.latent_dim, c.hidden, c.hidden, attr_classes}, Head::Logits, c.dropout, cls_init),
      RatioCritic(c.latent_dim, attr_classes, critic_options, critic_init),
      Mlp({c.latent_dim, c.hidden, c.hidden, target_classes}, Head::Logits, c.dropout, dec_init)};
  b.validate();
  return b;
}

void ModelBundle::validate() const {
  const auto d = encoder.output_dim();
  if (classifier.input_dim() != d || decoder.input_dim() != d || critic.feature_dim != d) {
    throw ValidationError("bundle: encoder output dimension must feed classifier, critic and decoder");
  }
  if (critic.net.input_dim() != d + critic.num_classes) {
    throw ValidationError("bundle: critic input must be d + |Y|");
  }
}

Mat encode(const Mlp& encoder, const Mat& x) { return encoder.infer(x); }

CompositeLoss composite_loss(ModelBundle& b, const Mat& x, std::span<const int> y,
                             std::span<const int> l, const TrainingConfig& config, Rng& rng,
                             const CompositeOptions& options) {
  CompositeLoss out;
  const Mat z = b.encoder.forward(x, options.encoder_train_mode, &rng);

  const Mat task_logits = b.decoder.forward(z, false);
  const LossGrad task = cross_entropy(task_logits, l);
  out.task = task.loss;
  if (!std::isfinite(out.task)) throw NumericError("composite loss: downstream term is non-finite");
  Mat dz = b.decoder.backward(task.grad, false);

  {
    const Mat class_logits = b.classifier.forward(z, false);
    std::vector<double> critic_logits;
    std::vector<std::size_t> perm;
    const EstimatorKind kind = config.estimator.kind;
    Mat critic_in;
    if (kind == EstimatorKind::KL || kind == EstimatorKind::Renyi) {
      if (options.critic_logits != nullptr) {
        critic_logits = *options.critic_logits;
      } else {
        critic_in = b.critic.inputs(z, y);
        const Mat cl = b.critic.net.forward(critic_in, false);
        critic_logits.assign(cl.data(), cl.data() + cl.size());
      }
    } else if (kind == EstimatorKind::VClubS) {
      perm = rng.permutation(y.size());
    }
    out.detail = surrogate_gradient(class_logits, y, critic_logits, config.estimator, perm);
    out.surrogate = out.detail.value;
    if (!std::isfinite(out.surrogate)) {
      throw NumericError("composite loss: " + config.estimator.name() + " term is non-finite");
    }
    if (config.lambda > 0.0) {
      dz += config.lambda * b.classifier.backward(out.detail.d_class_logits, false);
      if (config.critic_gradient == CriticGradient::ThroughInput && critic_in.size() > 0) {
        Mat up(static_cast<Eigen::Index>(critic_logits.size()), 1);
        for (std::size_t i = 0; i < critic_logits.size(); ++i) {
          up(static_cast<Eigen::Index>(i), 0) = out.detail.d_critic_logits[i];
        }
        const Mat din = b.critic.net.backward(up, false);
        dz += config.lambda * din.leftCols(z.cols());
      }
    }
  }
  out.total = out.task + config.lambda * out.surrogate;
  if (!std::isfinite(out.total)) throw NumericError("composite loss: total is non-finite");
  if (options.accumulate_encoder_grads) b.encoder.backward(dz, true);
  return out;
}

Trainer::Trainer(const TaskData& enc, const TaskData& aux, TrainingConfig config)
    : enc_(enc), aux_(aux), config_(std::move(config)) {
  config_.validate();
  if (enc_.size() < 1 || aux_.size() < 1) throw ValidationError("train: empty split");
  if (enc_.x.cols() != aux_.x.cols() || enc_.attr_classes != aux_.attr_classes) {
    throw ValidationError("train: D and D' differ in shape");
  }
  Rng base(config_.seed);
  Rng init = base.split("init");
  models_ = ModelBundle::create(enc_.x.cols(), enc_.attr_classes, enc_.target_classes, config_, init);
  const double wd = config_.weight_decay;
  const double clip = config_.clip_norm;
  opt_encoder_ = OptimizerState(models_.encoder, {config_.lr.encoder, wd, clip});
  opt_classifier_ = OptimizerState(models_.classifier, {config_.lr.classifier, wd, clip});
  opt_critic_ = OptimizerState(models_.critic.net, {config_.lr.critic, wd, clip});
  opt_decoder_ = OptimizerState(models_.decoder, {config_.lr.decoder, wd, clip});
  batch_rng_ = base.split("batches");
  negative_rng_ = base.split("negatives");
  dropout_rng_ = base.split("dropout");
  surrogate_rng_ = base.split("surrogate");
}

void Trainer::draw_batch(const TaskData& data, Rng& rng, Mat& x, std::vector<int>& y,
                         std::vector<int>& l) const {
  const auto m = static_cast<std::size_t>(config_.batch_size);
  x.resize(static_cast<Eigen::Index>(m), data.x.cols());
  y.resize(m);
  l.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = rng.below(data.size());
    x.row(static_cast<Eigen::Index>(i)) = data.x.row(static_cast<Eigen::Index>(j));
    y[i] = data.y[j];
    l[i] = data.l[j];
  }
}

Trainer::InnerLosses Trainer::inner_steps() {
  InnerLosses losses;
  Mat x;
  std::vector<int> y, l;
  for (int u = 0; u < config_.unroll; ++u) {
    draw_batch(aux_, batch_rng_, x, y, l);
    const Mat z = models_.encoder.infer(x);
    const LabeledBatch positives{z, y, aux_.attr_classes};

    // Negatives come from the current classifier, so they track q as it moves.
    const LabeledBatch negatives = make_negatives(positives, models_.classifier, negative_rng_);
    losses.critic = critic_update(models_.critic, opt_critic_, positives, negatives);

    const LossGrad cls = cross_entropy(models_.classifier.forward(z, true, &dropout_rng_), y);
    if (!std::isfinite(cls.loss)) throw NumericError("classifier: non-finite loss");
    models_.classifier.backward(cls.grad);
    disent::step(models_.classifier, opt_classifier_);
    losses.classifier = cls.loss;

    const LossGrad dec = cross_entropy(models_.decoder.forward(z, true, &dropout_rng_), l);
    if (!std::isfinite(dec.loss)) throw NumericError("decoder: non-finite loss");
    models_.decoder.backward(dec.grad);
    disent::step(models_.decoder, opt_decoder_);
    losses.decoder = dec.loss;
  }
  return losses;
}

CompositeLoss Trainer::encoder_step() {
  Mat x;
  std::vector<int> y, l;
  draw_batch(enc_, batch_rng_, x, y, l);
  models_.encoder.zero_grad();
  CompositeLoss loss = composite_loss(models_, x, y, l, config_, surrogate_rng_);
  disent::step(models_.encoder, opt_encoder_);
  ++step_;
  return loss;
}

TrainingResult Trainer::run() {
  TrainingResult result;
  result.log.reserve(static_cast<std::size_t>(config_.encoder_steps));
  for (int s = 0; s < config_.encoder_steps; ++s) {
    try {
      const InnerLosses inner = inner_steps();
      const CompositeLoss loss = encoder_step();
      result.log.push_back({s, loss.task, inner.classifier, inner.critic, loss.surrogate});
    } catch (const NumericError& e) {
      result.diverged = true;
      result.diverged_step = s;
      result.error = e.what();
      break;
    }
  }
  result.models = models_;
  return result;
}

TrainingResult train(const TaskData& enc, const TaskData& aux, const TrainingConfig& config) {
  Trainer trainer(enc, aux, config);
  return trainer.run();
}

}  // namespace disent
