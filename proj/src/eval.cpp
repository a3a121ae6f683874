#include "disent/eval.hpp"

#include <cmath>

#include "disent/errors.hpp"

namespace disent {

double probe_accuracy(const Mat& z_train, std::span<const int> y_train, const Mat& z_test,
                      std::span<const int> y_test, int num_classes, Rng& rng,
                      const AttackerConfig& config) {
  if (z_train.rows() < 1 || static_cast<std::size_t>(z_train.rows()) != y_train.size() ||
      static_cast<std::size_t>(z_test.rows()) != y_test.size() || z_train.cols() != z_test.cols()) {
    throw ValidationError("attacker: train / test shapes are inconsistent");
  }
  Rng init = rng.split("attacker-init");
  Rng draws = rng.split("attacker-batches");
  Rng drop = rng.split("attacker-dropout");
  // Standardise with train statistics so the probe's step size does not
  // depend on the scale the encoder happened to choose.
  const RowVec mu = z_train.colwise().mean();
  RowVec sd = ((z_train.rowwise() - mu).array().square().colwise().sum() /
               static_cast<double>(z_train.rows()))
                  .sqrt();
  sd = sd.unaryExpr([](double v) { return v > 1e-12 ? v : 1.0; });
  const Mat train_std = (z_train.rowwise() - mu).array().rowwise() / sd.array();
  const Mat test_std = (z_test.rowwise() - mu).array().rowwise() / sd.array();

  Mlp probe({z_train.cols(), config.hidden, num_classes}, Head::Logits, config.dropout, init);
  OptimizerState opt(probe, {config.lr, config.weight_decay});

  const auto m = static_cast<std::size_t>(config.batch_size);
  Mat xb(static_cast<Eigen::Index>(m), z_train.cols());
  std::vector<int> yb(m);
  for (int s = 0; s < config.steps; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = draws.below(y_train.size());
      xb.row(static_cast<Eigen::Index>(i)) = train_std.row(static_cast<Eigen::Index>(j));
      yb[i] = y_train[j];
    }
    const LossGrad lg = cross_entropy(probe.forward(xb, true, &drop), yb);
    if (!std::isfinite(lg.loss)) break;  // a probe that cannot fit reports what it has
    probe.backward(lg.grad);
    try {
      step(probe, opt);
    } catch (const NumericError&) {
      break;
    }
  }
  return accuracy(probe.infer(test_std), y_test);
}

double offline_attacker(const Mlp& frozen_encoder, const TaskData& train, const TaskData& test,
                        Rng& rng, const AttackerConfig& config) {
  return probe_accuracy(frozen_encoder.infer(train.x), train.y, frozen_encoder.infer(test.x),
                        test.y, train.attr_classes, rng, config);
}

double task_accuracy(const Mlp& encoder, const Mlp& decoder, const TaskData& test) {
  return accuracy(decoder.infer(encoder.infer(test.x)), test.l);
}

double accuracy_standard_error(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace disent
