#pragma once

#include <span>

#include "disent/nn.hpp"
#include "disent/prob.hpp"

namespace disent {

// Post-hoc probe retrained on frozen representations. Two-layer perceptron
// (one hidden LeakyReLU layer) with dropout.
struct AttackerConfig {
  int steps = 5000;
  int batch_size = 128;
  Eigen::Index hidden = 128;
  double dropout = 0.1;
  double lr = 1e-3;
  double weight_decay = 0.01;
};

// Trains a probe on (z_train, y_train) and returns accuracy on (z_test, y_test).
double probe_accuracy(const Mat& z_train, std::span<const int> y_train, const Mat& z_test,
                      std::span<const int> y_test, int num_classes, Rng& rng,
                      const AttackerConfig& config = {});

// Attribute accuracy of a fresh attacker on f_e(x). The encoder is only read.
double offline_attacker(const Mlp& frozen_encoder, const TaskData& train, const TaskData& test,
                        Rng& rng, const AttackerConfig& config = {});

double task_accuracy(const Mlp& encoder, const Mlp& decoder, const TaskData& test);

// Standard error of an accuracy estimate under the null accuracy p.
double accuracy_standard_error(double p, std::size_t n);

}  // namespace disent
