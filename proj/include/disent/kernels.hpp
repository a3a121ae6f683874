#pragma once

#include <span>

#include "disent/linalg.hpp"

// Per-sample reductions behind the estimators.
//
// Each kernel has an OpenMP version and a `_serial` reference. The parallel
// versions reduce over fixed-size row chunks and combine the chunk partials
// in order, so their results do not depend on the thread count. The serial
// references are plain left-to-right loops; they agree with the parallel
// kernels to rounding and are kept for tests and benchmarks.
namespace disent::kernels {

inline constexpr std::size_t kChunkRows = 2048;

void set_threads(int n);
int max_threads();

// (1/n) sum_i probs.row(i)
Vec column_means(const Mat& probs);
Vec column_means_serial(const Mat& probs);

// (1/n) sum_i log probs(i, labels[i])
double mean_log_at(const Mat& probs, std::span<const int> labels);
double mean_log_at_serial(const Mat& probs, std::span<const int> labels);

// (1/n) sum_i [log probs(i, labels[i]) - log probs(i, labels[perm[i]])]
double mean_log_contrast(const Mat& probs, std::span<const int> labels,
                         std::span<const std::size_t> perm);
double mean_log_contrast_serial(const Mat& probs, std::span<const int> labels,
                                std::span<const std::size_t> perm);

// (1/n) sum_i v_i
double mean(std::span<const double> v);
double mean_serial(std::span<const double> v);

// log((1/n) sum_i exp(scale * v_i)), max-shifted.
double log_mean_exp(std::span<const double> v, double scale);
double log_mean_exp_serial(std::span<const double> v, double scale);

}  // namespace disent::kernels
