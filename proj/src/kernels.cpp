#include "disent/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <omp.h>

#include "disent/errors.hpp"

namespace disent::kernels {

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kChunkRows - 1) / kChunkRows; }

template <class Term>
double chunked_sum(std::size_t n, const Term& term) {
  const auto chunks = static_cast<std::int64_t>(chunk_count(n));
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunkRows;
    const std::size_t end = std::min(n, begin + kChunkRows);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void check_labels(const Mat& probs, std::span<const int> labels) {
  if (labels.empty() || static_cast<std::size_t>(probs.rows()) != labels.size()) {
    throw ValidationError("kernel: probability rows and label count differ");
  }
}

}  // namespace

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

Vec column_means(const Mat& probs) {
  const std::size_t n = static_cast<std::size_t>(probs.rows());
  if (n == 0) throw ValidationError("kernel: empty matrix");
  const auto chunks = static_cast<std::int64_t>(chunk_count(n));
  std::vector<Vec> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const auto begin = static_cast<Eigen::Index>(c) * static_cast<Eigen::Index>(kChunkRows);
    const auto rows = std::min<Eigen::Index>(static_cast<Eigen::Index>(kChunkRows),
                                             probs.rows() - begin);
    Vec s = Vec::Zero(probs.cols());
    for (Eigen::Index i = begin; i < begin + rows; ++i) s += probs.row(i).transpose();
    partial[static_cast<std::size_t>(c)] = std::move(s);
  }
  Vec total = Vec::Zero(probs.cols());
  for (const auto& p : partial) total += p;
  return total / static_cast<double>(n);
}

Vec column_means_serial(const Mat& probs) {
  if (probs.rows() == 0) throw ValidationError("kernel: empty matrix");
  Vec s = Vec::Zero(probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) s += probs.row(i).transpose();
  return s / static_cast<double>(probs.rows());
}

double mean_log_at(const Mat& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  const double s = chunked_sum(labels.size(), [&](std::size_t i) {
    return std::log(probs(static_cast<Eigen::Index>(i), labels[i]));
  });
  return s / static_cast<double>(labels.size());
}

double mean_log_at_serial(const Mat& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += std::log(probs(static_cast<Eigen::Index>(i), labels[i]));
  }
  return s / static_cast<double>(labels.size());
}

double mean_log_contrast(const Mat& probs, std::span<const int> labels,
                         std::span<const std::size_t> perm) {
  check_labels(probs, labels);
  if (perm.size() != labels.size()) throw ValidationError("kernel: permutation size mismatch");
  const double s = chunked_sum(labels.size(), [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    return std::log(probs(r, labels[i])) - std::log(probs(r, labels[perm[i]]));
  });
  return s / static_cast<double>(labels.size());
}

double mean_log_contrast_serial(const Mat& probs, std::span<const int> labels,
                                std::span<const std::size_t> perm) {
  check_labels(probs, labels);
  if (perm.size() != labels.size()) throw ValidationError("kernel: permutation size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    s += std::log(probs(r, labels[i])) - std::log(probs(r, labels[perm[i]]));
  }
  return s / static_cast<double>(labels.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) throw ValidationError("kernel: empty input");
  return chunked_sum(v.size(), [&](std::size_t i) { return v[i]; }) /
         static_cast<double>(v.size());
}

double mean_serial(std::span<const double> v) {
  if (v.empty()) throw ValidationError("kernel: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double log_mean_exp(std::span<const double> v, double scale) {
  if (v.empty()) throw ValidationError("kernel: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, scale * x);
  const double s = chunked_sum(v.size(), [&](std::size_t i) { return std::exp(scale * v[i] - m); });
  return m + std::log(s / static_cast<double>(v.size()));
}

double log_mean_exp_serial(std::span<const double> v, double scale) {
  if (v.empty()) throw ValidationError("kernel: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, scale * x);
  double s = 0.0;
  for (double x : v) s += std::exp(scale * x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

}  // namespace disent::kernels
