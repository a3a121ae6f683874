#include "disent/prob.hpp"

#include <cmath>
#include <sstream>

#include "disent/errors.hpp"

namespace disent {

namespace {

void check_table_shape(const Mat& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ValidationError(std::string(what) + ": both alphabet sizes must be >= 1");
  }
}

void check_entries(const Mat& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << what << ": entry (" << r << ", " << c << ") = " << v << " is not a probability";
        throw ValidationError(os.str());
      }
    }
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

DiscreteJoint::DiscreteJoint(Mat probs) : probs_(std::move(probs)) {
  check_table_shape(probs_, "joint");
  check_entries(probs_, "joint");
  const double total = probs_.sum();
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "joint: entries sum to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
}

DiscreteJoint DiscreteJoint::product(const Vec& pz, const Vec& py) {
  return DiscreteJoint(pz * py.transpose());
}

ConditionalTable::ConditionalTable(Mat probs) : probs_(std::move(probs)) {
  check_table_shape(probs_, "conditional");
  check_entries(probs_, "conditional");
  for (Eigen::Index r = 0; r < probs_.rows(); ++r) {
    const double total = probs_.row(r).sum();
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "conditional: row " << r << " sums to " << total << ", expected 1";
      throw ValidationError(os.str());
    }
  }
}

ConditionalTable ConditionalTable::of(const DiscreteJoint& joint) {
  Mat cond = joint.probs();
  const Vec pz = joint.z_marginal();
  for (Eigen::Index z = 0; z < cond.rows(); ++z) {
    if (pz(z) > 0.0) {
      cond.row(z) /= pz(z);
      // Renormalise to absorb rounding in the division.
      cond.row(z) /= cond.row(z).sum();
    } else {
      cond.row(z).setConstant(1.0 / static_cast<double>(cond.cols()));
    }
  }
  return ConditionalTable(std::move(cond));
}

ConditionalTable ConditionalTable::uniform(std::size_t z_size, std::size_t y_size) {
  Mat m = Mat::Constant(static_cast<Eigen::Index>(z_size), static_cast<Eigen::Index>(y_size),
                        1.0 / static_cast<double>(y_size));
  return ConditionalTable(std::move(m));
}

void LabeledBatch::validate() const {
  if (labels.empty()) throw ValidationError("batch: n must be >= 1");
  if (features.cols() < 1) throw ValidationError("batch: feature dimension must be >= 1");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ValidationError("batch: feature rows and label count differ");
  }
  if (num_classes < 1) throw ValidationError("batch: num_classes must be >= 1");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError("batch: label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " out of range");
    }
  }
}

Vec LabeledBatch::label_frequencies() const {
  Vec f = Vec::Zero(num_classes);
  for (int y : labels) f(y) += 1.0;
  return f / static_cast<double>(labels.size());
}

LabeledBatch make_batch(Mat features, std::vector<int> labels, int num_classes) {
  LabeledBatch b{std::move(features), std::move(labels), num_classes};
  b.validate();
  return b;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  // u landed in the rounding slack above the cumulative sum: last class with mass.
  for (std::size_t k = probs.size(); k > 0; --k) {
    if (probs[k - 1] > 0.0) return static_cast<int>(k - 1);
  }
  return static_cast<int>(probs.size()) - 1;
}

LabeledBatch sample_joint(const DiscreteJoint& joint, std::size_t n, Rng& rng) {
  if (n < 1) throw ValidationError("sample_joint: n must be >= 1");
  const std::size_t nz = joint.z_size();
  const std::size_t ny = joint.y_size();
  const Mat& p = joint.probs();
  std::vector<double> flat(nz * ny);
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y) flat[z * ny + y] = p(z, y);

  LabeledBatch batch;
  batch.features = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nz));
  batch.labels.resize(n);
  batch.num_classes = static_cast<int>(ny);
  for (std::size_t i = 0; i < n; ++i) {
    const int cell = sample_categorical(flat, rng);
    batch.features(static_cast<Eigen::Index>(i), cell / static_cast<int>(ny)) = 1.0;
    batch.labels[i] = cell % static_cast<int>(ny);
  }
  return batch;
}

Mat empirical_joint(const LabeledBatch& batch) {
  batch.validate();
  Mat counts = Mat::Zero(batch.features.cols(), batch.num_classes);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Eigen::Index z;
    batch.features.row(static_cast<Eigen::Index>(i)).maxCoeff(&z);
    counts(z, batch.labels[i]) += 1.0;
  }
  return counts / static_cast<double>(batch.size());
}

DiscreteJoint random_joint(std::size_t z_size, std::size_t y_size, Rng& rng,
                           double zero_fraction) {
  Mat m(static_cast<Eigen::Index>(z_size), static_cast<Eigen::Index>(y_size));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      // Exponential variates normalised to the simplex give Dirichlet(1).
      double u = 0.0;
      while (u <= 0.0) u = rng.uniform();
      m(r, c) = -std::log(u);
      if (zero_fraction > 0.0 && rng.uniform() < zero_fraction) m(r, c) = 0.0;
    }
  }
  if (m.sum() <= 0.0) m(static_cast<Eigen::Index>(rng.below(z_size)), 0) = 1.0;
  m /= m.sum();
  return DiscreteJoint(std::move(m));
}

ConditionalTable random_conditional(std::size_t z_size, std::size_t y_size, Rng& rng) {
  Mat m(static_cast<Eigen::Index>(z_size), static_cast<Eigen::Index>(y_size));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double u = 0.0;
      while (u <= 0.0) u = rng.uniform();
      m(r, c) = -std::log(u);
    }
    m.row(r) /= m.row(r).sum();
  }
  return ConditionalTable(std::move(m));
}

double attribute_offset(int y, int n_attr_classes, double offset) {
  return offset * static_cast<double>(2 * y - (n_attr_classes - 1));
}

std::vector<SyntheticTaskSample> generate_synthetic_task(std::size_t n, double leak,
                                                         int n_attr_classes, Rng& rng,
                                                         const SyntheticParams& params) {
  if (n < 1) throw ValidationError("synthetic task: n must be >= 1");
  if (n_attr_classes < 2) throw ValidationError("synthetic task: n_attr_classes must be >= 2");
  if (!(leak >= 0.0 && leak <= 1.0)) throw ValidationError("synthetic task: leak must be in [0, 1]");
  if (params.dim < 2) throw ValidationError("synthetic task: dim must be >= 2");

  std::vector<SyntheticTaskSample> out(n);
  for (auto& s : out) {
    s.l = static_cast<int>(rng.below(2));
    s.y = static_cast<int>(rng.below(static_cast<std::size_t>(n_attr_classes)));
    s.x.resize(static_cast<Eigen::Index>(params.dim));
    for (Eigen::Index j = 0; j < s.x.size(); ++j) s.x(j) = params.noise_sd * rng.normal();
    s.x(0) += params.offset * (s.l == 1 ? 1.0 : -1.0);
    s.x(1) += leak * attribute_offset(s.y, n_attr_classes, params.offset);
  }
  return out;
}

TaskData pack(const std::vector<SyntheticTaskSample>& samples, int n_attr_classes) {
  TaskData d;
  d.attr_classes = n_attr_classes;
  if (samples.empty()) return d;
  d.x.resize(static_cast<Eigen::Index>(samples.size()), samples.front().x.size());
  d.l.reserve(samples.size());
  d.y.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    d.x.row(static_cast<Eigen::Index>(i)) = samples[i].x.transpose();
    d.l.push_back(samples[i].l);
    d.y.push_back(samples[i].y);
  }
  return d;
}

double bayes_attribute_accuracy(double leak, int n_attr_classes, const SyntheticParams& params) {
  const double k = static_cast<double>(n_attr_classes);
  // Adjacent centres are 2 * leak * offset apart; decision boundaries sit halfway.
  const double half_gap = leak * params.offset / params.noise_sd;
  const double edge = normal_cdf(half_gap);
  const double inner = 2.0 * edge - 1.0;
  return ((k - 2.0) * inner + 2.0 * edge) / k;
}

double bayes_target_accuracy(const SyntheticParams& params) {
  return normal_cdf(params.offset / params.noise_sd);
}

}  // namespace disent
