#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "disent/linalg.hpp"
#include "disent/rng.hpp"

namespace disent {

inline constexpr double kProbabilityTolerance = 1e-12;

// Exact joint p(z, y): rows index the Z alphabet, columns the Y alphabet.
class DiscreteJoint {
 public:
  // Throws ValidationError unless every entry is >= 0 and the total is 1.
  explicit DiscreteJoint(Mat probs);

  const Mat& probs() const { return probs_; }
  double operator()(std::size_t z, std::size_t y) const { return probs_(z, y); }
  std::size_t z_size() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t y_size() const { return static_cast<std::size_t>(probs_.cols()); }

  Vec z_marginal() const { return probs_.rowwise().sum(); }
  Vec y_marginal() const { return probs_.colwise().sum().transpose(); }

  static DiscreteJoint product(const Vec& pz, const Vec& py);

 private:
  Mat probs_;
};

// q(y | z): each row a distribution over Y.
class ConditionalTable {
 public:
  explicit ConditionalTable(Mat probs);

  const Mat& probs() const { return probs_; }
  double operator()(std::size_t z, std::size_t y) const { return probs_(z, y); }
  std::size_t z_size() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t y_size() const { return static_cast<std::size_t>(probs_.cols()); }

  // p(y | z) of a joint. Rows with p(z) = 0 are set uniform; they carry no mass.
  static ConditionalTable of(const DiscreteJoint& joint);
  static ConditionalTable uniform(std::size_t z_size, std::size_t y_size);

 private:
  Mat probs_;
};

// n labelled representations (z_i, y_i).
struct LabeledBatch {
  Mat features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  // Throws ValidationError on empty batches, shape mismatch or out-of-range labels.
  void validate() const;
  // Empirical label frequencies.
  Vec label_frequencies() const;
};

LabeledBatch make_batch(Mat features, std::vector<int> labels, int num_classes);

// n i.i.d. draws from the joint with z one-hot encoded (d = |Z|).
LabeledBatch sample_joint(const DiscreteJoint& joint, std::size_t n, Rng& rng);

// Joint cell counts of a one-hot batch, normalised.
Mat empirical_joint(const LabeledBatch& batch);

// Index drawn from a discrete distribution by inverse CDF.
int sample_categorical(std::span<const double> probs, Rng& rng);

// Random joint for property tests: Dirichlet(1) over cells, optionally with
// a fraction of cells forced to zero (at least one cell keeps mass).
DiscreteJoint random_joint(std::size_t z_size, std::size_t y_size, Rng& rng,
                           double zero_fraction = 0.0);
ConditionalTable random_conditional(std::size_t z_size, std::size_t y_size, Rng& rng);

// ---------------------------------------------------------------------------
// Synthetic fair-classification task.
//
//   x = m_l * u + leak * m_y * v + noise,   u = e_0, v = e_1
//
// m_l = +-offset for the binary target; the attribute centres are spaced
// 2 * offset apart and symmetric around zero, so the binary attribute sits at
// +-offset like the target.

struct SyntheticParams {
  std::size_t dim = 16;
  double noise_sd = 1.0;
  double offset = 2.0;
};

struct SyntheticTaskSample {
  Vec x;
  int l = 0;  // target label in {0, 1}
  int y = 0;  // protected attribute in [0, n_attr_classes)
};

std::vector<SyntheticTaskSample> generate_synthetic_task(std::size_t n, double leak,
                                                         int n_attr_classes, Rng& rng,
                                                         const SyntheticParams& params = {});

// Matrix view of a sample list, the form the training code consumes.
struct TaskData {
  Mat x;
  std::vector<int> l;
  std::vector<int> y;
  int attr_classes = 2;
  int target_classes = 2;

  std::size_t size() const { return l.size(); }
};

TaskData pack(const std::vector<SyntheticTaskSample>& samples, int n_attr_classes);

// Centre of attribute class y along v (before scaling by leak).
double attribute_offset(int y, int n_attr_classes, double offset);

// Closed-form Bayes accuracy of predicting y from x (equal priors, the
// attribute only moves x along v).
double bayes_attribute_accuracy(double leak, int n_attr_classes, const SyntheticParams& params = {});
double bayes_target_accuracy(const SyntheticParams& params = {});

}  // namespace disent
