#include "disent/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "disent/errors.hpp"

namespace disent {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_compatible(const DiscreteJoint& joint, const ConditionalTable& q) {
  if (joint.z_size() != q.z_size() || joint.y_size() != q.y_size()) {
    throw ValidationError("oracle: joint and conditional table shapes differ");
  }
}

void check_continuity(const DiscreteJoint& joint, const ConditionalTable& q) {
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      if (joint(z, y) > 0.0 && !(q(z, y) > 0.0)) {
        std::ostringstream os;
        os << "absolute continuity violated at cell (z=" << z << ", y=" << y
           << "): p(z,y) > 0 but q(y|z) = 0";
        throw DomainError(os.str());
      }
    }
  }
}

}  // namespace

double exact_entropy(const DiscreteJoint& joint) {
  const Vec py = joint.y_marginal();
  double h = 0.0;
  for (Eigen::Index y = 0; y < py.size(); ++y) h -= xlogx(py(y));
  return h;
}

double exact_cond_entropy(const DiscreteJoint& joint) {
  const Vec pz = joint.z_marginal();
  double h = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    if (!(pz(z) > 0.0)) continue;
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (p > 0.0) h -= p * std::log(p / pz(z));
    }
  }
  return h;
}

double exact_mi(const DiscreteJoint& joint) {
  const Vec pz = joint.z_marginal();
  const Vec py = joint.y_marginal();
  double mi = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (p > 0.0) mi += p * std::log(p / (pz(z) * py(y)));
    }
  }
  return mi;
}

double exact_cross_entropy(const DiscreteJoint& joint, const ConditionalTable& q) {
  check_compatible(joint, q);
  double ce = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (!(p > 0.0)) continue;
      if (!(q(z, y) > 0.0)) return std::numeric_limits<double>::infinity();
      ce -= p * std::log(q(z, y));
    }
  }
  return ce;
}

double exact_kl(const DiscreteJoint& joint, const ConditionalTable& q) {
  check_compatible(joint, q);
  check_continuity(joint, q);
  const Vec pz = joint.z_marginal();
  double kl = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (p > 0.0) kl += p * std::log((p / pz(z)) / q(z, y));
    }
  }
  return kl;
}

double exact_renyi(const DiscreteJoint& joint, const ConditionalTable& q, double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw DomainError("renyi: alpha must be finite and > 1");
  }
  check_compatible(joint, q);
  check_continuity(joint, q);
  const Vec pz = joint.z_marginal();
  // Log-sum-exp over the support: log sum_c p_c exp((alpha-1) log R_c).
  const double a1 = alpha - 1.0;
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (p > 0.0) {
        const double t = std::log(p) + a1 * std::log((p / pz(z)) / q(z, y));
        max_term = std::max(max_term, t);
      }
    }
  }
  double acc = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double p = joint(z, y);
      if (p > 0.0) {
        acc += std::exp(std::log(p) + a1 * std::log((p / pz(z)) / q(z, y)) - max_term);
      }
    }
  }
  return (max_term + std::log(acc)) / a1;
}

double exact_entropy_upper(const DiscreteJoint& joint, const ConditionalTable& q,
                           EntropyWeighting weighting) {
  check_compatible(joint, q);
  const Vec pz = joint.z_marginal();
  const Vec py = joint.y_marginal();
  const Vec qy = (pz.transpose() * q.probs()).transpose();
  double h = 0.0;
  for (Eigen::Index y = 0; y < py.size(); ++y) {
    const double w = weighting == EntropyWeighting::Empirical
                         ? py(y)
                         : 1.0 / static_cast<double>(py.size());
    if (!(w > 0.0)) continue;
    if (!(qy(y) > 0.0)) return std::numeric_limits<double>::infinity();
    h -= w * std::log(qy(y));
  }
  return h;
}

double exact_vclub(const DiscreteJoint& joint, const ConditionalTable& q) {
  check_compatible(joint, q);
  const Vec pz = joint.z_marginal();
  const Vec py = joint.y_marginal();
  double positive = 0.0;
  double marginal = 0.0;
  for (std::size_t z = 0; z < joint.z_size(); ++z) {
    for (std::size_t y = 0; y < joint.y_size(); ++y) {
      const double pzy = joint(z, y);
      const double prod = pz(z) * py(y);
      if (prod > 0.0 && !(q(z, y) > 0.0)) return std::numeric_limits<double>::infinity();
      if (pzy > 0.0) positive += pzy * std::log(q(z, y));
      if (prod > 0.0) marginal += prod * std::log(q(z, y));
    }
  }
  return positive - marginal;
}

double exact_bound_rhs(const DiscreteJoint& joint, const ConditionalTable& q,
                       const EstimatorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EstimatorKind::KL:
    case EstimatorKind::Renyi: {
      const double divergence = spec.kind == EstimatorKind::KL
                                    ? exact_kl(joint, q)
                                    : exact_renyi(joint, q, *spec.alpha);
      return exact_entropy_upper(joint, q, spec.entropy_weighting) -
             exact_cross_entropy(joint, q) + divergence;
    }
    case EstimatorKind::VClubS:
      return exact_vclub(joint, q);
    case EstimatorKind::AdvCE:
      return exact_entropy(joint) - exact_cross_entropy(joint, q);
  }
  return 0.0;
}

InfoReport info_report(const DiscreteJoint& joint, const ConditionalTable& q,
                       const std::vector<double>& alphas) {
  InfoReport r;
  r.h_y = exact_entropy(joint);
  r.h_y_given_z = exact_cond_entropy(joint);
  r.mi = exact_mi(joint);
  r.kl_term = exact_kl(joint, q);
  for (double a : alphas) r.renyi_terms[a] = exact_renyi(joint, q, a);
  return r;
}

}  // namespace disent
