#pragma once

#include <map>

#include "disent/estimator_spec.hpp"
#include "disent/prob.hpp"

namespace disent {

// Exact information quantities of a finite joint, in nats. 0 log 0 = 0.

double exact_mi(const DiscreteJoint& joint);
double exact_entropy(const DiscreteJoint& joint);       // H(Y)
double exact_cond_entropy(const DiscreteJoint& joint);  // H(Y | Z)

// CE = -E_{ZY}[log q(y|z)]. +inf when q vanishes on the support of p.
double exact_cross_entropy(const DiscreteJoint& joint, const ConditionalTable& q);

// KL(p_ZY || p_Z q). Throws DomainError naming the first cell where
// p(z,y) > 0 but p(z) q(y|z) = 0.
double exact_kl(const DiscreteJoint& joint, const ConditionalTable& q);

// Renyi divergence of order alpha > 1 between the same pair, restricted to
// the support of p_ZY.
double exact_renyi(const DiscreteJoint& joint, const ConditionalTable& q, double alpha);

// E_Y[-log sum_z q(y|z) p(z)], the entropy upper term.
double exact_entropy_upper(const DiscreteJoint& joint, const ConditionalTable& q,
                           EntropyWeighting weighting = EntropyWeighting::Empirical);

// E_{YZ}[log q] - E_Y E_Z[log q]; +inf if q has zeros where p_Y p_Z does not.
double exact_vclub(const DiscreteJoint& joint, const ConditionalTable& q);

// Exact right-hand side of the variational bound selected by `spec`:
//   KL / Renyi  entropy upper term + E[log q] + divergence term
//   vCLUB-S     exact_vclub
//   AdvCE       H(Y) - CE(q), the adversarial lower-bound value
double exact_bound_rhs(const DiscreteJoint& joint, const ConditionalTable& q,
                       const EstimatorSpec& spec);

struct InfoReport {
  double mi = 0.0;
  double h_y = 0.0;
  double h_y_given_z = 0.0;
  double kl_term = 0.0;                // KL(p_ZY || p_Z q)
  std::map<double, double> renyi_terms;  // alpha -> D_alpha(p_ZY || p_Z q)
};

// With no q given, q defaults to the uniform conditional.
InfoReport info_report(const DiscreteJoint& joint, const ConditionalTable& q,
                       const std::vector<double>& alphas = {1.3, 1.5, 1.8});

}  // namespace disent
