#include "disent/estimator_spec.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "disent/errors.hpp"

namespace disent {

void EstimatorSpec::validate() const {
  if (kind == EstimatorKind::Renyi) {
    if (!alpha) throw ValidationError("estimator: renyi requires alpha");
    if (!(*alpha > 1.0) || !std::isfinite(*alpha)) {
      throw DomainError("estimator: renyi alpha must be finite and > 1");
    }
  } else if (alpha) {
    throw ValidationError("estimator: alpha is only valid for renyi");
  }
  if (!(ratio_clamp_eps > 0.0 && ratio_clamp_eps < 0.5)) {
    throw ValidationError("estimator: ratio_clamp_eps must be in (0, 0.5)");
  }
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::KL: return "kl";
    case EstimatorKind::Renyi: return "renyi";
    case EstimatorKind::VClubS: return "vclub-s";
    case EstimatorKind::AdvCE: return "advce";
  }
  return "?";
}

std::string to_string(EntropyWeighting w) {
  return w == EntropyWeighting::Empirical ? "empirical" : "uniform-classes";
}

EntropyWeighting parse_entropy_weighting(std::string_view text) {
  if (text == "empirical") return EntropyWeighting::Empirical;
  if (text == "uniform-classes") return EntropyWeighting::UniformClasses;
  throw ValidationError("unknown entropy weighting '" + std::string(text) + "'");
}

std::string EstimatorSpec::name() const {
  if (kind != EstimatorKind::Renyi) return to_string(kind);
  std::ostringstream os;
  os << "renyi:" << alpha.value_or(0.0);
  return os.str();
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
  EstimatorSpec spec;
  if (text == "kl") {
    spec.kind = EstimatorKind::KL;
  } else if (text == "vclub-s" || text == "vclub") {
    spec.kind = EstimatorKind::VClubS;
  } else if (text == "advce" || text == "adv") {
    spec.kind = EstimatorKind::AdvCE;
  } else if (text == "renyi") {
    spec = renyi(1.5);
  } else if (text.starts_with("renyi:")) {
    const std::string_view num = text.substr(6);
    double a = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), a);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ValidationError("estimator: bad alpha in '" + std::string(text) + "'");
    }
    spec = renyi(a);
  } else {
    throw ValidationError("unknown estimator '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace disent
