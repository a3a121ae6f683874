#pragma once

#include <string>

#include <json.hpp>

#include "disent/oracle.hpp"
#include "disent/prob.hpp"
#include "disent/sweep.hpp"

// JSON interchange shapes.
//
//   joint        {"probs": [[p00, p01, ...], ...]}            rows = z, cols = y
//   conditional  {"probs": [[q(y0|z0), ...], ...]}
//   batch        {"features": [[...], ...], "labels": [...], "num_classes": k}
//   checkpoint   {"format": "disent-mlp", "version": 1, "head": "logits",
//                 "dropout": 0.1, "leaky_slope": 0.01,
//                 "layers": [{"in": i, "out": o, "weight": [row-major o*i], "bias": [o]}]}
//   critic       checkpoint fields plus "feature_dim", "num_classes"
namespace disent {

using Json = nlohmann::json;

Json to_json(const DiscreteJoint& joint);
DiscreteJoint joint_from_json(const Json& j);

Json to_json(const ConditionalTable& table);
ConditionalTable conditional_from_json(const Json& j);

Json to_json(const LabeledBatch& batch);
LabeledBatch batch_from_json(const Json& j);

Json to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

Json to_json(const RatioCritic& critic);
RatioCritic critic_from_json(const Json& j);

// units_scale multiplies every information quantity (1 for nats, 1/ln 2 for bits).
Json to_json(const InfoReport& report, double units_scale = 1.0);

enum class ConfigMode { Train, Sweep };

// Experiment configuration. Every key is optional and defaults to the
// library defaults; unknown keys and ill-typed values throw ConfigError.
// Train mode takes scalar "lambda", "estimator", "seed"; sweep mode takes the
// lists "lambdas", "estimators", "seeds".
SweepConfig experiment_config_from_json(const Json& j, ConfigMode mode);
// Canonical form (all keys, defaults filled in) used for manifest hashing.
Json to_json(const SweepConfig& config, ConfigMode mode);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace disent
