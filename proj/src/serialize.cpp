#include "disent/serialize.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "disent/errors.hpp"

namespace disent {

namespace {

Mat matrix_from_json(const Json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) {
    throw ValidationError(std::string(what) + ": expected a nonempty array of rows");
  }
  const std::size_t cols = rows.front().is_array() ? rows.front().size() : 0;
  if (cols == 0) throw ValidationError(std::string(what) + ": rows must be nonempty arrays");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) {
      throw ValidationError(std::string(what) + ": ragged row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!rows[r][c].is_number()) {
        throw ValidationError(std::string(what) + ": non-numeric entry in row " + std::to_string(r));
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

const Json& require(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string(what) + ": missing field '" + key + "'");
  }
  return j.at(key);
}

std::string head_name(Head h) {
  switch (h) {
    case Head::Logits: return "logits";
    case Head::Sigmoid: return "sigmoid";
    case Head::Softmax: return "softmax";
  }
  return "logits";
}

Head parse_head(const std::string& s) {
  if (s == "logits") return Head::Logits;
  if (s == "sigmoid") return Head::Sigmoid;
  if (s == "softmax") return Head::Softmax;
  throw ValidationError("checkpoint: unknown head '" + s + "'");
}

// Typed accessors that name the key on failure.
double get_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

long long get_integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<long long>();
}

long long get_count(const Json& v, const std::string& key, long long min) {
  const long long n = get_integer(v, key);
  if (n < min) throw ConfigError(key, "must be >= " + std::to_string(min));
  return n;
}

std::uint64_t get_seed(const Json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

Json to_json(const DiscreteJoint& joint) { return {{"probs", matrix_to_json(joint.probs())}}; }

DiscreteJoint joint_from_json(const Json& j) {
  return DiscreteJoint(matrix_from_json(require(j, "probs", "joint"), "joint"));
}

Json to_json(const ConditionalTable& table) { return {{"probs", matrix_to_json(table.probs())}}; }

ConditionalTable conditional_from_json(const Json& j) {
  return ConditionalTable(matrix_from_json(require(j, "probs", "conditional"), "conditional"));
}

Json to_json(const LabeledBatch& batch) {
  return {{"features", matrix_to_json(batch.features)},
          {"labels", batch.labels},
          {"num_classes", batch.num_classes}};
}

LabeledBatch batch_from_json(const Json& j) {
  LabeledBatch b;
  b.features = matrix_from_json(require(j, "features", "batch"), "batch features");
  const Json& labels = require(j, "labels", "batch");
  if (!labels.is_array()) throw ValidationError("batch: labels must be an array");
  for (const auto& l : labels) {
    if (!l.is_number_integer()) throw ValidationError("batch: labels must be integers");
    b.labels.push_back(l.get<int>());
  }
  if (j.contains("num_classes")) {
    if (!j.at("num_classes").is_number_integer()) throw ValidationError("batch: num_classes must be an integer");
    b.num_classes = j.at("num_classes").get<int>();
  } else {
    int k = 0;
    for (int l : b.labels) k = std::max(k, l + 1);
    b.num_classes = k;
  }
  b.validate();
  return b;
}

Json to_json(const Mlp& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w(l.weight.data(), l.weight.data() + l.weight.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"in", l.in()}, {"out", l.out()}, {"weight", w}, {"bias", b}});
  }
  return {{"format", "disent-mlp"}, {"version", 1},           {"head", head_name(net.head())},
          {"dropout", net.dropout()}, {"leaky_slope", kLeakySlope}, {"layers", layers}};
}

static Mlp parse_mlp(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "disent-mlp") {
    throw ValidationError("checkpoint: not a disent-mlp document");
  }
  if (j.value("version", 0) != 1) throw ValidationError("checkpoint: unsupported version");
  const Json& layers = require(j, "layers", "checkpoint");
  if (!layers.is_array() || layers.empty()) throw ValidationError("checkpoint: no layers");
  std::vector<Eigen::Index> dims;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto in = require(layers[i], "in", "checkpoint layer").get<Eigen::Index>();
    const auto out = require(layers[i], "out", "checkpoint layer").get<Eigen::Index>();
    if (i == 0) dims.push_back(in);
    if (dims.back() != in) throw ValidationError("checkpoint: consecutive layer dimensions differ");
    dims.push_back(out);
  }
  Mlp net = Mlp::zeros(dims, parse_head(j.value("head", "logits")), j.value("dropout", 0.0));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& layer = net.layers()[i];
    const auto w = require(layers[i], "weight", "checkpoint layer").get<std::vector<double>>();
    const auto b = require(layers[i], "bias", "checkpoint layer").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != layer.weight.size() ||
        static_cast<Eigen::Index>(b.size()) != layer.bias.size()) {
      throw ValidationError("checkpoint: layer " + std::to_string(i) + " has the wrong parameter count");
    }
    std::copy(w.begin(), w.end(), layer.weight.data());
    std::copy(b.begin(), b.end(), layer.bias.data());
  }
  return net;
}

// nlohmann type errors (a string where a number belongs, ...) surface as
// validation errors like every other malformed checkpoint.
Mlp mlp_from_json(const Json& j) {
  try {
    return parse_mlp(j);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
}

Json to_json(const RatioCritic& critic) {
  Json j = to_json(critic.net);
  j["feature_dim"] = critic.feature_dim;
  j["num_classes"] = critic.num_classes;
  j["steps"] = critic.steps;
  return j;
}

static RatioCritic parse_critic(const Json& j) {
  RatioCritic c;
  c.net = mlp_from_json(j);
  c.feature_dim = require(j, "feature_dim", "critic").get<Eigen::Index>();
  c.num_classes = require(j, "num_classes", "critic").get<int>();
  c.steps = j.value("steps", 0);
  if (c.net.input_dim() != c.feature_dim + c.num_classes || c.net.output_dim() != 1) {
    throw ValidationError("critic: network shape does not match feature_dim + num_classes -> 1");
  }
  c.ready = true;
  return c;
}

RatioCritic critic_from_json(const Json& j) {
  try {
    return parse_critic(j);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("critic: ") + e.what());
  }
}

Json to_json(const InfoReport& r, double scale) {
  Json renyi = Json::object();
  for (const auto& [alpha, v] : r.renyi_terms) {
    std::ostringstream key;
    key << alpha;
    renyi[key.str()] = v * scale;
  }
  return {{"mi", r.mi * scale},
          {"h_y", r.h_y * scale},
          {"h_y_given_z", r.h_y_given_z * scale},
          {"kl_term", r.kl_term * scale},
          {"renyi_terms", renyi}};
}

SweepConfig experiment_config_from_json(const Json& j, ConfigMode mode) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  SweepConfig c;
  TrainingConfig& t = c.base;
  std::string estimator_name = "kl";
  std::optional<double> clamp_eps;
  std::optional<EntropyWeighting> weighting;
  std::vector<std::string> estimator_names;

  using Setter = std::function<void(const Json&, const std::string&)>;
  std::map<std::string, Setter> setters{
      {"unroll", [&](const Json& v, const std::string& k) { t.unroll = static_cast<int>(get_count(v, k, 1)); }},
      {"encoder_steps", [&](const Json& v, const std::string& k) { t.encoder_steps = static_cast<int>(get_count(v, k, 0)); }},
      {"batch_size", [&](const Json& v, const std::string& k) { t.batch_size = static_cast<int>(get_count(v, k, 2)); }},
      {"lr_encoder", [&](const Json& v, const std::string& k) { t.lr.encoder = get_number(v, k); }},
      {"lr_classifier", [&](const Json& v, const std::string& k) { t.lr.classifier = get_number(v, k); }},
      {"lr_critic", [&](const Json& v, const std::string& k) { t.lr.critic = get_number(v, k); }},
      {"lr_decoder", [&](const Json& v, const std::string& k) { t.lr.decoder = get_number(v, k); }},
      {"weight_decay", [&](const Json& v, const std::string& k) { t.weight_decay = get_number(v, k); }},
      {"clip_norm", [&](const Json& v, const std::string& k) { t.clip_norm = get_number(v, k); }},
      {"hidden", [&](const Json& v, const std::string& k) { t.hidden = get_count(v, k, 1); }},
      {"latent_dim", [&](const Json& v, const std::string& k) { t.latent_dim = get_count(v, k, 1); }},
      {"dropout", [&](const Json& v, const std::string& k) { t.dropout = get_number(v, k); }},
      {"encoder_dropout", [&](const Json& v, const std::string& k) { t.encoder_dropout = get_number(v, k); }},
      {"critic_gradient", [&](const Json& v, const std::string& k) {
         t.critic_gradient = wrap(k, [&] { return parse_critic_gradient(get_string(v, k)); });
       }},
      {"ratio_clamp_eps", [&](const Json& v, const std::string& k) { clamp_eps = get_number(v, k); }},
      {"entropy_weighting", [&](const Json& v, const std::string& k) {
         weighting = wrap(k, [&] { return parse_entropy_weighting(get_string(v, k)); });
       }},
      {"n_encoder", [&](const Json& v, const std::string& k) { c.n_encoder = static_cast<std::size_t>(get_count(v, k, 2)); }},
      {"n_aux", [&](const Json& v, const std::string& k) { c.n_aux = static_cast<std::size_t>(get_count(v, k, 2)); }},
      {"n_test", [&](const Json& v, const std::string& k) { c.n_test = static_cast<std::size_t>(get_count(v, k, 1)); }},
      {"leak", [&](const Json& v, const std::string& k) { c.leak = get_number(v, k); }},
      {"attr_classes", [&](const Json& v, const std::string& k) { c.attr_classes = static_cast<int>(get_count(v, k, 2)); }},
      {"dim", [&](const Json& v, const std::string& k) { c.synthetic.dim = static_cast<std::size_t>(get_count(v, k, 2)); }},
      {"noise_sd", [&](const Json& v, const std::string& k) { c.synthetic.noise_sd = get_number(v, k); }},
      {"offset", [&](const Json& v, const std::string& k) { c.synthetic.offset = get_number(v, k); }},
      {"attacker_steps", [&](const Json& v, const std::string& k) { c.attacker.steps = static_cast<int>(get_count(v, k, 0)); }},
      {"attacker_batch_size", [&](const Json& v, const std::string& k) { c.attacker.batch_size = static_cast<int>(get_count(v, k, 1)); }},
      {"attacker_hidden", [&](const Json& v, const std::string& k) { c.attacker.hidden = get_count(v, k, 1); }},
      {"attacker_dropout", [&](const Json& v, const std::string& k) { c.attacker.dropout = get_number(v, k); }},
      {"attacker_lr", [&](const Json& v, const std::string& k) { c.attacker.lr = get_number(v, k); }},
      {"probe_seeds", [&](const Json& v, const std::string& k) { c.probe_seeds = static_cast<int>(get_count(v, k, 1)); }},
      {"collapse_drop", [&](const Json& v, const std::string& k) { c.collapse_drop = get_number(v, k); }},
  };
  if (mode == ConfigMode::Train) {
    setters["lambda"] = [&](const Json& v, const std::string& k) { c.lambdas = {get_number(v, k)}; };
    setters["estimator"] = [&](const Json& v, const std::string& k) { estimator_name = get_string(v, k); };
    setters["seed"] = [&](const Json& v, const std::string& k) { c.seeds = {get_seed(v, k)}; };
  } else {
    setters["lambdas"] = [&](const Json& v, const std::string& k) {
      if (!v.is_array() || v.empty()) throw ConfigError(k, "expected a nonempty array");
      c.lambdas.clear();
      for (const auto& x : v) c.lambdas.push_back(get_number(x, k));
    };
    setters["estimators"] = [&](const Json& v, const std::string& k) {
      if (!v.is_array() || v.empty()) throw ConfigError(k, "expected a nonempty array");
      for (const auto& x : v) estimator_names.push_back(get_string(x, k));
    };
    setters["seeds"] = [&](const Json& v, const std::string& k) {
      if (!v.is_array() || v.empty()) throw ConfigError(k, "expected a nonempty array");
      c.seeds.clear();
      for (const auto& x : v) c.seeds.push_back(get_seed(x, k));
    };
  }

  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    it->second(value, key);
  }

  if (estimator_names.empty()) estimator_names.push_back(estimator_name);
  c.estimators.clear();
  for (const auto& name : estimator_names) {
    const std::string key = mode == ConfigMode::Train ? "estimator" : "estimators";
    EstimatorSpec spec = wrap(key, [&] { return EstimatorSpec::parse(name); });
    if (clamp_eps) spec.ratio_clamp_eps = *clamp_eps;
    if (weighting) spec.entropy_weighting = *weighting;
    wrap("ratio_clamp_eps", [&] { spec.validate(); return 0; });
    c.estimators.push_back(spec);
  }
  for (double l : c.lambdas) {
    if (l < 0.0) throw ConfigError(mode == ConfigMode::Train ? "lambda" : "lambdas", "must be >= 0");
  }
  if (!(c.leak >= 0.0 && c.leak <= 1.0)) throw ConfigError("leak", "must be in [0, 1]");
  if (!(t.dropout >= 0.0 && t.dropout < 1.0)) throw ConfigError("dropout", "must be in [0, 1)");
  if (!(t.encoder_dropout >= 0.0 && t.encoder_dropout < 1.0)) throw ConfigError("encoder_dropout", "must be in [0, 1)");
  if (!(c.attacker.dropout >= 0.0 && c.attacker.dropout < 1.0)) throw ConfigError("attacker_dropout", "must be in [0, 1)");
  for (auto [k, v] : {std::pair{"lr_encoder", t.lr.encoder}, {"lr_classifier", t.lr.classifier},
                      {"lr_critic", t.lr.critic}, {"lr_decoder", t.lr.decoder}, {"attacker_lr", c.attacker.lr}}) {
    if (!(v > 0.0)) throw ConfigError(k, "must be > 0");
  }
  if (t.weight_decay < 0.0) throw ConfigError("weight_decay", "must be >= 0");
  if (c.synthetic.noise_sd <= 0.0) throw ConfigError("noise_sd", "must be > 0");
  wrap("<config>", [&] { c.validate(); return 0; });
  return c;
}

Json to_json(const SweepConfig& c, ConfigMode mode) {
  const TrainingConfig& t = c.base;
  Json j = {{"unroll", t.unroll},
            {"encoder_steps", t.encoder_steps},
            {"batch_size", t.batch_size},
            {"lr_encoder", t.lr.encoder},
            {"lr_classifier", t.lr.classifier},
            {"lr_critic", t.lr.critic},
            {"lr_decoder", t.lr.decoder},
            {"weight_decay", t.weight_decay},
            {"clip_norm", t.clip_norm},
            {"hidden", t.hidden},
            {"latent_dim", t.latent_dim},
            {"dropout", t.dropout},
            {"encoder_dropout", t.encoder_dropout},
            {"critic_gradient", to_string(t.critic_gradient)},
            {"ratio_clamp_eps", c.estimators.front().ratio_clamp_eps},
            {"entropy_weighting", to_string(c.estimators.front().entropy_weighting)},
            {"n_encoder", c.n_encoder},
            {"n_aux", c.n_aux},
            {"n_test", c.n_test},
            {"leak", c.leak},
            {"attr_classes", c.attr_classes},
            {"dim", c.synthetic.dim},
            {"noise_sd", c.synthetic.noise_sd},
            {"offset", c.synthetic.offset},
            {"attacker_steps", c.attacker.steps},
            {"attacker_batch_size", c.attacker.batch_size},
            {"attacker_hidden", c.attacker.hidden},
            {"attacker_dropout", c.attacker.dropout},
            {"attacker_lr", c.attacker.lr},
            {"probe_seeds", c.probe_seeds},
            {"collapse_drop", c.collapse_drop}};
  if (mode == ConfigMode::Train) {
    j["lambda"] = c.lambdas.front();
    j["estimator"] = c.estimators.front().name();
    j["seed"] = c.seeds.front();
  } else {
    j["lambdas"] = c.lambdas;
    Json names = Json::array();
    for (const auto& e : c.estimators) names.push_back(e.name());
    j["estimators"] = names;
    j["seeds"] = c.seeds;
  }
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace disent
