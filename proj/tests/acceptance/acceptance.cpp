// Acceptance suite: one PASS/FAIL line per numbered criterion.
//
//   disent_acceptance [--criteria 1,2,...] [--records file.csv]
//
// Exit status is 0 only if every selected criterion passes.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "disent/cli.hpp"
#include "disent/errors.hpp"
#include "disent/oracle.hpp"
#include "disent/serialize.hpp"
#include "disent/sweep.hpp"
#include "test_helpers.hpp"

using namespace disent;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, one block per criterion.
namespace tol {
constexpr int kRandomPairs = 1000;
constexpr std::size_t kMaxAlphabet = 8;
constexpr double kIdentity = 1e-12;        // 1
constexpr double kDivergenceFloor = -1e-12;
constexpr double kOracleSeconds1 = 5.0;
constexpr double kBound = 1e-10;           // 2, 3, 4
constexpr double kOracleSeconds2 = 10.0;
constexpr std::size_t kSampleN = 50000;    // 5, 6
constexpr double kTrueMi = 0.19274;
constexpr double kSurrogateBand = 0.02;
constexpr double kSurrogateSeconds = 120.0;
constexpr double kRatioMedianRelErr = 0.10;
constexpr double kRatioSeconds = 60.0;
constexpr double kGradNn = 1e-4;           // 7
constexpr double kGradComposite = 1e-3;
constexpr double kGradSeconds = 30.0;
constexpr double kBaselineAttacker = 0.8;  // 8
constexpr double kChanceBand = 0.05;
constexpr double kTaskDrop = 0.10;
constexpr double kTradeoffSeconds = 1800.0;
constexpr double kCollapseDrop = 0.2;      // 9
constexpr double kStableDrop = 0.1;
constexpr double kCollapseMaxLambda = 1.0;
constexpr double kDegeneracySeconds = 1800.0;
constexpr double kBandGap = 0.05;          // 10
constexpr double kLevelSeparation = 0.03;
constexpr int kMinRenyiLevels = 3;
}  // namespace tol

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DiscreteJoint example_joint() {
  Mat m(2, 2);
  m << 0.4, 0.1, 0.1, 0.4;
  return DiscreteJoint(m);
}

// Random (joint, q) pairs shared by criteria 1 to 4. A quarter of the
// joints have zeroed cells so the support-restricted paths are exercised.
struct Pair {
  DiscreteJoint joint;
  ConditionalTable q;
};

std::vector<Pair> random_pairs() {
  Rng rng(20240611);
  std::vector<Pair> out;
  out.reserve(tol::kRandomPairs);
  for (int i = 0; i < tol::kRandomPairs; ++i) {
    const std::size_t nz = 1 + rng.below(tol::kMaxAlphabet);
    const std::size_t ny = 1 + rng.below(tol::kMaxAlphabet);
    auto j = random_joint(nz, ny, rng, i % 4 == 0 ? 0.3 : 0.0);
    auto q = random_conditional(nz, ny, rng);
    out.push_back({std::move(j), std::move(q)});
  }
  return out;
}

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pairs = random_pairs();
  double worst_identity = 0.0, min_div = 0.0;
  for (const auto& [j, q] : pairs) {
    worst_identity = std::max(worst_identity, std::abs(exact_mi(j) - (exact_entropy(j) - exact_cond_entropy(j))));
    min_div = std::min({min_div, exact_mi(j), exact_kl(j, q), exact_renyi(j, q, 1.3), exact_renyi(j, q, 1.5),
                        exact_renyi(j, q, 1.8)});
  }
  const double secs = seconds_since(t0);
  return {worst_identity <= tol::kIdentity && min_div >= tol::kDivergenceFloor && secs < tol::kOracleSeconds1,
          "max |I - (H - H|Z)| = " + fmt(worst_identity) + ", min divergence = " + fmt(min_div) + ", " +
              fmt(secs, 3) + " s"};
}

Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pairs = random_pairs();
  double worst_order = 0.0, worst_tight = 0.0;
  for (const auto& [j, q] : pairs) {
    const double mi = exact_mi(j);
    const double kl = exact_bound_rhs(j, q, EstimatorSpec::kl());
    const double r13 = exact_bound_rhs(j, q, EstimatorSpec::renyi(1.3));
    const double r18 = exact_bound_rhs(j, q, EstimatorSpec::renyi(1.8));
    worst_order = std::max({worst_order, mi - kl, kl - r13, r13 - r18});
    worst_tight = std::max(worst_tight, std::abs(exact_bound_rhs(j, ConditionalTable::of(j), EstimatorSpec::kl()) - mi));
  }
  const double secs = seconds_since(t0);
  return {worst_order <= tol::kBound && worst_tight <= tol::kBound && secs < tol::kOracleSeconds2,
          "worst ordering violation = " + fmt(worst_order) + ", worst |RHS_KL(p) - I| = " + fmt(worst_tight) +
              ", " + fmt(secs, 3) + " s"};
}

Outcome criterion_3() {
  const auto pairs = random_pairs();
  double worst = -1e300, worst_eq = 0.0;
  for (const auto& [j, q] : pairs) {
    const double mi = exact_mi(j);
    worst = std::max(worst, exact_entropy(j) - exact_cross_entropy(j, q) - mi);
    worst_eq = std::max(worst_eq, std::abs(exact_entropy(j) - exact_cross_entropy(j, ConditionalTable::of(j)) - mi));
  }
  return {worst <= tol::kBound && worst_eq <= tol::kBound,
          "max (H - CE - I) = " + fmt(worst) + ", max |H - CE(p) - I| = " + fmt(worst_eq)};
}

Outcome criterion_4() {
  const auto pairs = random_pairs();
  double worst = -1e300;
  for (const auto& [j, q] : pairs) {
    (void)q;
    worst = std::max(worst, exact_mi(j) - exact_vclub(j, ConditionalTable::of(j)));
  }
  return {worst <= tol::kBound, "max (I - vCLUB(p)) = " + fmt(worst)};
}

// Classifier over one-hot z trained by minibatch cross-entropy.
Mlp fit_classifier(const LabeledBatch& batch, Rng& rng) {
  Rng init = rng.split("classifier-init");
  Rng draws = rng.split("classifier-batches");
  Mlp net({static_cast<Eigen::Index>(batch.dim()), 32, batch.num_classes}, Head::Logits, 0.0, init);
  OptimizerState opt(net, {3e-3, 0.0});
  const std::size_t m = 512;
  Mat x(static_cast<Eigen::Index>(m), batch.features.cols());
  std::vector<int> y(m);
  for (int s = 0; s < 1500; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t k = draws.below(batch.size());
      x.row(static_cast<Eigen::Index>(i)) = batch.features.row(static_cast<Eigen::Index>(k));
      y[i] = batch.labels[k];
    }
    net.backward(cross_entropy(net.forward(x), y).grad);
    step(net, opt);
  }
  return net;
}

CriticOptions acceptance_critic() {
  CriticOptions o;
  o.hidden = 64;
  o.batch_size = 512;
  o.lr = 3e-3;
  o.weight_decay = 0.0;
  return o;
}

Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5);
  const auto joint = example_joint();
  const auto batch = sample_joint(joint, tol::kSampleN, rng);
  const Mlp cls = fit_classifier(batch, rng);
  Rng neg_rng = rng.split("negatives");
  const auto negatives = make_negatives(batch, cls, neg_rng);
  Rng critic_rng = rng.split("critic");
  const auto critic = train_ratio_critic(batch, negatives, 1500, critic_rng, acceptance_critic());
  const double kl = estimate_mi_surrogate(batch, cls, critic, EstimatorSpec::kl()).value;
  const double renyi = estimate_mi_surrogate(batch, cls, critic, EstimatorSpec::renyi(1.5)).value;
  const double secs = seconds_since(t0);
  const bool pass = std::abs(kl - tol::kTrueMi) <= tol::kSurrogateBand &&
                    std::abs(renyi - tol::kTrueMi) <= tol::kSurrogateBand && secs < tol::kSurrogateSeconds;
  return {pass, "KL = " + fmt(kl, 5) + ", Renyi(1.5) = " + fmt(renyi, 5) + " (oracle " + fmt(exact_mi(joint), 5) +
                    "), " + fmt(secs, 3) + " s"};
}

Outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(6);
  const auto joint = example_joint();
  const auto q = ConditionalTable::uniform(2, 2);
  const auto p = ConditionalTable::of(joint);
  const auto positives = sample_joint(joint, tol::kSampleN, rng);
  const auto negatives = make_negatives(positives, testing::table_classifier(q), rng);
  Rng critic_rng = rng.split("critic");
  const auto critic = train_ratio_critic(positives, negatives, 1500, critic_rng, acceptance_critic());
  const auto logits = critic.logits(positives.features, positives.labels);
  std::vector<double> rel(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    Eigen::Index z;
    positives.features.row(static_cast<Eigen::Index>(i)).maxCoeff(&z);
    const auto y = static_cast<std::size_t>(positives.labels[i]);
    const double truth = p(static_cast<std::size_t>(z), y) / q(static_cast<std::size_t>(z), y);
    rel[i] = std::abs(ratio_from_logit(logits[i]) - truth) / truth;
  }
  std::nth_element(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(rel.size() / 2), rel.end());
  const double median = rel[rel.size() / 2];
  const double secs = seconds_since(t0);
  return {median < tol::kRatioMedianRelErr && secs < tol::kRatioSeconds,
          "median relative ratio error = " + fmt(median) + ", " + fmt(secs, 3) + " s"};
}

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

double worst_nn_gradient() {
  double worst = 0.0;
  Rng rng(7);
  for (int depth = 1; depth <= 3; ++depth) {
    for (Head head : {Head::Logits, Head::Sigmoid, Head::Softmax}) {
      std::vector<Eigen::Index> dims{4};
      for (int i = 1; i < depth; ++i) dims.push_back(6);
      dims.push_back(head == Head::Sigmoid ? 1 : 3);
      Mlp net(dims, head, 0.0, rng);
      Mat x(5, 4), w(5, dims.back());
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
      auto loss = [&]() { return (net.forward(x).array() * w.array()).sum(); };
      net.zero_grad();
      net.forward(x);
      net.backward(w);
      const double h = 1e-5;
      for (auto& layer : net.layers()) {
        auto check = [&](double* param, double analytic) {
          const double keep = *param;
          *param = keep + h;
          const double up = loss();
          *param = keep - h;
          const double down = loss();
          *param = keep;
          worst = std::max(worst, rel_err(analytic, (up - down) / (2 * h), 1e-6));
        };
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) check(&layer.weight.data()[i], layer.grad_weight.data()[i]);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(&layer.bias.data()[i], layer.grad_bias.data()[i]);
      }
    }
  }
  return worst;
}

double worst_composite_gradient() {
  double worst = 0.0;
  Rng data_rng(8);
  const auto d = pack(generate_synthetic_task(24, 1.0, 3, data_rng), 3);
  for (const auto& spec : {EstimatorSpec::kl(), EstimatorSpec::renyi(1.5), EstimatorSpec::vclub_s(),
                           EstimatorSpec::adv_ce()}) {
    TrainingConfig cfg;
    cfg.estimator = spec;
    cfg.lambda = 0.7;
    cfg.hidden = 12;
    cfg.latent_dim = 4;
    Rng init(9);
    auto b = ModelBundle::create(16, 3, 2, cfg, init);
    b.critic.ready = true;
    const std::vector<double> frozen = b.critic.logits(b.encoder.infer(d.x), d.y);
    CompositeOptions o;
    o.encoder_train_mode = false;
    o.critic_logits = &frozen;
    b.encoder.zero_grad();
    Rng r(10);
    composite_loss(b, d.x, d.y, d.l, cfg, r, o);
    const auto analytic = b.encoder.layers();
    o.accumulate_encoder_grads = false;
    // Small step: a few hidden units of this draw sit within 1e-5 of the
    // LeakyReLU kink, where wider central differences straddle it.
    const double h = 1e-7;
    for (std::size_t li = 0; li < analytic.size(); ++li) {
      auto perturb = [&](double* param, double g) {
        const double keep = *param;
        *param = keep + h;
        b.encoder.touch();
        Rng rp(10);
        const double up = composite_loss(b, d.x, d.y, d.l, cfg, rp, o).total;
        *param = keep - h;
        b.encoder.touch();
        Rng rm(10);
        const double down = composite_loss(b, d.x, d.y, d.l, cfg, rm, o).total;
        *param = keep;
        b.encoder.touch();
        worst = std::max(worst, rel_err(g, (up - down) / (2 * h), 1e-4));
      };
      auto& layer = b.encoder.layers()[li];
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) perturb(&layer.weight.data()[i], analytic[li].grad_weight.data()[i]);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) perturb(&layer.bias.data()[i], analytic[li].grad_bias.data()[i]);
    }
  }
  return worst;
}

Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const double nn = worst_nn_gradient();
  const double composite = worst_composite_gradient();
  const double secs = seconds_since(t0);
  return {nn < tol::kGradNn && composite < tol::kGradComposite && secs < tol::kGradSeconds,
          "worst relative error: layers " + fmt(nn) + ", composite loss " + fmt(composite) + ", " + fmt(secs, 3) +
              " s"};
}

// Per (estimator, lambda) means and standard errors over seeds.
struct Cell {
  double attacker = 0.0, attacker_se = 0.0, task = 0.0;
  bool any_failed = false;
};

std::map<std::string, std::map<double, Cell>> cells(const std::vector<TradeoffRecord>& records) {
  std::map<std::string, std::map<double, std::vector<const TradeoffRecord*>>> groups;
  for (const auto& r : records) groups[r.estimator][r.lambda].push_back(&r);
  std::map<std::string, std::map<double, Cell>> out;
  for (const auto& [est, by_lambda] : groups) {
    for (const auto& [lambda, rs] : by_lambda) {
      Cell c;
      const double n = static_cast<double>(rs.size());
      for (const auto* r : rs) {
        c.attacker += r->attacker_accuracy / n;
        c.task += r->task_accuracy / n;
        c.any_failed = c.any_failed || r->status != "ok";
      }
      double ss = 0.0;
      for (const auto* r : rs) ss += (r->attacker_accuracy - c.attacker) * (r->attacker_accuracy - c.attacker);
      c.attacker_se = rs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      out[est][lambda] = c;
    }
  }
  return out;
}

struct SweepRun {
  std::vector<TradeoffRecord> records;
  double seconds = 0.0;
};

SweepRun run_config(const std::string& name, const std::string& records_path) {
  const auto config =
      experiment_config_from_json(read_json_file(std::string(DISENT_CONFIG_DIR) + "/" + name), ConfigMode::Sweep);
  const auto t0 = std::chrono::steady_clock::now();
  SweepRun run{sweep(config), 0.0};
  run.seconds = seconds_since(t0);
  if (!records_path.empty()) {
    std::ostringstream os;
    write_records_csv(os, run.records, "acceptance " + name);
    write_text_file(records_path, os.str());
  }
  return run;
}

std::string curve(const std::map<double, Cell>& by_lambda) {
  std::string s;
  for (const auto& [l, c] : by_lambda) s += (s.empty() ? "" : " ") + fmt(l) + ":" + fmt(c.attacker, 3);
  return s;
}

Outcome criterion_8(const SweepRun& run) {
  const auto c = cells(run.records);
  std::string why;
  bool ok = run.seconds < tol::kTradeoffSeconds;
  for (const char* est : {"kl", "renyi:1.5"}) {
    const auto& by_lambda = c.at(est);
    const double base = by_lambda.at(0.0).attacker;
    if (base < tol::kBaselineAttacker) {
      ok = false;
      why += std::string(" ") + est + " baseline attacker " + fmt(base) + " < 0.8;";
    }
    // Non-increasing up to one standard error of the difference.
    for (auto it = std::next(by_lambda.begin()); it != by_lambda.end(); ++it) {
      const auto& prev = std::prev(it)->second;
      const double se = std::hypot(prev.attacker_se, it->second.attacker_se);
      if (it->second.attacker > prev.attacker + se) {
        ok = false;
        why += std::string(" ") + est + " rises at lambda " + fmt(it->first) + ";";
      }
    }
  }
  const auto& renyi = c.at("renyi:1.5");
  const double top = renyi.at(10.0).attacker;
  const double drop = renyi.at(0.0).task - renyi.at(10.0).task;
  if (std::abs(top - 0.5) > tol::kChanceBand) {
    ok = false;
    why += " Renyi attacker at lambda 10 = " + fmt(top) + ";";
  }
  if (drop > tol::kTaskDrop) {
    ok = false;
    why += " Renyi task drop = " + fmt(drop) + ";";
  }
  return {ok, "KL [" + curve(c.at("kl")) + "], Renyi [" + curve(renyi) + "], Renyi task drop at 10 = " +
                  fmt(drop, 3) + ", " + fmt(run.seconds, 4) + " s" + (why.empty() ? "" : " |" + why)};
}

// Sorted values split wherever neighbours differ by at least `gap`.
std::vector<std::vector<double>> bands(std::vector<double> v, double gap) {
  std::sort(v.begin(), v.end());
  std::vector<std::vector<double>> out;
  for (double x : v) {
    if (out.empty() || x - out.back().back() >= gap) out.emplace_back();
    out.back().push_back(x);
  }
  return out;
}

// Greedy count of levels at least `sep` apart.
int levels(std::vector<double> v, double sep) {
  std::sort(v.begin(), v.end());
  int n = 0;
  double last = -1e300;
  for (double x : v) {
    if (x - last >= sep) {
      ++n;
      last = x;
    }
  }
  return n;
}

Outcome criterion_10(const SweepRun& run) {
  const auto c = cells(run.records);
  // Protected points only: lambda = 0 is the shared unprotected baseline.
  std::vector<double> vclub, renyi;
  for (const auto& [l, cell] : c.at("vclub-s"))
    if (l > 0.0) vclub.push_back(cell.attacker);
  for (const auto& [l, cell] : c.at("renyi:1.5"))
    if (l > 0.0) renyi.push_back(cell.attacker);
  const auto vb = bands(vclub, tol::kBandGap);
  const int rl = levels(renyi, tol::kLevelSeparation);
  std::string desc;
  for (const auto& b : vb) desc += "[" + fmt(b.front(), 3) + ", " + fmt(b.back(), 3) + "] ";
  return {vb.size() == 2 && rl >= tol::kMinRenyiLevels,
          "vCLUB-S bands " + desc + "(" + std::to_string(vb.size()) + "), Renyi levels " + std::to_string(rl) +
              " | vCLUB-S [" + curve(c.at("vclub-s")) + "]"};
}

Outcome criterion_9(const SweepRun& run) {
  const auto c = cells(run.records);
  const auto& adv = c.at("advce");
  const auto& kl = c.at("kl");
  const auto& renyi = c.at("renyi:1.5");
  std::string desc;
  bool found = false;
  for (const auto& [l, cell] : adv) {
    if (l <= 0.0 || l > tol::kCollapseMaxLambda) continue;
    const double adv_drop = adv.at(0.0).task - cell.task;
    const double kl_drop = kl.at(0.0).task - kl.at(l).task;
    const double r_drop = renyi.at(0.0).task - renyi.at(l).task;
    desc += " lambda " + fmt(l) + ": advce drop " + fmt(adv_drop, 3) + (cell.any_failed ? " (non-finite)" : "") +
            ", kl " + fmt(kl_drop, 3) + ", renyi " + fmt(r_drop, 3) + ";";
    const bool collapsed = adv_drop > tol::kCollapseDrop || cell.any_failed;
    if (collapsed && kl_drop < tol::kStableDrop && r_drop < tol::kStableDrop) found = true;
  }
  return {found && run.seconds < tol::kDegeneracySeconds, fmt(run.seconds, 4) + " s |" + desc};
}

// Every subcommand twice into fresh directories; stdout and files compared.
Outcome criterion_11() {
  const fs::path root = fs::temp_directory_path() / "disent_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string joint = std::string(DISENT_DATA_DIR) + "/joint_2x2.json";
  write_text_file((root / "sweep.json").string(), R"({
    "lambdas": [0, 1], "estimators": ["kl", "vclub-s"], "seeds": [1, 2], "encoder_steps": 20,
    "hidden": 16, "latent_dim": 4, "batch_size": 16, "unroll": 2, "n_encoder": 200, "n_aux": 200,
    "n_test": 200, "attacker_steps": 50, "attacker_hidden": 16, "probe_seeds": 2})");
  write_text_file((root / "train.json").string(), R"({
    "lambda": 1, "estimator": "renyi:1.5", "seed": 3, "encoder_steps": 30, "hidden": 16,
    "latent_dim": 4, "batch_size": 16, "unroll": 2, "n_encoder": 200, "n_aux": 200, "n_test": 200})");
  {
    Rng rng(11);
    write_text_file((root / "batch.json").string(), to_json(sample_joint(example_joint(), 500, rng)).dump());
    write_text_file((root / "cls.json").string(),
                    to_json(testing::table_classifier(ConditionalTable::uniform(2, 2))).dump());
    write_text_file((root / "critic.json").string(), to_json(RatioCritic::identity(2, 2)).dump());
  }
  const auto r = [&](const char* f) { return (root / f).string(); };
  auto invocations = [&](const std::string& out, const std::string& threads) {
    return std::vector<std::vector<std::string>>{
        {"oracle", joint, "--out", out + "/oracle"},
        {"oracle", joint, "--units", "bits", "--out", out + "/oracle_bits"},
        {"estimate", "--batch", r("batch.json"), "--classifier", r("cls.json"), "--critic", r("critic.json"),
         "--estimator", "renyi:1.5", "--out", out + "/estimate"},
        {"estimate", "--batch", r("batch.json"), "--classifier", r("cls.json"), "--estimator", "vclub-s",
         "--seed", "4", "--out", out + "/estimate_vclub"},
        {"train", "--config", r("train.json"), "--out", out + "/train"},
        {"sweep", "--config", r("sweep.json"), "--threads", threads, "--out", out + "/sweep"},
        {"report", out + "/sweep/records.csv", "--out", out + "/report"},
    };
  };
  std::vector<std::string> mismatches;
  std::vector<std::string> stdout_a;
  std::size_t files = 0;
  for (const auto& [pass, threads] : {std::pair{"a", "1"}, std::pair{"b", "2"}}) {
    const auto runs = invocations((root / pass).string(), threads);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      std::ostringstream o, e;
      if (run_cli(runs[i], o, e) != 0) return {false, runs[i][0] + " failed: " + e.str()};
      if (std::string(pass) == "a") {
        stdout_a.push_back(o.str());
      } else if (stdout_a[i] != o.str()) {
        mismatches.push_back("stdout of " + runs[i][0] + " #" + std::to_string(i));
      }
    }
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    const auto other = root / "b" / rel;
    ++files;
    if (!fs::exists(other) || read_text_file(entry.path().string()) != read_text_file(other.string())) {
      mismatches.push_back(rel.string());
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(files) + " files and " + std::to_string(stdout_a.size()) + " stdout streams compared";
  for (const auto& m : mismatches) detail += ", differs: " + m;
  return {mismatches.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disent acceptance suite"};
  std::vector<int> selected{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::string records;
  app.add_option("--criteria", selected, "criteria to run")->delimiter(',');
  app.add_option("--records", records, "write the sweep records of 8/10 or 9 here");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want(selected.begin(), selected.end());

  bool all = true;
  auto report = [&](int n, const std::string& title, const std::function<Outcome()>& f) {
    if (!want.count(n)) return;
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << title << ": " << o.detail << std::endl;
  };

  report(1, "oracle identity suite", criterion_1);
  report(2, "bound tightness and ordering", criterion_2);
  report(3, "cross-entropy lower relation", criterion_3);
  report(4, "contrastive bound with true conditional", criterion_4);
  report(5, "sample surrogate consistency", criterion_5);
  report(6, "density-ratio fidelity", criterion_6);
  report(7, "gradient checks", criterion_7);
  if (want.count(8) || want.count(10)) {
    SweepRun run;
    std::string error;
    try {
      run = run_config("acceptance_tradeoff.json", records);
    } catch (const std::exception& e) {
      error = e.what();
    }
    auto guarded = [&](auto f) {
      return [&, f]() { return error.empty() ? f(run) : Outcome{false, "sweep failed: " + error}; };
    };
    report(8, "fairness trade-off shape", guarded(criterion_8));
    report(10, "vCLUB-S two regimes", guarded(criterion_10));
  }
  if (want.count(9)) {
    SweepRun run;
    std::string error;
    try {
      run = run_config("acceptance_degeneracy.json", records);
    } catch (const std::exception& e) {
      error = e.what();
    }
    report(9, "multi-class adversarial degeneracy",
           [&]() { return error.empty() ? criterion_9(run) : Outcome{false, "sweep failed: " + error}; });
  }
  report(11, "CLI determinism", criterion_11);
  return all ? 0 : 1;
}
