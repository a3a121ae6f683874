#include "disent/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include "disent/errors.hpp"
#include "disent/kernels.hpp"
#include "disent/serialize.hpp"

namespace disent {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string units = "nats";
  int threads = 0;
  bool check_config = false;
};

struct Manifest {
  Json body;
  std::string hash;
};

// Output directories are not part of the manifest, so the same request
// written to two places produces identical files.
Manifest make_manifest(const std::string& subcommand, Json config, Json inputs,
                       std::optional<std::uint64_t> seed) {
  Manifest m;
  m.body = {{"tool", kToolName},
            {"version", kToolVersion},
            {"subcommand", subcommand},
            {"config", std::move(config)},
            {"inputs", std::move(inputs)},
            {"seed", seed ? Json(*seed) : Json(nullptr)}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(m.body.dump())));
  m.hash = buf;
  m.body["hash"] = m.hash;
  return m;
}

std::string file_digest(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(read_text_file(path))));
  return buf;
}

double units_scale(const std::string& units) {
  return units == "bits" ? 1.0 / std::numbers::ln2 : 1.0;
}

void add_globals(CLI::App* app, GlobalOptions& g) {
  app->add_option("--config", g.config, "configuration file (JSON)");
  app->add_option("--seed", g.seed, "seed for all randomness");
  app->add_option("--out", g.out, "output directory");
  app->add_option("--units", g.units, "information units")->check(CLI::IsMember({"nats", "bits"}));
  app->add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--check-config", g.check_config, "validate the configuration and exit");
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out", "an output directory is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ValidationError("cannot create output directory '" + out + "': " + ec.message());
}

void write_json(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

SweepConfig load_experiment(const GlobalOptions& g, ConfigMode mode) {
  Json j = Json::object();
  if (!g.config.empty()) j = read_json_file(g.config);
  SweepConfig c = experiment_config_from_json(j, mode);
  if (g.seed) c.seeds = {*g.seed};
  return c;
}

int cmd_oracle(const GlobalOptions& g, const std::string& joint_path, const std::string& q_path,
               const std::vector<double>& alphas, std::ostream& out) {
  if (joint_path.empty()) throw ConfigError("--joint", "a joint JSON file is required");
  const DiscreteJoint joint = joint_from_json(read_json_file(joint_path));
  const ConditionalTable q = q_path.empty()
                                 ? ConditionalTable::uniform(joint.z_size(), joint.y_size())
                                 : conditional_from_json(read_json_file(q_path));
  for (double a : alphas) {
    if (!(a > 1.0)) throw DomainError("renyi: alpha must be > 1");
  }
  Json inputs = {{"joint", file_digest(joint_path)},
                 {"q", q_path.empty() ? Json("uniform") : Json(file_digest(q_path))}};
  const Manifest m = make_manifest("oracle", {{"alphas", alphas}, {"units", g.units}}, inputs, g.seed);
  Json report = to_json(info_report(joint, q, alphas), units_scale(g.units));
  const double scale = units_scale(g.units);
  EstimatorSpec kl = EstimatorSpec::kl();
  report["bound_kl"] = exact_bound_rhs(joint, q, kl) * scale;
  report["units"] = g.units;
  report["version"] = kToolVersion;
  report["manifest"] = m.hash;
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (!g.out.empty()) {
    ensure_out_dir(g.out);
    write_text_file((fs::path(g.out) / "oracle.json").string(), text);
  }
  return 0;
}

struct EstimateArgs {
  std::string batch, classifier, critic, estimator = "kl", weighting = "empirical";
  std::optional<double> alpha, clamp_eps;
};

int cmd_estimate(const GlobalOptions& g, const EstimateArgs& a, std::ostream& out) {
  if (a.batch.empty()) throw ConfigError("--batch", "a batch JSON file is required");
  if (a.classifier.empty()) throw ConfigError("--classifier", "a classifier checkpoint is required");
  EstimatorSpec spec = EstimatorSpec::parse(a.estimator);
  if (a.alpha) {
    if (spec.kind != EstimatorKind::Renyi) throw ConfigError("--alpha", "only valid with renyi");
    spec.alpha = *a.alpha;
  }
  if (a.clamp_eps) spec.ratio_clamp_eps = *a.clamp_eps;
  spec.entropy_weighting = parse_entropy_weighting(a.weighting);
  spec.validate();

  const LabeledBatch batch = batch_from_json(read_json_file(a.batch));
  const Mlp classifier = mlp_from_json(read_json_file(a.classifier));
  Json inputs = {{"batch", file_digest(a.batch)}, {"classifier", file_digest(a.classifier)}};
  if (!a.critic.empty()) inputs["critic"] = file_digest(a.critic);
  const Manifest m = make_manifest(
      "estimate",
      {{"estimator", spec.name()},
       {"ratio_clamp_eps", spec.ratio_clamp_eps},
       {"entropy_weighting", to_string(spec.entropy_weighting)},
       {"units", g.units}},
      inputs, g.seed);

  const double scale = units_scale(g.units);
  Json result = {{"estimator", spec.name()}, {"n", batch.size()}};
  switch (spec.kind) {
    case EstimatorKind::KL:
    case EstimatorKind::Renyi: {
      if (a.critic.empty()) throw ConfigError("--critic", "KL and Renyi estimates need a critic checkpoint");
      const RatioCritic critic = critic_from_json(read_json_file(a.critic));
      const SurrogateEstimate s = estimate_mi_surrogate(batch, classifier, critic, spec);
      result["value"] = s.value * scale;
      result["entropy_term"] = s.entropy_term * scale;
      result["ce_term"] = s.ce_term * scale;
      result["correction_term"] = s.correction_term * scale;
      break;
    }
    case EstimatorKind::VClubS: {
      Rng rng = Rng(g.seed.value_or(0)).split("estimate-vclub");
      result["value"] = estimate_vclub_s(batch, classifier, rng) * scale;
      break;
    }
    case EstimatorKind::AdvCE: {
      const double ce = adversarial_ce_term(batch, classifier).ce;
      const Vec f = batch.label_frequencies();
      double h = 0.0;
      for (Eigen::Index k = 0; k < f.size(); ++k) {
        if (f(k) > 0.0) h -= f(k) * std::log(f(k));
      }
      result["ce_term"] = ce * scale;
      result["entropy_term"] = h * scale;
      result["value"] = (h - ce) * scale;
      break;
    }
  }
  result["units"] = g.units;
  result["version"] = kToolVersion;
  result["manifest"] = m.hash;
  const std::string text = result.dump(2) + "\n";
  out << text;
  if (!g.out.empty()) {
    ensure_out_dir(g.out);
    write_text_file((fs::path(g.out) / "estimate.json").string(), text);
  }
  return 0;
}

int cmd_train(const GlobalOptions& g, std::ostream& out) {
  const SweepConfig c = load_experiment(g, ConfigMode::Train);
  const Json canonical = to_json(c, ConfigMode::Train);
  if (g.check_config) {
    out << Json({{"ok", true}, {"config", canonical}}).dump(2) << "\n";
    return 0;
  }
  ensure_out_dir(g.out);
  const Manifest m = make_manifest("train", canonical, Json::object(), c.seeds.front());

  const SweepData data = make_sweep_data(c, c.seeds.front());
  TrainingConfig tc = c.base;
  tc.lambda = c.lambdas.front();
  tc.estimator = c.estimators.front();
  tc.seed = c.seeds.front();
  const TrainingResult result = train(data.encoder_split, data.aux_split, tc);

  const fs::path dir(g.out);
  auto checkpoint = [&](const char* name, Json j) {
    j["manifest"] = m.hash;
    write_json((dir / name).string(), j);
  };
  checkpoint("encoder.json", to_json(result.models.encoder));
  checkpoint("classifier.json", to_json(result.models.classifier));
  checkpoint("critic.json", to_json(result.models.critic));
  checkpoint("decoder.json", to_json(result.models.decoder));

  std::ostringstream log;
  log << "# disent-train-log manifest=" << m.hash << " version=" << kToolVersion << "\n";
  log << "step,task_loss,attr_ce,critic_loss,surrogate_value\n";
  log.precision(17);
  for (const auto& r : result.log) {
    log << r.step << ',' << r.task_loss << ',' << r.attr_ce << ',' << r.critic_loss << ','
        << r.surrogate_value << '\n';
  }
  write_text_file((dir / "log.csv").string(), log.str());
  write_json((dir / "manifest.json").string(), m.body);

  Json summary = {{"steps", result.log.size()},
                  {"diverged", result.diverged},
                  {"diverged_step", result.diverged_step},
                  {"task_accuracy", task_accuracy(result.models.encoder, result.models.decoder, data.test)},
                  {"manifest", m.hash}};
  if (result.diverged) summary["error"] = result.error;
  write_json((dir / "summary.json").string(), summary);
  out << summary.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const GlobalOptions& g, bool timings, std::ostream& out) {
  const SweepConfig c = load_experiment(g, ConfigMode::Sweep);
  const Json canonical = to_json(c, ConfigMode::Sweep);
  if (g.check_config) {
    out << Json({{"ok", true}, {"config", canonical}}).dump(2) << "\n";
    return 0;
  }
  ensure_out_dir(g.out);
  const Manifest m = make_manifest("sweep", canonical, Json::object(), g.seed);
  const auto records = sweep(c);
  std::ostringstream csv;
  write_records_csv(csv, records, std::string("version=") + kToolVersion + " manifest=" + m.hash);
  const fs::path dir(g.out);
  write_text_file((dir / "records.csv").string(), csv.str());
  if (timings) {
    // Wall-clock times differ run to run, so they stay out of records.csv.
    std::ostringstream t;
    write_timings_csv(t, records);
    write_text_file((dir / "timings.csv").string(), t.str());
  }
  write_json((dir / "manifest.json").string(), m.body);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.status != "ok";
  out << Json({{"records", records.size()}, {"failed", failed}, {"manifest", m.hash}}).dump(2) << "\n";
  return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& records_path, std::ostream& out) {
  if (records_path.empty()) throw ConfigError("--records", "a records CSV file is required");
  std::istringstream in(read_text_file(records_path));
  const auto rows = summarize(read_records_csv(in));
  const Manifest m = make_manifest("report", Json::object(), {{"records", file_digest(records_path)}}, g.seed);
  std::ostringstream table;
  table << "<!-- disent report version=" << kToolVersion << " manifest=" << m.hash << " -->\n";
  write_summary_table(table, rows);
  std::ostringstream plot;
  plot << "# disent report version=" << kToolVersion << " manifest=" << m.hash << "\n";
  write_plot_script(plot, rows);
  out << table.str();
  if (!g.out.empty()) {
    ensure_out_dir(g.out);
    const fs::path dir(g.out);
    write_text_file((dir / "summary.md").string(), table.str());
    write_text_file((dir / "plot.gp").string(), plot.str());
  }
  return 0;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message,
                 const std::string& key = "") {
  Json e = {{"kind", kind}, {"message", message}};
  if (!key.empty()) e["key"] = key;
  err << Json({{"error", e}}).dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mutual-information surrogates for disentangled representations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  std::string joint_path, q_path, records_path;
  std::vector<double> alphas{1.3, 1.5, 1.8};
  EstimateArgs est;

  auto* oracle = app.add_subcommand("oracle", "exact information quantities of a joint");
  add_globals(oracle, g);
  oracle->add_option("joint,--joint", joint_path, "joint distribution JSON");
  oracle->add_option("--q", q_path, "conditional table JSON (default: uniform)");
  oracle->add_option("--alphas", alphas, "Renyi orders");

  auto* estimate = app.add_subcommand("estimate", "sample estimate of an MI surrogate");
  add_globals(estimate, g);
  estimate->add_option("--batch", est.batch, "batch JSON (representations and labels)");
  estimate->add_option("--classifier", est.classifier, "classifier checkpoint");
  estimate->add_option("--critic", est.critic, "ratio critic checkpoint");
  estimate->add_option("--estimator", est.estimator, "kl | renyi[:alpha] | vclub-s | advce");
  estimate->add_option("--alpha", est.alpha, "Renyi order (> 1)");
  estimate->add_option("--clamp-eps", est.clamp_eps, "sigmoid clamp of the ratio critic");
  estimate->add_option("--entropy-weighting", est.weighting, "empirical | uniform-classes");

  auto* train_cmd = app.add_subcommand("train", "train encoder, classifier, critic and task head");
  add_globals(train_cmd, g);
  auto* sweep_cmd = app.add_subcommand("sweep", "lambda x estimator x seed trade-off sweep");
  add_globals(sweep_cmd, g);
  bool timings = false;
  sweep_cmd->add_flag("--timings", timings, "also write per-point wall-clock seconds to timings.csv");
  auto* report = app.add_subcommand("report", "summary table and plot script from sweep records");
  add_globals(report, g);
  report->add_option("records,--records", records_path, "records CSV from sweep");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what());
    return 2;
  }

  try {
    kernels::set_threads(g.threads);
    if (*oracle) return cmd_oracle(g, joint_path, q_path, alphas, out);
    if (*estimate) return cmd_estimate(g, est, out);
    if (*train_cmd) return cmd_train(g, out);
    if (*sweep_cmd) return cmd_sweep(g, timings, out);
    if (*report) return cmd_report(g, records_path, out);
  } catch (const ConfigError& e) {
    write_error(err, "usage", e.what(), e.key());
    return 2;
  } catch (const Error& e) {
    write_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what());
    return 1;
  }
  write_error(err, "usage", "no subcommand");
  return 2;
}

}  // namespace disent
