#include "disent/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "disent/errors.hpp"

namespace disent {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

TaskData concat(const TaskData& a, const TaskData& b) {
  TaskData out;
  out.attr_classes = a.attr_classes;
  out.target_classes = a.target_classes;
  out.x.resize(a.x.rows() + b.x.rows(), a.x.cols());
  out.x.topRows(a.x.rows()) = a.x;
  out.x.bottomRows(b.x.rows()) = b.x;
  out.l = a.l;
  out.l.insert(out.l.end(), b.l.begin(), b.l.end());
  out.y = a.y;
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  return out;
}

double empirical_entropy(std::span<const int> labels, int k) {
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / static_cast<double>(labels.size());
      h -= p * std::log(p);
    }
  }
  return h;
}

bool record_less(const TradeoffRecord& a, const TradeoffRecord& b) {
  if (a.estimator != b.estimator) return a.estimator < b.estimator;
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  return a.seed < b.seed;
}

struct Point {
  const EstimatorSpec* estimator;
  double lambda;
  std::uint64_t seed;
  std::size_t seed_index;
};

std::vector<Point> enumerate_points(const SweepConfig& config) {
  std::vector<Point> points;
  for (const auto& e : config.estimators)
    for (double l : config.lambdas)
      for (std::size_t s = 0; s < config.seeds.size(); ++s)
        points.push_back({&e, l, config.seeds[s], s});
  return points;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError("records csv: bad number '" + s + "' in column " + column);
  }
  return v;
}

const char* kCsvHeader =
    "estimator,lambda,seed,task_accuracy,attacker_accuracy,attacker_accuracy_sd,surrogate_mi,"
    "status,diverged_step,collapsed";

}  // namespace

void SweepConfig::validate() const {
  if (lambdas.empty()) throw ValidationError("sweep: lambda grid must be nonempty");
  if (estimators.empty()) throw ValidationError("sweep: estimator list must be nonempty");
  if (seeds.empty()) throw ValidationError("sweep: seed list must be nonempty");
  for (double l : lambdas) {
    if (!std::isfinite(l) || l < 0.0) throw ValidationError("sweep: lambdas must be finite and >= 0");
  }
  for (const auto& e : estimators) e.validate();
  if (n_encoder < 2 || n_aux < 2 || n_test < 1) throw ValidationError("sweep: split sizes too small");
  if (attr_classes < 2) throw ValidationError("sweep: attr_classes must be >= 2");
  if (!(leak >= 0.0 && leak <= 1.0)) throw ValidationError("sweep: leak must be in [0, 1]");
  if (probe_seeds < 1) throw ValidationError("sweep: probe_seeds must be >= 1");
  if (attacker.steps < 0 || attacker.batch_size < 1) throw ValidationError("sweep: bad attacker budget");
  TrainingConfig probe = base;
  probe.estimator = estimators.front();
  probe.validate();
}

SweepData make_sweep_data(const SweepConfig& config, std::uint64_t seed) {
  Rng data = Rng(seed).split("data");
  Rng r_enc = data.split("encoder-split");
  Rng r_aux = data.split("aux-split");
  Rng r_test = data.split("test-split");
  const int k = config.attr_classes;
  return {pack(generate_synthetic_task(config.n_encoder, config.leak, k, r_enc, config.synthetic), k),
          pack(generate_synthetic_task(config.n_aux, config.leak, k, r_aux, config.synthetic), k),
          pack(generate_synthetic_task(config.n_test, config.leak, k, r_test, config.synthetic), k)};
}

TradeoffRecord run_point(const SweepConfig& config, const SweepData& data,
                         const EstimatorSpec& estimator, double lambda, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  TradeoffRecord rec;
  rec.estimator = estimator.name();
  rec.lambda = lambda;
  rec.seed = seed;

  TrainingConfig tc = config.base;
  tc.lambda = lambda;
  tc.estimator = estimator;
  tc.seed = seed;
  try {
    TrainingResult result = train(data.encoder_split, data.aux_split, tc);
    if (result.diverged) {
      rec.status = "diverged";
      rec.diverged_step = result.diverged_step;
    }
    const ModelBundle& m = result.models;
    rec.task_accuracy = task_accuracy(m.encoder, m.decoder, data.test);

    const TaskData attacker_train = concat(data.encoder_split, data.aux_split);
    const Mat z_train = m.encoder.infer(attacker_train.x);
    const Mat z_test = m.encoder.infer(data.test.x);
    Rng attack = Rng(seed).split("attacker");
    std::vector<double> accs;
    for (int p = 0; p < config.probe_seeds; ++p) {
      Rng probe = attack.split(static_cast<std::uint64_t>(p));
      accs.push_back(probe_accuracy(z_train, attacker_train.y, z_test, data.test.y,
                                    config.attr_classes, probe, config.attacker));
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    rec.attacker_accuracy = mean;
    rec.attacker_accuracy_sd =
        accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;

    const LabeledBatch test_batch{z_test, data.test.y, config.attr_classes};
    switch (estimator.kind) {
      case EstimatorKind::KL:
      case EstimatorKind::Renyi:
        rec.surrogate_mi = m.critic.ready
                               ? estimate_mi_surrogate(test_batch, m.classifier, m.critic, estimator).value
                               : std::nan("");
        break;
      case EstimatorKind::VClubS: {
        Rng perm = Rng(seed).split("eval-vclub");
        rec.surrogate_mi = estimate_vclub_s(test_batch, m.classifier, perm);
        break;
      }
      case EstimatorKind::AdvCE:
        rec.surrogate_mi = empirical_entropy(data.test.y, config.attr_classes) -
                           adversarial_ce_term(test_batch, m.classifier).ce;
        break;
    }
  } catch (const Error& e) {
    rec.status = "error";
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void flag_collapses(std::vector<TradeoffRecord>& records, double drop) {
  std::map<std::pair<std::string, std::uint64_t>, double> baseline;
  for (const auto& r : records) {
    if (r.lambda == 0.0 && r.status == "ok") baseline[{r.estimator, r.seed}] = r.task_accuracy;
  }
  for (auto& r : records) {
    const auto it = baseline.find({r.estimator, r.seed});
    const bool dropped = it != baseline.end() && it->second - r.task_accuracy > drop;
    r.collapsed = dropped || r.status != "ok";
  }
}

std::vector<TradeoffRecord> sweep(const SweepConfig& config) {
  config.validate();
  std::vector<SweepData> data(config.seeds.size());
  const auto n_seeds = static_cast<std::int64_t>(config.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t s = 0; s < n_seeds; ++s) {
    data[static_cast<std::size_t>(s)] = make_sweep_data(config, config.seeds[static_cast<std::size_t>(s)]);
  }
  const std::vector<Point> points = enumerate_points(config);
  std::vector<TradeoffRecord> records(points.size());
  const auto n_points = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n_points; ++i) {
    const Point& p = points[static_cast<std::size_t>(i)];
    records[static_cast<std::size_t>(i)] =
        run_point(config, data[p.seed_index], *p.estimator, p.lambda, p.seed);
  }
  std::sort(records.begin(), records.end(), record_less);
  flag_collapses(records, config.collapse_drop);
  return records;
}

std::vector<TradeoffRecord> sweep_serial(const SweepConfig& config) {
  config.validate();
  std::vector<SweepData> data;
  for (auto seed : config.seeds) data.push_back(make_sweep_data(config, seed));
  std::vector<TradeoffRecord> records;
  for (const Point& p : enumerate_points(config)) {
    records.push_back(run_point(config, data[p.seed_index], *p.estimator, p.lambda, p.seed));
  }
  std::sort(records.begin(), records.end(), record_less);
  flag_collapses(records, config.collapse_drop);
  return records;
}

void write_records_csv(std::ostream& os, const std::vector<TradeoffRecord>& records,
                       const std::string& provenance) {
  os << "# disent-records schema=" << kRecordSchemaVersion;
  if (!provenance.empty()) os << ' ' << provenance;
  os << '\n' << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.estimator << ',' << fmt_double(r.lambda) << ',' << r.seed << ','
       << fmt_double(r.task_accuracy) << ',' << fmt_double(r.attacker_accuracy) << ','
       << fmt_double(r.attacker_accuracy_sd) << ',' << fmt_double(r.surrogate_mi) << ','
       << r.status << ',' << r.diverged_step << ',' << (r.collapsed ? 1 : 0) << '\n';
  }
}

void write_timings_csv(std::ostream& os, const std::vector<TradeoffRecord>& records) {
  os << "estimator,lambda,seed,wall_seconds\n";
  for (const auto& r : records) {
    os << r.estimator << ',' << fmt_double(r.lambda) << ',' << r.seed << ','
       << fmt_fixed(r.wall_seconds, 3) << '\n';
  }
}

std::vector<TradeoffRecord> read_records_csv(std::istream& is) {
  std::vector<TradeoffRecord> out;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("schema=");
      if (pos != std::string::npos) {
        const int schema = std::atoi(line.c_str() + pos + 7);
        if (schema != kRecordSchemaVersion) {
          throw ValidationError("records csv: unsupported schema " + std::to_string(schema));
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw ValidationError("records csv: unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw ValidationError("records csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(f.size()) + " fields, expected 10");
    }
    TradeoffRecord r;
    r.estimator = f[0];
    r.lambda = parse_double(f[1], "lambda");
    r.seed = std::stoull(f[2]);
    r.task_accuracy = parse_double(f[3], "task_accuracy");
    r.attacker_accuracy = parse_double(f[4], "attacker_accuracy");
    r.attacker_accuracy_sd = parse_double(f[5], "attacker_accuracy_sd");
    r.surrogate_mi = parse_double(f[6], "surrogate_mi");
    r.status = f[7];
    r.diverged_step = static_cast<int>(parse_double(f[8], "diverged_step"));
    r.collapsed = f[9] == "1";
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ValidationError("records csv: missing header");
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TradeoffRecord>& records) {
  std::map<std::pair<std::string, double>, std::vector<const TradeoffRecord*>> groups;
  for (const auto& r : records) groups[{r.estimator, r.lambda}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    SummaryRow s;
    s.estimator = key.first;
    s.lambda = key.second;
    s.runs = group.size();
    for (const auto* r : group) {
      s.task_mean += r->task_accuracy;
      s.attacker_mean += r->attacker_accuracy;
      s.surrogate_mean += r->surrogate_mi;
      s.failed += r->status != "ok";
      s.collapsed += r->collapsed;
    }
    const double n = static_cast<double>(group.size());
    s.task_mean /= n;
    s.attacker_mean /= n;
    s.surrogate_mean /= n;
    if (group.size() > 1) {
      for (const auto* r : group) {
        s.task_sd += (r->task_accuracy - s.task_mean) * (r->task_accuracy - s.task_mean);
        s.attacker_sd +=
            (r->attacker_accuracy - s.attacker_mean) * (r->attacker_accuracy - s.attacker_mean);
      }
      s.task_sd = std::sqrt(s.task_sd / (n - 1.0));
      s.attacker_sd = std::sqrt(s.attacker_sd / (n - 1.0));
    }
    rows.push_back(s);
  }
  return rows;
}

void write_summary_table(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "| estimator | lambda | runs | task acc | task sd | attacker acc | attacker sd | "
        "surrogate MI | failed | collapsed |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.estimator << " | " << fmt_double(r.lambda) << " | " << r.runs << " | "
       << fmt_fixed(r.task_mean) << " | " << fmt_fixed(r.task_sd) << " | "
       << fmt_fixed(r.attacker_mean) << " | " << fmt_fixed(r.attacker_sd) << " | "
       << fmt_fixed(r.surrogate_mean) << " | " << r.failed << " | " << r.collapsed << " |\n";
  }
}

void write_plot_script(std::ostream& os, const std::vector<SummaryRow>& rows) {
  std::vector<std::string> estimators;
  for (const auto& r : rows) {
    if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end()) {
      estimators.push_back(r.estimator);
    }
  }
  os << "# gnuplot script: attacker accuracy and task accuracy against lambda\n";
  os << "# columns: lambda mean sd\n";
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (const char* metric : {"attacker", "task"}) {
      os << "$" << metric << e << " << EOD\n";
      for (const auto& r : rows) {
        if (r.estimator != estimators[e]) continue;
        const bool att = std::string(metric) == "attacker";
        os << fmt_double(r.lambda) << ' ' << fmt_double(att ? r.attacker_mean : r.task_mean) << ' '
           << fmt_double(att ? r.attacker_sd : r.task_sd) << '\n';
      }
      os << "EOD\n";
    }
  }
  os << "set terminal pngcairo size 1200,480\n";
  os << "set output 'tradeoff.png'\n";
  os << "set multiplot layout 1,2\n";
  os << "set xlabel 'lambda'\nset logscale x\nset key bottom left\n";
  for (const char* metric : {"attacker", "task"}) {
    os << "set title '" << metric << " accuracy'\nset ylabel 'accuracy'\nplot ";
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      if (e) os << ", ";
      os << "$" << metric << e << " using ($1 > 0 ? $1 : 1e-3):2:3 with yerrorlines title '"
         << estimators[e] << "'";
    }
    os << '\n';
  }
  os << "unset multiplot\n";
}

}  // namespace disent
