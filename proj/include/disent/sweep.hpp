#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "disent/eval.hpp"
#include "disent/prob.hpp"
#include "disent/train.hpp"

namespace disent {

inline constexpr int kRecordSchemaVersion = 1;

struct SweepConfig {
  std::vector<double> lambdas{0.0};
  std::vector<EstimatorSpec> estimators{EstimatorSpec::kl()};
  std::vector<std::uint64_t> seeds{0};
  TrainingConfig base;  // lambda, estimator and seed are overwritten per point

  std::size_t n_encoder = 4000;  // D
  std::size_t n_aux = 4000;      // D'
  std::size_t n_test = 2000;
  double leak = 1.0;
  int attr_classes = 2;
  SyntheticParams synthetic;

  AttackerConfig attacker;
  int probe_seeds = 3;
  double collapse_drop = 0.2;  // task-accuracy drop from the lambda = 0 row that flags a collapse

  void validate() const;
};

struct TradeoffRecord {
  std::string estimator;  // EstimatorSpec::name()
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double task_accuracy = 0.0;
  double attacker_accuracy = 0.0;     // mean over probe seeds
  double attacker_accuracy_sd = 0.0;  // spread over probe seeds
  double surrogate_mi = 0.0;          // the estimator's own value on the test split, nats
  std::string status = "ok";          // ok | diverged | error
  int diverged_step = -1;
  bool collapsed = false;
  double wall_seconds = 0.0;  // not part of the deterministic CSV
};

struct SweepData {
  TaskData encoder_split;
  TaskData aux_split;
  TaskData test;
};

// D, D' and the test split for one seed. Shared by every (estimator, lambda).
SweepData make_sweep_data(const SweepConfig& config, std::uint64_t seed);

TradeoffRecord run_point(const SweepConfig& config, const SweepData& data,
                         const EstimatorSpec& estimator, double lambda, std::uint64_t seed);

// Every (estimator, lambda, seed) triple exactly once, sorted by
// (estimator, lambda, seed). Points run on an OpenMP work queue.
std::vector<TradeoffRecord> sweep(const SweepConfig& config);
// Same records computed one point at a time.
std::vector<TradeoffRecord> sweep_serial(const SweepConfig& config);

// Marks records whose task accuracy fell more than `drop` below the
// lambda = 0 record of the same (estimator, seed).
void flag_collapses(std::vector<TradeoffRecord>& records, double drop);

void write_records_csv(std::ostream& os, const std::vector<TradeoffRecord>& records,
                       const std::string& provenance);
void write_timings_csv(std::ostream& os, const std::vector<TradeoffRecord>& records);
// Skips '#' lines; throws ValidationError on a malformed row or unknown schema.
std::vector<TradeoffRecord> read_records_csv(std::istream& is);

struct SummaryRow {
  std::string estimator;
  double lambda = 0.0;
  std::size_t runs = 0;
  double task_mean = 0.0, task_sd = 0.0;
  double attacker_mean = 0.0, attacker_sd = 0.0;
  double surrogate_mean = 0.0;
  std::size_t failed = 0;
  std::size_t collapsed = 0;
};

std::vector<SummaryRow> summarize(const std::vector<TradeoffRecord>& records);
void write_summary_table(std::ostream& os, const std::vector<SummaryRow>& rows);
// gnuplot script with inline data: attacker accuracy and task accuracy vs lambda.
void write_plot_script(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace disent
