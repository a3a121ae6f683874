#include <gtest/gtest.h>

#include <sstream>

#include "disent/errors.hpp"
#include "disent/sweep.hpp"

using namespace disent;

namespace {

SweepConfig tiny() {
  SweepConfig c;
  c.lambdas = {1.0, 0.0};
  c.estimators = {EstimatorSpec::renyi(1.5), EstimatorSpec::kl()};
  c.seeds = {2, 1};
  c.base.encoder_steps = 10;
  c.base.hidden = 8;
  c.base.latent_dim = 4;
  c.base.batch_size = 16;
  c.base.unroll = 1;
  c.n_encoder = c.n_aux = c.n_test = 100;
  c.attacker.steps = 30;
  c.attacker.hidden = 8;
  c.probe_seeds = 2;
  return c;
}

}  // namespace

TEST(Sweep, CompleteSortedAndDeterministic) {
  const auto c = tiny();
  const auto a = sweep(c);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto& p = a[i - 1];
    const auto& q = a[i];
    EXPECT_TRUE(std::tie(p.estimator, p.lambda, p.seed) < std::tie(q.estimator, q.lambda, q.seed));
  }
  EXPECT_EQ(a.front().estimator, "kl");
  EXPECT_EQ(a.front().lambda, 0.0);
  const auto b = sweep_serial(c);
  std::ostringstream sa, sb;
  write_records_csv(sa, a, "test");
  write_records_csv(sb, b, "test");
  EXPECT_EQ(sa.str(), sb.str());
  for (const auto& r : a) {
    EXPECT_GE(r.task_accuracy, 0.0);
    EXPECT_LE(r.attacker_accuracy, 1.0);
    EXPECT_EQ(r.status, "ok");
  }
}

TEST(Sweep, SingleZeroLambdaIsBaseline) {
  auto c = tiny();
  c.lambdas = {0.0};
  c.estimators = {EstimatorSpec::kl()};
  c.seeds = {1};
  const auto r = sweep(c);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].collapsed);
}

TEST(Sweep, ConfigValidation) {
  auto c = tiny();
  c.lambdas.clear();
  EXPECT_THROW(c.validate(), ValidationError);
  c = tiny();
  c.lambdas.push_back(-1);
  EXPECT_THROW(c.validate(), ValidationError);
  c = tiny();
  c.attr_classes = 1;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Sweep, FlagCollapses) {
  std::vector<TradeoffRecord> r(3);
  r[0] = {"advce", 0.0, 1, 0.95, 0.9};
  r[1] = {"advce", 1.0, 1, 0.70, 0.5};
  r[2] = {"advce", 5.0, 1, 0.80, 0.5};
  r[2].status = "diverged";
  flag_collapses(r, 0.2);
  EXPECT_FALSE(r[0].collapsed);
  EXPECT_TRUE(r[1].collapsed);
  EXPECT_TRUE(r[2].collapsed);
}

TEST(Records, CsvRoundTrip) {
  std::vector<TradeoffRecord> r(2);
  r[0] = {"renyi:1.5", 0.1, 7, 0.9612345678901234, 0.51, 0.01, -0.25};
  r[1] = {"vclub-s", 10.0, 8, 0.5, 0.5, 0.0, 0.0};
  r[1].status = "diverged";
  r[1].diverged_step = 42;
  r[1].collapsed = true;
  std::ostringstream os;
  write_records_csv(os, r, "prov");
  EXPECT_EQ(os.str().rfind("# disent-records schema=1 prov\n", 0), 0u);
  std::istringstream is(os.str());
  const auto back = read_records_csv(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].task_accuracy, r[0].task_accuracy);
  EXPECT_EQ(back[0].lambda, 0.1);
  EXPECT_EQ(back[1].status, "diverged");
  EXPECT_EQ(back[1].diverged_step, 42);
  EXPECT_TRUE(back[1].collapsed);
}

TEST(Records, MalformedInput) {
  std::istringstream bad_schema("# disent-records schema=9\n");
  EXPECT_THROW(read_records_csv(bad_schema), ValidationError);
  std::istringstream short_row(
      "# disent-records schema=1\n"
      "estimator,lambda,seed,task_accuracy,attacker_accuracy,attacker_accuracy_sd,surrogate_mi,status,diverged_step,collapsed\n"
      "kl,0,1\n");
  EXPECT_THROW(read_records_csv(short_row), ValidationError);
  std::istringstream bad_number(
      "# disent-records schema=1\n"
      "estimator,lambda,seed,task_accuracy,attacker_accuracy,attacker_accuracy_sd,surrogate_mi,status,diverged_step,collapsed\n"
      "kl,zero,1,0.5,0.5,0,0,ok,-1,0\n");
  EXPECT_THROW(read_records_csv(bad_number), ValidationError);
}

TEST(Report, SummaryAndPlot) {
  std::vector<TradeoffRecord> r(3);
  r[0] = {"kl", 0.0, 1, 0.9, 0.8};
  r[1] = {"kl", 0.0, 2, 1.0, 0.6};
  r[2] = {"kl", 1.0, 1, 0.9, 0.5};
  const auto rows = summarize(r);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 2u);
  EXPECT_NEAR(rows[0].task_mean, 0.95, 1e-15);
  EXPECT_NEAR(rows[0].attacker_mean, 0.7, 1e-15);
  std::ostringstream table, plot;
  write_summary_table(table, rows);
  write_plot_script(plot, rows);
  EXPECT_NE(table.str().find("| kl |"), std::string::npos);
  EXPECT_NE(plot.str().find("attacker"), std::string::npos);
}
