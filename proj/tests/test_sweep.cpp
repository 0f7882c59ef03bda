#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "gdev/errors.hpp"
#include "gdev/stats.hpp"
#include "gdev/sweep.hpp"
#include "test_support.hpp"

using namespace gdev;
using gdev::testing::ConstantWorkload;
using gdev::testing::MockRuntime;

namespace {

SweepMatrix matrix(std::vector<int> threads, int reps = 3, int sweeps = 10) {
  SweepMatrix m;
  m.models = {"resnet18", "resnet50"};
  m.batch_sizes = {1, 2, 4, 8, 16};
  m.thread_counts = std::move(threads);
  m.repetitions = reps;
  m.sweep_count = sweeps;
  return m;
}

}  // namespace

TEST(PlanSweep, LegacyCardinality) {
  const auto plan = plan_sweep(matrix({1, 2, 3, 4}));
  EXPECT_EQ(plan.unique_configurations(), 40u);
  EXPECT_EQ(plan.configs.size(), 1200u);
}

TEST(PlanSweep, GraniteCardinality) {
  const auto plan = plan_sweep(matrix({1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 40, 48}));
  EXPECT_EQ(plan.unique_configurations(), 120u);
  EXPECT_EQ(plan.configs.size(), 3600u);
}

TEST(PlanSweep, Singleton) {
  SweepMatrix m;
  m.models = {"g"};
  m.batch_sizes = {1};
  m.thread_counts = {1};
  const auto plan = plan_sweep(m);
  ASSERT_EQ(plan.configs.size(), 1u);
  EXPECT_EQ(plan.configs[0], (RunConfig{"g", 1, 1, 1, 1, std::nullopt}));
}

TEST(PlanSweep, LoopNestOrder) {
  // Brute-force oracle: the nest written out directly.
  const auto m = matrix({1, 2}, 2, 2);
  std::vector<std::tuple<int, std::string, int, int, int>> expect;
  for (int s = 1; s <= 2; ++s)
    for (const auto& model : m.models)
      for (int t : m.thread_counts)
        for (int b : m.batch_sizes)
          for (int r = 1; r <= 2; ++r) expect.emplace_back(s, model, t, b, r);
  const auto plan = plan_sweep(m);
  ASSERT_EQ(plan.configs.size(), expect.size());
  std::set<std::tuple<int, std::string, int, int, int>> unique;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const auto& c = plan.configs[i];
    const auto got = std::make_tuple(c.sweep_index, c.model_id, c.threads, c.batch_size, c.repetition_index);
    EXPECT_EQ(got, expect[i]) << "index " << i;
    unique.insert(got);
  }
  EXPECT_EQ(unique.size(), plan.configs.size());
}

TEST(PlanSweep, PureAndValidating) {
  const auto m = matrix({1, 2, 4});
  const auto a = plan_sweep(m);
  const auto b = plan_sweep(m);
  EXPECT_EQ(a.configs, b.configs);
  auto bad = m;
  bad.thread_counts = {4, 2};
  EXPECT_THROW(plan_sweep(bad), InvalidPlan);
}

TEST(PlanSweep, CoreListAttached) {
  const auto plan = plan_sweep(matrix({1}, 1, 1), std::vector<int>{0, 1});
  for (const auto& c : plan.configs) EXPECT_EQ(c.core_list, (std::vector<int>{0, 1}));
}

TEST(ExecuteConfig, DefaultsAndConstantMock) {
  ConstantWorkload w(10.0);
  const RunConfig c{"m", 1, 1, 1, 1, std::nullopt};
  const auto r = execute_config(c, w, ExecutionOptions{});
  EXPECT_EQ(r.warmup_latencies_ms.size(), 20u);
  ASSERT_EQ(r.measured_latencies_ms.size(), 100u);
  for (double x : r.measured_latencies_ms) EXPECT_EQ(x, 10.0);
  EXPECT_EQ(r.config, c);
  EXPECT_LE(r.started, r.finished);
}

TEST(ExecuteConfig, ZeroWarmup) {
  ConstantWorkload w(1.0);
  ExecutionOptions o;
  o.warmup_iterations = 0;
  const auto r = execute_config({"m", 1, 1, 1, 1, std::nullopt}, w, o);
  EXPECT_TRUE(r.warmup_latencies_ms.empty());
  EXPECT_EQ(r.measured_latencies_ms.size(), 100u);
}

namespace {

class ShortWorkload : public Workload {
 public:
  std::vector<double> run_iterations(std::size_t n, Phase) override {
    return std::vector<double>(n > 0 ? n - 1 : 0, 1.0);
  }
};

class FailingWorkload : public Workload {
 public:
  std::vector<double> run_iterations(std::size_t, Phase) override {
    throw WorkloadFailure("diagnostic from workload");
  }
};

}  // namespace

TEST(ExecuteConfig, Errors) {
  const RunConfig c{"m", 1, 1, 1, 1, std::nullopt};
  ConstantWorkload slow(2000.0);
  ExecutionOptions o;
  o.iteration_timeout = std::chrono::seconds(1);
  EXPECT_THROW(execute_config(c, slow, o), Timeout);

  ShortWorkload short_w;
  EXPECT_THROW(execute_config(c, short_w, ExecutionOptions{}), ProtocolError);

  FailingWorkload failing;
  try {
    execute_config(c, failing, ExecutionOptions{});
    FAIL();
  } catch (const WorkloadFailure& e) {
    EXPECT_STREQ(e.what(), "diagnostic from workload");
  }
}

TEST(ExecuteSweep, FortyConfigs) {
  const auto plan = plan_sweep(matrix({1, 2, 3, 4}, 1, 1));
  MockRuntime rt;
  ExecutionOptions o;
  o.warmup_iterations = 1;
  o.measure_iterations = 3;
  const auto data = execute_sweep(plan, rt, o);
  ASSERT_EQ(data.records.size(), 40u);
  EXPECT_TRUE(data.failures.empty());
  for (std::size_t i = 0; i < plan.configs.size(); ++i) {
    EXPECT_EQ(data.records[i].config, plan.configs[i]);  // no orphans, plan order
    if (i > 0) EXPECT_GE(data.records[i].started, data.records[i - 1].finished);
  }
}

TEST(ExecuteSweep, EmptyPlan) {
  MockRuntime rt;
  const auto data = execute_sweep(SweepPlan{}, rt, ExecutionOptions{});
  EXPECT_TRUE(data.records.empty());
  EXPECT_TRUE(data.failures.empty());
}

TEST(ExecuteSweep, ContinueOnError) {
  const auto plan = plan_sweep(matrix({1, 2, 3, 4}, 1, 1));
  MockRuntime rt;
  rt.fail_at = {3};
  ExecutionOptions o;
  o.warmup_iterations = 0;
  o.measure_iterations = 2;
  o.continue_on_error = true;
  const auto data = execute_sweep(plan, rt, o);
  EXPECT_EQ(data.records.size(), 39u);
  ASSERT_EQ(data.failures.size(), 1u);
  EXPECT_EQ(data.failures[0].plan_index, 3u);
  EXPECT_EQ(data.failures[0].config, plan.configs[3]);
  EXPECT_EQ(data.failures[0].code, ErrorCode::WorkloadFailure);
}

TEST(ExecuteSweep, AbortsWithoutContinue) {
  const auto plan = plan_sweep(matrix({1, 2}, 1, 1));
  MockRuntime rt;
  rt.fail_at = {3};
  EXPECT_THROW(execute_sweep(plan, rt, ExecutionOptions{}), WorkloadFailure);
  EXPECT_EQ(rt.opened.size(), 4u);
}

TEST(ExecuteSweep, PerKeyCardinality) {
  const auto m = matrix({1, 2}, 3, 2);
  const auto plan = plan_sweep(m);
  MockRuntime rt;
  ExecutionOptions o;
  o.warmup_iterations = 0;
  o.measure_iterations = 4;
  const auto data = execute_sweep(plan, rt, o);
  const auto aggs = stats::aggregate_all(data.records);
  EXPECT_EQ(aggs.size(), m.unique_configurations());
  for (const auto& a : aggs) EXPECT_EQ(a.n_samples, 3u * 2u * 4u);
}
