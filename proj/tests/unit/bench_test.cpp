#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace robgmm;

namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig cfg;
  cfg.m = 400;
  cfg.dims = {3};
  cfg.reps = 3;
  cfg.seed = 17;
  return cfg;
}

bool same_record(const BenchmarkRecord& a, const BenchmarkRecord& b) {
  return a.n == b.n && a.rep == b.rep && a.seed == b.seed && a.method == b.method && a.ok == b.ok &&
         a.err_mu1 == b.err_mu1 && a.err_mu2 == b.err_mu2 && a.err_total == b.err_total &&
         a.true_err_mu1 == b.true_err_mu1 && a.true_err_mu2 == b.true_err_mu2;
}

}  // namespace

TEST(Benchmark, SmallestCampaign) {
  BenchmarkConfig cfg;
  cfg.model = test::two_cluster_model();
  cfg.w1 = cfg.model->w1;
  cfg.w2 = cfg.model->w2;
  cfg.w3 = cfg.model->w3;
  cfg.m = 41;
  cfg.dims = {2};
  cfg.reps = 1;
  cfg.noise = NoiseModel::point_mass(Vector{{6.0, 1.0}});
  cfg.allocation = Allocation::ExactCounts;
  const auto res = run_benchmark(cfg);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].method, Method::Alg1);
  EXPECT_EQ(res.records[1].method, Method::Em);
  for (const auto& r : res.records) {
    EXPECT_EQ(r.n, 2);
    EXPECT_EQ(r.seed, cell_seed(cfg.seed, 2, 0));
    EXPECT_TRUE(r.true_err_mu1.has_value());
    EXPECT_TRUE(r.true_err_mu2.has_value());
  }
  EXPECT_EQ(res.table.size(), 2u);
}

TEST(Benchmark, DeterministicAndErrorSumConsistent) {
  const auto a = run_benchmark(small_config());
  const auto b = run_benchmark(small_config());
  ASSERT_EQ(a.records.size(), 6u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_TRUE(same_record(a.records[i], b.records[i])) << i;
    if (a.records[i].ok)
      EXPECT_NEAR(a.records[i].err_total, a.records[i].err_mu1 + a.records[i].err_mu2, 1e-9);
  }
  ASSERT_EQ(a.table.size(), b.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) EXPECT_EQ(a.table[i].err_total.mean, b.table[i].err_total.mean);
}

TEST(Benchmark, AggregatesRecomputableFromRecords) {
  const auto res = run_benchmark(small_config());
  for (const auto& cell : res.table) {
    std::vector<double> totals;
    for (const auto& r : res.records)
      if (r.n == cell.n && r.method == cell.method && r.ok) totals.push_back(r.err_total);
    const auto ms = mean_std(totals);
    EXPECT_NEAR(ms.mean, cell.err_total.mean, 1e-9);
    EXPECT_NEAR(ms.std, cell.err_total.std, 1e-9);
  }
}

TEST(Benchmark, AddingDimsKeepsExistingCells) {
  BenchmarkConfig one = small_config();
  BenchmarkConfig two = small_config();
  two.dims = {2, 3};
  const auto a = run_benchmark(one);
  const auto b = run_benchmark(two);
  std::vector<BenchmarkRecord> b3;
  for (const auto& r : b.records)
    if (r.n == 3) b3.push_back(r);
  ASSERT_EQ(a.records.size(), b3.size());
  for (std::size_t i = 0; i < b3.size(); ++i) EXPECT_TRUE(same_record(a.records[i], b3[i]));
}

TEST(Benchmark, FailuresAreRecordedNotThrown) {
  BenchmarkConfig cfg = small_config();
  cfg.m = 5;  // EM needs 2(n + 1) = 8 points
  cfg.reps = 1;
  const auto res = run_benchmark(cfg);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_TRUE(res.records[0].ok);
  EXPECT_FALSE(res.records[1].ok);
  EXPECT_EQ(res.records[1].failure, "TooFewSamples");
  EXPECT_EQ(res.table[1].failed, 1u);
  EXPECT_EQ(res.table[1].err_total.count, 0u);
}

TEST(Benchmark, StandinModelHitsSeparationTarget) {
  const auto m = standin_model(10, 0.8, 0.16, 0.04, 4.0);
  EXPECT_NO_THROW(validate_model(m));
  EXPECT_NEAR(lambda_param(m), 4.0 * first_separation_rhs(10, 0.8, 0.16), 1e-9);
}

TEST(Benchmark, ConfigValidation) {
  BenchmarkConfig cfg = small_config();
  cfg.reps = 0;
  EXPECT_THROW(run_benchmark(cfg), Error);
  cfg = small_config();
  cfg.alpha_grid = {6.0};  // 1 - 6 * 0.2 < 0
  EXPECT_THROW(run_sensitivity(cfg), Error);
  cfg = small_config();
  cfg.dims.clear();
  EXPECT_THROW(run_benchmark(cfg), Error);
}

TEST(Sensitivity, AlphaOneMatchesBenchmarkAlg1) {
  BenchmarkConfig cfg = small_config();
  cfg.methods = {Method::Alg1};
  const auto bench = run_benchmark(cfg);
  const auto sens = run_sensitivity(cfg);
  ASSERT_EQ(sens.records.size(), 3u * cfg.alpha_grid.size());
  std::size_t matched = 0;
  for (const auto& r : sens.records)
    if (r.alpha == 1.0) {
      EXPECT_TRUE(same_record(r, bench.records[static_cast<std::size_t>(r.rep)]));
      ++matched;
    }
  EXPECT_EQ(matched, 3u);
}

TEST(Sensitivity, PairedSeedsAcrossGrids) {
  BenchmarkConfig full = small_config();
  BenchmarkConfig only_one = small_config();
  only_one.alpha_grid = {1.0};
  const auto a = run_sensitivity(full);
  const auto b = run_sensitivity(only_one);
  std::size_t k = 0;
  for (const auto& r : a.records)
    if (r.alpha == 1.0) EXPECT_TRUE(same_record(r, b.records[k++]));
  EXPECT_EQ(k, b.records.size());
  for (const auto& cell : a.table) EXPECT_EQ(cell.method, Method::Alg1);
  EXPECT_EQ(a.table.size(), full.alpha_grid.size());
}
