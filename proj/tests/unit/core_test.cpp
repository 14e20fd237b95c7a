#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace robgmm;

TEST(Quantile, Type1OrderStatistic) {
  const std::vector<double> xs{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  EXPECT_EQ(quantile_type1(xs, 0.5), 5.0);
  EXPECT_EQ(quantile_type1(xs, 0.85), 9.0);  // ceil(8.5) = 9
  EXPECT_EQ(quantile_type1(xs, 0.1), 1.0);
  EXPECT_EQ(quantile_type1(xs, 1.0), 10.0);
}

TEST(Quantile, MedianAveragesMiddlePairForEvenCounts) {
  EXPECT_EQ(median({1.0, 2.0, 100.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_EQ(median({-1.0, 1.0}), 0.0);
}

TEST(Quantile, CoordinatewiseMedian) {
  Points p(3, 2);
  p << 0, 10, 1, -5, 7, 3;
  const Vector a = coordinatewise_median(p);
  EXPECT_EQ(a(0), 1.0);
  EXPECT_EQ(a(1), 3.0);
}

TEST(Seeds, SubstreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t off = 0; off < 64; ++off) seen.insert(substream_seed(42, off));
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_EQ(substream_seed(42, 3), substream_seed(42, 3));
  EXPECT_NE(substream_seed(42, 3), substream_seed(43, 3));
}

TEST(Seeds, Mix64IsSplitmixFinalizer) {
  // First splitmix64 output from state 0.
  EXPECT_EQ(mix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Rows, SelectRowsKeepsOrder) {
  Points p(4, 1);
  p << 0, 1, 2, 3;
  const std::vector<Eigen::Index> idx{3, 1};
  const Points s = select_rows(p, idx);
  ASSERT_EQ(s.rows(), 2);
  EXPECT_EQ(s(0, 0), 3.0);
  EXPECT_EQ(s(1, 0), 1.0);
}

TEST(MeanStd, SampleStandardDeviation) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto ms = mean_std(xs);
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(ms.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(ms.count, 4u);
  const std::vector<double> one{7.0};
  EXPECT_EQ(mean_std(one).std, 0.0);
}

TEST(Errors, IoClassification) {
  EXPECT_TRUE(is_io_error(Errc::IoError));
  EXPECT_TRUE(is_io_error(Errc::ParseError));
  EXPECT_FALSE(is_io_error(Errc::InvalidConfig));
  EXPECT_STREQ(errc_name(Errc::WeightOrderViolation), "WeightOrderViolation");
  const Error e(Errc::EmptyInput, "nothing");
  EXPECT_EQ(e.code(), Errc::EmptyInput);
}
