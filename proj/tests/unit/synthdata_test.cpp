#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace robgmm;

namespace {

GenerationConfig two_cluster_config(std::uint64_t seed) {
  GenerationConfig g;
  g.model = test::two_cluster_model();
  g.m = 41;
  g.noise = NoiseModel::point_mass(Vector{{6.0, 1.0}});
  g.allocation = Allocation::ExactCounts;
  g.seed = seed;
  return g;
}

}  // namespace

TEST(Generate, TwoClusterExactCounts) {
  const Dataset ds = generate(two_cluster_config(7));
  ASSERT_EQ(ds.size(), 41);
  EXPECT_EQ(ds.indices_of(Label::G1).size(), 20u);
  EXPECT_EQ(ds.indices_of(Label::G2).size(), 20u);
  const auto noise = ds.indices_of(Label::Noise);
  ASSERT_EQ(noise.size(), 1u);
  EXPECT_EQ(ds.points(noise[0], 0), 6.0);
  EXPECT_EQ(ds.points(noise[0], 1), 1.0);
}

TEST(Generate, SeededDeterminism) {
  const Dataset a = generate(two_cluster_config(11));
  const Dataset b = generate(two_cluster_config(11));
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(*a.labels, *b.labels);
  EXPECT_NE(generate(two_cluster_config(12)).points, a.points);
}

TEST(Generate, NoiseModelDoesNotMoveGaussianDraws) {
  GenerationConfig a = two_cluster_config(5);
  GenerationConfig b = a;
  b.noise = NoiseModel::cauchy();
  const Dataset da = generate(a), db = generate(b);
  for (auto i : da.indices_of(Label::G1)) EXPECT_EQ(da.points.row(i), db.points.row(i));
  for (auto i : da.indices_of(Label::G2)) EXPECT_EQ(da.points.row(i), db.points.row(i));
}

TEST(Generate, NearSingleGaussianMean) {
  GenerationConfig g;
  g.model.w1 = 1.0 - 1e-9;
  g.model.w2 = 6e-10;
  g.model.w3 = 4e-10;
  g.model.mu1 = Vector::Zero(3);
  g.model.mu2 = Vector::Constant(3, 5.0);
  g.model.sigma = Matrix::Identity(3, 3);
  g.m = 100000;
  g.seed = 3;
  const Dataset ds = generate(g);
  const auto idx = ds.indices_of(Label::G1);
  const Vector mean = select_rows(ds.points, idx).colwise().mean().transpose();
  EXPECT_LT(mean.norm(), 0.02);
}

TEST(Generate, MultinomialCountsMatchWeights) {
  GenerationConfig g;
  g.model = test::default_weights_model(2);
  g.m = 1000;
  const std::array<double, 3> w{0.8, 0.16, 0.04};
  std::array<double, 3> sum{};
  constexpr int kRuns = 200;
  for (int r = 0; r < kRuns; ++r) {
    g.seed = 1000 + r;
    const Dataset ds = generate(g);
    sum[0] += ds.indices_of(Label::G1).size();
    sum[1] += ds.indices_of(Label::G2).size();
    sum[2] += ds.indices_of(Label::Noise).size();
  }
  for (int k = 0; k < 3; ++k) {
    const double expect = 1000.0 * w[k];
    const double se = std::sqrt(1000.0 * w[k] * (1.0 - w[k]) / kRuns);
    EXPECT_NEAR(sum[k] / kRuns, expect, 3.0 * se) << "component " << k;
  }
}

TEST(Generate, ExactCountsLargestRemainder) {
  // 4 * (0.375, 0.375, 0.25) = (1.5, 1.5, 1): floors sum to 3 and the tied
  // remainders resolve toward the first component.
  const auto c = exact_counts(4, {0.375, 0.375, 0.25});
  EXPECT_EQ(c[0], 2);
  EXPECT_EQ(c[1], 1);
  EXPECT_EQ(c[2], 1);
  const auto e = exact_counts(10, {0.375, 0.375, 0.25});
  EXPECT_EQ(e[0], 4);
  EXPECT_EQ(e[1], 4);
  EXPECT_EQ(e[2], 2);
  const auto d = exact_counts(41, {20.0 / 41, 20.0 / 41, 1.0 / 41});
  EXPECT_EQ(d[0] + d[1] + d[2], 41);
}

TEST(Generate, WhitenedComponentSanity) {
  GenerationConfig g;
  g.model = test::default_weights_model(3);
  g.model.sigma = Matrix{{4.0, 1.0, 0.0}, {1.0, 2.0, 0.5}, {0.0, 0.5, 1.0}};
  g.model.mu1 = Vector{{1.0, -2.0, 0.5}};
  g.m = 20000;
  g.seed = 9;
  const Dataset ds = generate(g);
  const auto idx = ds.indices_of(Label::G1);
  const double m1 = static_cast<double>(idx.size());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.model.sigma);
  const Points z = (select_rows(ds.points, idx).rowwise() - g.model.mu1.transpose()) * eig.operatorInverseSqrt();
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().sum() / (m1 - 1.0);
    EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(m1));
    EXPECT_LT(std::abs(var - 1.0), 8.0 / std::sqrt(m1));
  }
}

TEST(Generate, RejectsBadConfigs) {
  GenerationConfig g = two_cluster_config(1);
  g.noise = NoiseModel::point_mass(Vector::Zero(3));
  EXPECT_THROW(generate(g), Error);
  g = two_cluster_config(1);
  g.m = 10;  // round(10/41) = 0 noise points
  EXPECT_THROW(generate(g), Error);
  g = two_cluster_config(1);
  g.noise = NoiseModel::cauchy(-1.0);
  EXPECT_THROW(generate(g), Error);
}

TEST(Generate, ExternalNoiseSampler) {
  GenerationConfig g = two_cluster_config(2);
  g.noise.kind = NoiseKind::External;
  g.noise.sampler = [](Eigen::Ref<Vector> out, Rng&) { out.setConstant(-7.0); };
  const Dataset ds = generate(g);
  EXPECT_EQ(ds.points(ds.indices_of(Label::Noise)[0], 0), -7.0);
}

TEST(Cauchy, EmptyDraw) {
  Rng rng(1);
  EXPECT_EQ(sample_cauchy(3, 1.0, Vector::Zero(3), 0, rng).rows(), 0);
}

TEST(Cauchy, MedianAndHalfMassBeyondScale) {
  Rng rng(21);
  const Points p = sample_cauchy(1, 1.0, Vector::Zero(1), 100000, rng);
  const auto col = column_values(p, 0);
  EXPECT_LT(std::abs(median(col)), 0.02);
  double beyond = 0.0;
  for (double v : col) beyond += std::abs(v) > 1.0;
  EXPECT_NEAR(beyond / 1e5, 0.5, 0.01);
}

TEST(Cauchy, ScaleAndLocation) {
  Rng rng(22);
  const Points p = sample_cauchy(2, 3.0, Vector{{10.0, -10.0}}, 100000, rng);
  EXPECT_NEAR(median(column_values(p, 0)), 10.0, 0.06);
  EXPECT_NEAR(median(column_values(p, 1)), -10.0, 0.06);
}
