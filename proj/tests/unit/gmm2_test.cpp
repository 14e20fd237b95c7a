#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace robgmm;

namespace {

Dataset two_cluster_dataset(std::uint64_t seed) {
  GenerationConfig g;
  g.model = test::two_cluster_model();
  g.m = 41;
  g.noise = NoiseModel::point_mass(Vector{{6.0, 1.0}});
  g.allocation = Allocation::ExactCounts;
  g.seed = seed;
  return generate(g);
}

}  // namespace

TEST(Mahalanobis, HandValues) {
  Points x(3, 2);
  x << 1, 0, 2, 0, 0, 0;
  const Vector s = mahalanobis_scores(x, Vector::Zero(2), Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(s(0), 1.0);
  EXPECT_DOUBLE_EQ(s(2), 0.0);
  const Vector t = mahalanobis_scores(x, Vector::Zero(2), Vector{{4.0, 1.0}}.asDiagonal());
  EXPECT_DOUBLE_EQ(t(1), 1.0);
  EXPECT_THROW(mahalanobis_scores(x, Vector::Zero(2), Matrix::Zero(2, 2)), Error);
  EXPECT_THROW(mahalanobis_scores(x, Vector::Zero(3), Matrix::Identity(2, 2)), Error);
}

TEST(FilterTop, WorkedExample) {
  const Vector scores{{0.1, 0.5, 0.2, 0.9, 0.3}};
  const auto f = filter_top(scores, 0.6);
  EXPECT_EQ(f.rank, 3);
  EXPECT_DOUBLE_EQ(f.cutoff, 0.3);
  EXPECT_EQ(f.indices, (std::vector<Eigen::Index>{1, 3, 4}));
}

TEST(FilterTop, TiesKeepEverything) {
  const Vector scores = Vector::Constant(6, 2.0);
  EXPECT_EQ(filter_top(scores, 0.5).indices.size(), 6u);
}

TEST(FilterTop, SmallWeightKeepsAll) {
  const Vector scores{{3.0, 1.0, 2.0}};
  const auto f = filter_top(scores, 1e-9);
  EXPECT_EQ(f.rank, 1);
  EXPECT_EQ(f.indices.size(), 3u);
  EXPECT_EQ(filter_top(scores, 0.999).rank, 2);  // clamped to m - 1
}

TEST(FilterTop, DistinctScoresKeepMMinusKPlusOne) {
  const Vector scores = Vector::LinSpaced(100, 0.0, 1.0).reverse();
  for (double w1 : {0.2, 0.5, 0.8, 0.83}) {
    const auto f = filter_top(scores, w1);
    EXPECT_EQ(static_cast<Eigen::Index>(f.indices.size()), 100 - f.rank + 1);
  }
}

TEST(Alg1, TwoClusterMedianPerMeanError) {
  std::vector<double> e1, e2;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = two_cluster_dataset(seed);
    const auto br = estimation_error_breakdown(estimate_alg1(ds.points, 20.0 / 41.0), test::two_cluster_model());
    e1.push_back(br.err_mu1);
    e2.push_back(br.err_mu2);
  }
  EXPECT_LE(median(e1), 0.9);
  EXPECT_LE(median(e2), 0.9);
}

TEST(Alg1, NoNoiseFarApartComponents) {
  GenerationConfig g;
  g.model.w1 = 0.8;
  g.model.w2 = 0.2;
  g.model.w3 = 0.0;
  g.model.mu1 = Vector::Zero(3);
  g.model.mu2 = Vector{{1000.0, 0.0, 0.0}};
  g.model.sigma = Matrix::Identity(3, 3);
  g.m = 10000;
  g.seed = 51;
  const Dataset ds = generate(g);
  const auto est = estimate_alg1(ds.points, 0.8);
  EXPECT_LE(estimation_error(est, g.model), 0.2);
  const Vector g2_mean = select_rows(ds.points, ds.indices_of(Label::G2)).colwise().mean().transpose();
  EXPECT_LE((est.mu2_hat - g2_mean).norm(), 0.15);
}

TEST(Alg1, SingleGaussianDoesNotCrash) {
  const Vector mu = Vector::Constant(10, 2.0);
  const Points x = test::gaussian_points(10000, mu, 52);
  const auto est = estimate_alg1(x, 0.5);
  EXPECT_LE((est.mu1_hat - mu).norm(), 0.3);
  // Oracle: mean of the shell of points farthest from mu in the true metric.
  const Vector scores = (x.rowwise() - mu.transpose()).rowwise().squaredNorm();
  const Vector shell = filter_top(x, scores, 0.5).colwise().mean().transpose();
  EXPECT_LE((est.mu2_hat - shell).norm(), 0.2);
  EXPECT_LE((est.mu2_hat - mu).norm(), 0.3);
}

TEST(Alg1, TranslationEquivariant) {
  GenerationConfig g;
  g.model = test::default_weights_model(4);
  g.m = 2000;
  g.seed = 53;
  const Dataset ds = generate(g);
  const Vector c{{10.0, -3.0, 4.0, 0.25}};
  Alg1Config cfg;
  cfg.w1_input = 0.8;
  const auto a = estimate_alg1(ds.points, cfg);
  const auto b = estimate_alg1(ds.points.rowwise() + c.transpose(), cfg);
  EXPECT_LT((b.mu1_hat - a.mu1_hat - c).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((b.mu2_hat - a.mu2_hat - c).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((b.sigma_hat - a.sigma_hat).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Alg1, FilteredSizeMatchesRank) {
  GenerationConfig g;
  g.model = test::default_weights_model(3);
  g.m = 1000;
  g.seed = 54;
  const auto est = estimate_alg1(generate(g).points, 0.8);
  EXPECT_EQ(est.diagnostics.at("filter_rank"), 800.0);
  EXPECT_EQ(est.diagnostics.at("filtered_size"), 201.0);
  EXPECT_GE(est.diagnostics.at("filter_cutoff"), 0.0);
}

TEST(Alg1, FirstMeanFindsMajorityComponent) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenerationConfig g;
    g.model = test::default_weights_model(5);
    g.m = 5000;
    g.seed = 100 + seed;
    const auto est = estimate_alg1(generate(g).points, 0.8);
    hits += (est.mu1_hat - g.model.mu1).norm() < (est.mu1_hat - g.model.mu2).norm();
  }
  EXPECT_GE(hits, 18);
}

TEST(Alg1, ConfigAndSizeErrors) {
  const Points x = test::gaussian_points(50, Vector::Zero(2), 55);
  EXPECT_THROW(estimate_alg1(x, 0.0), Error);
  EXPECT_THROW(estimate_alg1(x, 1.0), Error);
  EXPECT_THROW(estimate_alg1(test::gaussian_points(3, Vector::Zero(2), 56), 0.5), Error);
}

TEST(SensitivityBound, ZeroPerturbation) {
  EXPECT_EQ(sensitivity_bound(0.8, 0.8, 0.2, 0.0, 1.0, 10, 0.0), 0.0);
}

TEST(SensitivityBound, LinearInWeightGap) {
  const double a = sensitivity_bound(0.8, 0.7, 0.2, 0.0, 1.0, 10, 0.0);
  const double b = sensitivity_bound(0.8, 0.6, 0.2, 0.0, 1.0, 10, 0.0);
  EXPECT_NEAR(b, 2.0 * a, 1e-12);
}

TEST(SensitivityBound, ExperimentWeights) {
  // ((0.1 + 0.04)/0.16 + 0.04/0.3 + 0.1) * sqrt(ln 10), evaluated independently.
  EXPECT_NEAR(sensitivity_bound(0.8, 0.7, 0.16, 0.04, 1.0, 10, 0.1), 1.6818150684018705, 1e-12);
  EXPECT_NEAR(sensitivity_bound(0.8, 0.7, 0.16, 0.04, 1.0, 10, 0.1, 3.0), 3.0 * 1.6818150684018705, 1e-12);
}
