#pragma once

// Agnostic estimation of a single Gaussian from samples in which an eta
// fraction is arbitrary: outlier damping, outlier truncation, the recursive
// spectral mean estimator and the pairing-trick covariance estimator.

#include "robgmm/core.hpp"

#include <numeric>

namespace robgmm {

enum class PreprocessMode { Damped, Truncated, GaussianBase };

/// Output of a preprocessing pass. GaussianBase marks the one-dimensional
/// damping case, where the caller must fall back to the median.
struct WeightedSample {
  Points points;
  Vector weights;
  PreprocessMode mode = PreprocessMode::Damped;
};

enum class AgnosticBranch { Gaussian, General };

inline const char* branch_name(AgnosticBranch b) { return b == AgnosticBranch::Gaussian ? "gaussian" : "general"; }

struct AgnosticConfig {
  double eta = 0.0;
  double epsilon = 0.01;
  double damping_c = 10.0;  // s^2 = damping_c * tr(Sigma)
  AgnosticBranch branch = AgnosticBranch::Gaussian;
  double sigma_floor = 1e-12;

  [[nodiscard]] double keep_fraction() const { return (1.0 - eta - epsilon) * (1.0 - eta); }
};

inline void validate_fraction(double eta, double epsilon) {
  const double f = (1.0 - eta - epsilon) * (1.0 - eta);
  if (!(eta >= 0.0 && eta < 1.0 && epsilon >= 0.0 && f > 0.0 && f <= 1.0))
    throw Error(Errc::FractionOutOfRange, "(1-eta-epsilon)(1-eta) must lie in (0, 1]");
}

/// Phi(1): the standard normal CDF at one standard deviation.
inline double phi_one() { return 0.5 * std::erfc(-1.0 / std::sqrt(2.0)); }

struct RobustSigma {
  double sigma = 0.0;
  bool degenerate = false;
};

/// One-dimensional scale estimate: the Phi(1) quantile of xs minus mu_hat,
/// floored at `floor`. A sample with no spread returns the floor flagged as
/// degenerate.
inline RobustSigma robust_sigma_1d(std::span<const double> xs, double mu_hat, double floor = 1e-12) {
  if (xs.size() < 2) throw Error(Errc::TooFewSamples, "robust_sigma_1d needs at least two values");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) return {floor, true};
  const double q = quantile_type1(std::vector<double>(xs.begin(), xs.end()), phi_one());
  return {std::max(q - mu_hat, floor), false};
}

/// Exponential down-weighting by squared distance to the coordinate-wise
/// median, w_i = exp(-|x_i - a|^2 / s^2) with s^2 = C * tr(Sigma). tr(Sigma)
/// is the sum of robust per-axis variances.
inline WeightedSample outlier_damping(const Points& s, const AgnosticConfig& cfg) {
  if (s.rows() == 0) throw Error(Errc::EmptyInput, "outlier_damping on an empty sample");
  WeightedSample out{s, Vector::Ones(s.rows()), PreprocessMode::GaussianBase};
  if (s.cols() == 1) return out;
  if (s.rows() < 2) throw Error(Errc::TooFewSamples, "outlier_damping needs at least two points");

  const Vector a = coordinatewise_median(s);
  double trace = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    const auto col = column_values(s, j);
    const double sj = robust_sigma_1d(col, a(j), cfg.sigma_floor).sigma;
    trace += sj * sj;
  }
  const double s2 = cfg.damping_c * trace;
  out.weights = (-(s.rowwise() - a.transpose()).rowwise().squaredNorm().array() / s2).exp().matrix();
  out.mode = PreprocessMode::Damped;
  return out;
}

namespace detail {

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

/// Shortest window [x_(i), x_(i+k-1)] over the sorted values; ties go to the
/// earliest start.
inline Window shortest_window(std::vector<double> values, std::size_t k) {
  std::sort(values.begin(), values.end());
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::size_t best = 0;
  double width = values[k - 1] - values[0];
  for (std::size_t i = 1; i + k <= values.size(); ++i) {
    const double w = values[i + k - 1] - values[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {values[best], values[best + k - 1]};
}

inline std::size_t keep_count(Eigen::Index m, double fraction) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-9));
  return std::clamp<std::size_t>(k, 1, static_cast<std::size_t>(m));
}

}  // namespace detail

/// Keeps the points inside the smallest region that holds a
/// (1-eta-epsilon)(1-eta) fraction of the sample. In one dimension the region
/// is the shortest interval; otherwise it is the smallest ball around the
/// vector of per-axis shortest-interval means.
inline WeightedSample outlier_truncation(const Points& s, double eta, double epsilon) {
  validate_fraction(eta, epsilon);
  if (s.rows() == 0) throw Error(Errc::EmptyInput, "outlier_truncation on an empty sample");
  const auto m = s.rows();
  const auto n = s.cols();
  const std::size_t k = detail::keep_count(m, (1.0 - eta - epsilon) * (1.0 - eta));

  std::vector<Eigen::Index> kept;
  if (n == 1) {
    const auto col = column_values(s, 0);
    const auto win = detail::shortest_window(col, k);
    for (Eigen::Index i = 0; i < m; ++i)
      if (s(i, 0) >= win.lo && s(i, 0) <= win.hi) kept.push_back(i);
  } else {
    Vector center(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      const auto col = column_values(s, d);
      const auto win = detail::shortest_window(col, k);
      double sum = 0.0;
      std::size_t count = 0;
      for (double x : col)
        if (x >= win.lo && x <= win.hi) {
          sum += x;
          ++count;
        }
      center(d) = sum / static_cast<double>(count);
    }
    const Vector dist2 = (s.rowwise() - center.transpose()).rowwise().squaredNorm();
    std::vector<double> sorted(dist2.data(), dist2.data() + m);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    const double r2 = sorted[k - 1];
    for (Eigen::Index i = 0; i < m; ++i)
      if (dist2(i) <= r2) kept.push_back(i);
  }
  return {select_rows(s, kept), Vector::Ones(static_cast<Eigen::Index>(kept.size())), PreprocessMode::Truncated};
}

struct AgnosticTrace {
  int depth = 0;              // number of recursion levels entered
  Eigen::Index preprocessed = 0;  // points kept by the top-level preprocessing
};

namespace detail {

inline Vector weighted_mean(const WeightedSample& ws) {
  const double total = ws.weights.sum();
  if (!(total > 0.0)) return ws.points.colwise().mean().transpose();
  return (ws.points.transpose() * ws.weights) / total;
}

inline Vector agnostic_mean_impl(const Points& s, const AgnosticConfig& cfg, int level, AgnosticTrace* trace) {
  if (trace) trace->depth = std::max(trace->depth, level + 1);
  const auto n = s.cols();

  WeightedSample ws = cfg.branch == AgnosticBranch::Gaussian ? outlier_damping(s, cfg)
                                                             : outlier_truncation(s, cfg.eta, cfg.epsilon);
  if (trace && level == 0) trace->preprocessed = ws.points.rows();

  if (n == 1) {
    if (ws.mode == PreprocessMode::GaussianBase) return Vector::Constant(1, median(column_values(ws.points, 0)));
    return Vector::Constant(1, weighted_mean(ws)(0));
  }

  double total = ws.weights.sum();
  Vector w = ws.weights;
  if (!(total > 0.0)) {
    w.setOnes();
    total = static_cast<double>(w.size());
  }
  const Vector mean = (ws.points.transpose() * w) / total;
  const Points centered = ws.points.rowwise() - mean.transpose();
  const Matrix cov = (centered.transpose() * w.asDiagonal() * centered) / total;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Eigen sorts ascending; walk from the top.
  const Vector& evals = eig.eigenvalues();
  const double lead = std::max(evals(n - 1), 0.0);
  const double zero_tol = 1e-12 * std::max(lead, 1e-300);
  const Eigen::Index half = (n + 1) / 2;
  Eigen::Index v_dim = 0;
  while (v_dim < half && evals(n - 1 - v_dim) > zero_tol) ++v_dim;
  // Zero-variance directions never enter V.
  if (v_dim == 0) return mean;

  Matrix basis_v(n, v_dim);
  Matrix basis_w(n, n - v_dim);
  for (Eigen::Index j = 0; j < v_dim; ++j) basis_v.col(j) = eig.eigenvectors().col(n - 1 - j);
  for (Eigen::Index j = 0; j < n - v_dim; ++j) basis_w.col(j) = eig.eigenvectors().col(n - 1 - v_dim - j);

  const Points sub = s * basis_v;
  const Vector mu_v = agnostic_mean_impl(sub, cfg, level + 1, trace);
  // Weighted when damped; truncation carries unit weights.
  const Vector mu_w = basis_w.transpose() * mean;
  return basis_v * mu_v + basis_w * mu_w;
}

}  // namespace detail

/// Recursive spectral mean estimate. Each level preprocesses the sample,
/// takes the weighted covariance, recurses on the coordinates of the original
/// sample in the top ceil(n/2) principal directions and uses the weighted
/// mean of the preprocessed sample on the complement.
inline Vector agnostic_mean(const Points& s, const AgnosticConfig& cfg, AgnosticTrace* trace = nullptr) {
  if (s.rows() == 0) throw Error(Errc::EmptyInput, "agnostic_mean on an empty sample");
  if (s.rows() < 2) throw Error(Errc::TooFewSamples, "agnostic_mean needs at least two points");
  if (cfg.branch == AgnosticBranch::General) validate_fraction(cfg.eta, cfg.epsilon);
  return detail::agnostic_mean_impl(s, cfg, 0, trace);
}

/// Pairing-trick covariance before the PSD clamp: forms
/// x'_i = (x_i - x_{i+h}) / sqrt(2), runs the general-branch mean estimator on
/// the flattened outer products and symmetrizes the result.
inline Matrix agnostic_cov_raw(const Points& s, double eta, const AgnosticConfig& cfg) {
  if (s.rows() < 4) throw Error(Errc::TooFewSamples, "agnostic_cov needs at least four points");
  const auto n = s.cols();
  const auto h = s.rows() / 2;
  const Points diff = (s.topRows(h) - s.middleRows(h, h)) / std::sqrt(2.0);
  Points outer(h, n * n);
  for (Eigen::Index i = 0; i < h; ++i) {
    const Vector x = diff.row(i).transpose();
    const Matrix xxT = x * x.transpose();
    outer.row(i) = Eigen::Map<const Eigen::RowVectorXd>(xxT.data(), n * n);
  }
  AgnosticConfig sub = cfg;
  sub.branch = AgnosticBranch::General;
  sub.eta = eta;
  const Vector flat = agnostic_mean(outer, sub);
  const Matrix a = Eigen::Map<const Matrix>(flat.data(), n, n);
  return 0.5 * (a + a.transpose());
}

/// Raises every eigenvalue below 1e-8 * lambda_max to that floor (an absolute
/// `zero_floor` stands in when the matrix is identically zero).
inline Matrix clamp_psd(const Matrix& a, double rel_floor = 1e-8, double zero_floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double floor = lmax > 0.0 ? rel_floor * lmax : zero_floor;
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline Matrix agnostic_cov(const Points& s, double eta, const AgnosticConfig& cfg) {
  return clamp_psd(agnostic_cov_raw(s, eta, cfg));
}

}  // namespace robgmm
