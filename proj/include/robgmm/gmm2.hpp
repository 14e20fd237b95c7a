#pragma once

// Iterative estimation of a noisy two-component mixture. The dominant
// component is estimated agnostically from the whole sample; every point is
// then ranked by Mahalanobis distance to it, the closest w1 mass is removed
// and the second mean is estimated agnostically from what remains.

#include "robgmm/agnostic.hpp"
#include "robgmm/model.hpp"

namespace robgmm {

struct Alg1Config {
  double w1_input = 0.5;
  /// Preprocessing parameters for the first mean call. Its eta is overridden
  /// with 1 - w1_input. Truncation by default: damping around the
  /// coordinate-wise median drifts toward the midpoint of two comparable
  /// clusters.
  AgnosticConfig agnostic{.branch = AgnosticBranch::General};
  /// The second mean call runs on the filtered set with
  /// eta = second_eta_scale * (1 - w1_input).
  double second_eta_scale = 0.25;
  AgnosticBranch second_branch = AgnosticBranch::Gaussian;

  void validate() const {
    if (!(w1_input > 0.0 && w1_input < 1.0)) throw Error(Errc::InvalidConfig, "w1_input must lie in (0, 1)");
    if (!(second_eta_scale >= 0.0)) throw Error(Errc::InvalidConfig, "second_eta_scale must be non-negative");
  }
};

/// Squared Mahalanobis distances (x - mu)^T sigma^{-1} (x - mu), via a
/// triangular solve against the Cholesky factor of sigma.
inline Vector mahalanobis_scores(const Points& x, const Vector& mu, const Matrix& sigma) {
  if (mu.size() != x.cols() || sigma.rows() != x.cols() || sigma.cols() != x.cols())
    throw Error(Errc::DimensionMismatch, "mahalanobis_scores dimension mismatch");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(Errc::SingularCovariance, "covariance is not positive definite");
  const Matrix centered = (x.rowwise() - mu.transpose()).transpose();
  const Matrix z = llt.matrixL().solve(centered);
  return z.colwise().squaredNorm().transpose();
}

struct FilterResult {
  std::vector<Eigen::Index> indices;
  Eigen::Index rank = 0;  // k, 1-based
  double cutoff = 0.0;    // k-th smallest score
};

inline Eigen::Index filter_rank(Eigen::Index m, double w1) {
  const auto k = static_cast<Eigen::Index>(std::llround(static_cast<double>(m) * w1));
  return std::clamp<Eigen::Index>(k, 1, m - 1);
}

/// Keeps every point whose score is at least the k-th smallest score, with
/// k = clamp(round(m * w1), 1, m - 1).
inline FilterResult filter_top(const Vector& scores, double w1) {
  const auto m = scores.size();
  if (m < 2) throw Error(Errc::TooFewSamples, "filter_top needs at least two scores");
  FilterResult out;
  out.rank = filter_rank(m, w1);
  std::vector<double> sorted(scores.data(), scores.data() + m);
  auto kth = sorted.begin() + static_cast<std::ptrdiff_t>(out.rank - 1);
  std::nth_element(sorted.begin(), kth, sorted.end());
  out.cutoff = *kth;
  for (Eigen::Index i = 0; i < m; ++i)
    if (scores(i) >= out.cutoff) out.indices.push_back(i);
  return out;
}

inline Points filter_top(const Points& x, const Vector& scores, double w1) {
  if (scores.size() != x.rows()) throw Error(Errc::DimensionMismatch, "one score per point required");
  return select_rows(x, filter_top(scores, w1).indices);
}

struct Alg1Trace {
  Vector scores;                     // Mahalanobis score of every input row
  std::vector<Eigen::Index> filtered;  // rows handed to the second mean call
};

/// Diagnostics include the filtered-set size, the score cutoff and the
/// recursion depths of both mean calls.
inline EstimationResult estimate_alg1(const Points& x, const Alg1Config& cfg, Alg1Trace* trace = nullptr) {
  cfg.validate();
  const auto m = x.rows();
  const auto n = x.cols();
  if (n < 1 || m < std::max<Eigen::Index>(4, n + 1))
    throw Error(Errc::TooFewSamples, "estimate_alg1 needs m >= max(4, n + 1)");

  const double eta1 = 1.0 - cfg.w1_input;
  AgnosticConfig first = cfg.agnostic;
  first.eta = eta1;

  EstimationResult out;
  AgnosticTrace trace1;
  out.mu1_hat = agnostic_mean(x, first, &trace1);
  out.sigma_hat = agnostic_cov(x, eta1, cfg.agnostic);

  const Vector scores = mahalanobis_scores(x, out.mu1_hat, out.sigma_hat);
  const FilterResult kept = filter_top(scores, cfg.w1_input);
  const Points x2 = select_rows(x, kept.indices);

  AgnosticConfig second = cfg.agnostic;
  second.eta = cfg.second_eta_scale * eta1;
  second.branch = cfg.second_branch;
  AgnosticTrace trace2;
  out.mu2_hat = agnostic_mean(x2, second, &trace2);

  out.diagnostics["filtered_size"] = static_cast<double>(kept.indices.size());
  out.diagnostics["filter_rank"] = static_cast<double>(kept.rank);
  out.diagnostics["filter_cutoff"] = kept.cutoff;
  out.diagnostics["mean1_depth"] = trace1.depth;
  out.diagnostics["mean2_depth"] = trace2.depth;
  if (trace) {
    trace->scores = scores;
    trace->filtered = kept.indices;
  }
  return out;
}

inline EstimationResult estimate_alg1(const Points& x, double w1_input) {
  Alg1Config cfg;
  cfg.w1_input = w1_input;
  return estimate_alg1(x, cfg);
}

/// Perturbation bound for the spherical case:
/// alpha * ((|w1' - w1| + w3) / w2 + w3 / (1 - w1') + epsilon) * sigma * sqrt(log n).
inline double sensitivity_bound(double w1_true, double w1_input, double w2, double w3, double sigma, Eigen::Index n,
                                double epsilon, double alpha = 1.0) {
  const double spread = (std::abs(w1_input - w1_true) + w3) / w2 + w3 / (1.0 - w1_input) + epsilon;
  return alpha * spread * sigma * std::sqrt(std::log(static_cast<double>(n)));
}

}  // namespace robgmm
