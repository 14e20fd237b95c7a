#pragma once

#include "robgmm/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace robgmm {

/// Parameters of a noisy two-component Gaussian mixture with shared covariance.
/// w3 is the mass of the arbitrary (adversarial) component.
struct MixtureModel {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  Vector mu1;
  Vector mu2;
  Matrix sigma;

  [[nodiscard]] Eigen::Index dim() const { return mu1.size(); }
};

enum class Label { G1, G2, Noise };

inline const char* label_name(Label l) {
  switch (l) {
    case Label::G1: return "G1";
    case Label::G2: return "G2";
    case Label::Noise: return "NOISE";
  }
  return "?";
}

inline std::optional<Label> parse_label(const std::string& s) {
  if (s == "G1") return Label::G1;
  if (s == "G2") return Label::G2;
  if (s == "NOISE") return Label::Noise;
  return std::nullopt;
}

struct Dataset {
  Points points;
  std::optional<std::vector<Label>> labels;
  std::optional<std::uint64_t> seed;

  [[nodiscard]] Eigen::Index size() const { return points.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return points.cols(); }

  /// Rows carrying the given label; empty when the dataset is unlabeled.
  [[nodiscard]] std::vector<Eigen::Index> indices_of(Label l) const {
    std::vector<Eigen::Index> out;
    if (!labels) return out;
    for (std::size_t i = 0; i < labels->size(); ++i)
      if ((*labels)[i] == l) out.push_back(static_cast<Eigen::Index>(i));
    return out;
  }

  void validate() const {
    if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows())
      throw Error(Errc::DimensionMismatch, "label count does not match point count");
  }
};

struct EstimationResult {
  Vector mu1_hat;
  Vector mu2_hat;
  Matrix sigma_hat;
  std::map<std::string, double> diagnostics;
};

inline bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Structural checks only: weights are a probability vector, dimensions agree
/// and sigma is symmetric positive definite. Sampling needs no more than this.
inline void validate_model_structure(const MixtureModel& m) {
  if (m.w1 < 0.0 || m.w2 < 0.0 || m.w3 < 0.0)
    throw Error(Errc::WeightOrderViolation, "weights must be non-negative");
  if (std::abs(m.w1 + m.w2 + m.w3 - 1.0) > 1e-12)
    throw Error(Errc::WeightSumViolation, "weights must sum to 1");
  const auto n = m.dim();
  if (n < 1 || m.mu2.size() != n || m.sigma.rows() != n || m.sigma.cols() != n)
    throw Error(Errc::DimensionMismatch, "mu1, mu2 and sigma must share one dimension");
  if (!m.mu1.allFinite() || !m.mu2.allFinite() || !m.sigma.allFinite())
    throw Error(Errc::InvalidConfig, "model parameters must be finite");
  if (!is_symmetric(m.sigma, 1e-10))
    throw Error(Errc::NonPositiveDefiniteCovariance, "sigma is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw Error(Errc::NonPositiveDefiniteCovariance, "sigma has a non-positive eigenvalue");
}

/// Full model check: the structural invariants plus the weight ordering
/// w1 >= w2 > w3 > 0. Equal leading weights are admitted so the balanced
/// 20/20/1 motivating scenario validates.
inline void validate_model(const MixtureModel& m) {
  if (!(m.w3 > 0.0 && m.w2 > m.w3 && m.w1 >= m.w2))
    throw Error(Errc::WeightOrderViolation, "weights must satisfy w1 >= w2 > w3 > 0");
  validate_model_structure(m);
}

/// Permutation-invariant mean error, with the assignment that achieved it.
struct ErrorBreakdown {
  double total = 0.0;
  double err_mu1 = 0.0;  // distance from the estimate assigned to mu1
  double err_mu2 = 0.0;
  bool swapped = false;  // true when mu2_hat was matched to mu1
};

inline ErrorBreakdown estimation_error_breakdown(const EstimationResult& est, const MixtureModel& truth) {
  const auto n = truth.dim();
  if (est.mu1_hat.size() != n || est.mu2_hat.size() != n || truth.mu2.size() != n)
    throw Error(Errc::DimensionMismatch, "estimate and truth dimensions differ");
  const double a1 = (est.mu1_hat - truth.mu1).norm();
  const double a2 = (est.mu2_hat - truth.mu2).norm();
  const double b1 = (est.mu2_hat - truth.mu1).norm();
  const double b2 = (est.mu1_hat - truth.mu2).norm();
  if (b1 + b2 < a1 + a2) return {b1 + b2, b1, b2, true};
  return {a1 + a2, a1, a2, false};
}

/// min over the two assignments pi of |mu_hat_pi(1) - mu1| + |mu_hat_pi(2) - mu2|.
inline double estimation_error(const EstimationResult& est, const MixtureModel& truth) {
  return estimation_error_breakdown(est, truth).total;
}

}  // namespace robgmm
