#pragma once

// Closed-form diagnostics: the separation parameter lambda, the spherical and
// non-spherical filtering conditions, sample-complexity terms and the
// chi-squared / Gaussian quadratic-form tail bounds behind them. Hidden
// O(.)/Omega(.) constants default to 1 unless a value is known.

#include "robgmm/model.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <map>
#include <string>
#include <vector>

namespace robgmm {

struct SeparationConstants {
  double c = 1.0;         // sample-size floor and the sigma_min O(.) factors
  double c1 = 1.0;        // non-spherical second condition
  double c2 = 2.0;        // sqrt(n log 1/delta) coefficient
  double c3 = 12.0;       // sqrt(log(1/eta)(log(1/delta) + n)) coefficient
  double c1_prime = 6.0;  // log(1/delta) coefficient, spherical
};

struct SeparationParams {
  MixtureModel model;
  double eta = 0.1;
  SeparationConstants constants;

  [[nodiscard]] double delta() const { return eta * model.w2 / model.w1 + model.w3 / model.w1; }
};

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct SeparationReport {
  std::string regime;  // "spherical" or "nonspherical"
  double lambda = 0.0;
  double delta = 0.0;
  std::vector<Condition> conditions;
  std::map<std::string, double> sample_bounds;
  std::map<std::string, double> spectrum;  // trace, trace_sq, norm, inv_norm

  [[nodiscard]] const Condition& condition(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return c;
    throw Error(Errc::InvalidConfig, "no condition named " + name);
  }
  [[nodiscard]] bool all_satisfied() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.satisfied; });
  }
};

inline Condition make_condition(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, rhs, lhs >= rhs};
}

/// lambda = (mu2 - mu1)^T sigma^{-1} (mu2 - mu1).
inline double lambda_param(const MixtureModel& m) {
  Eigen::LLT<Matrix> llt(m.sigma);
  if (m.sigma.rows() != m.dim() || llt.info() != Eigen::Success)
    throw Error(Errc::SingularCovariance, "lambda needs a positive-definite covariance");
  const Vector z = llt.matrixL().solve(m.mu2 - m.mu1);
  return z.squaredNorm();
}

/// lambda >= 2 sqrt(n log(w1/w2)) + 2 sqrt(n - 1) + 2 log(w1/w2); shared by
/// both filtering bounds.
inline double first_separation_rhs(Eigen::Index n, double w1, double w2) {
  const double r = std::log(w1 / w2);
  const double nd = static_cast<double>(n);
  return 2.0 * std::sqrt(nd * r) + 2.0 * std::sqrt(nd - 1.0) + 2.0 * r;
}

/// m >= c w2 log(w2/w3) / (w3 eta^2).
inline double filter_sample_floor(const SeparationParams& p) {
  const auto& w = p.model;
  return p.constants.c * w.w2 * std::log(w.w2 / w.w3) / (w.w3 * p.eta * p.eta);
}

inline bool is_spherical(const Matrix& sigma, double rel_tol = 1e-10) {
  const double s2 = sigma.diagonal().mean();
  return (sigma - s2 * Matrix::Identity(sigma.rows(), sigma.cols())).cwiseAbs().maxCoeff() <= rel_tol * std::abs(s2);
}

namespace detail {

inline void check_params(const SeparationParams& p) {
  if (!(p.eta > 0.0 && p.eta < 1.0)) throw Error(Errc::InvalidConfig, "eta must lie in (0, 1)");
  validate_model_structure(p.model);
}

}  // namespace detail

inline SeparationReport check_spherical_separation(const SeparationParams& p) {
  detail::check_params(p);
  if (!is_spherical(p.model.sigma)) throw Error(Errc::NotSpherical, "covariance is not a multiple of the identity");
  const auto& k = p.constants;
  const auto n = p.model.dim();
  const double nd = static_cast<double>(n);
  const double lambda = lambda_param(p.model);
  const double delta = p.delta();
  const double ld = std::log(1.0 / delta);

  SeparationReport r;
  r.regime = "spherical";
  r.lambda = lambda;
  r.delta = delta;
  r.conditions.push_back(make_condition("ratio_separation", lambda, first_separation_rhs(n, p.model.w1, p.model.w2)));
  r.conditions.push_back(make_condition(
      "accuracy_separation", lambda,
      k.c1_prime * ld + k.c2 * std::sqrt(nd * ld) + k.c3 * std::sqrt(std::log(1.0 / p.eta) * (ld + nd))));
  r.conditions.push_back(make_condition("accuracy_separation_low_dim", lambda, k.c1_prime * ld));
  r.sample_bounds["filter_min_samples"] = filter_sample_floor(p);
  const double s2 = p.model.sigma(0, 0);
  r.spectrum = {{"trace", nd * s2}, {"trace_sq", nd * s2 * s2}, {"norm", s2}, {"inv_norm", 1.0 / s2}};
  return r;
}

inline SeparationReport check_nonspherical_separation(const SeparationParams& p) {
  detail::check_params(p);
  const auto& k = p.constants;
  const auto& w = p.model;
  const auto n = w.dim();
  const double nd = static_cast<double>(n);
  const double lambda = lambda_param(w);
  const double delta = p.delta();
  const double ld = std::log(1.0 / delta);
  const double logn = std::log(nd);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(w.sigma, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double tr = ev.sum();
  const double tr2 = ev.squaredNorm();
  const double norm = ev.maxCoeff();
  const double inv_norm = 1.0 / ev.minCoeff();
  // sigma_min is defined as ||Sigma^{-1}||^{-2}.
  const double sigma_min = 1.0 / (inv_norm * inv_norm);

  SeparationReport r;
  r.regime = "nonspherical";
  r.lambda = lambda;
  r.delta = delta;
  r.conditions.push_back(make_condition("ratio_separation", lambda, first_separation_rhs(n, w.w1, w.w2)));
  const double cond = std::sqrt(norm) * inv_norm + 1.0;
  r.conditions.push_back(make_condition(
      "accuracy_separation", lambda,
      k.c1 * std::sqrt(w.w2 * logn) * cond * (tr + std::sqrt(tr2 * ld) + norm * ld) + k.c2 * std::sqrt(nd * ld) + ld));
  r.conditions.push_back(
      make_condition("accuracy_separation_low_dim", lambda, (1.0 + k.c1 * std::sqrt(w.w2 * logn)) * cond * norm * ld));
  r.conditions.push_back(make_condition("sigma_min_weight", sigma_min, k.c * w.w2 * norm * logn));
  r.conditions.push_back(make_condition(
      "sigma_min_tail", sigma_min,
      k.c * std::sqrt(w.w2) * norm * std::sqrt(logn) *
          (2.0 * norm * norm * std::sqrt(std::log(w.w2 / w.w3)) / std::sqrt(tr2) + 1.0)));
  r.sample_bounds["filter_min_samples"] = filter_sample_floor(p);
  r.spectrum = {{"trace", tr}, {"trace_sq", tr2}, {"norm", norm}, {"inv_norm", inv_norm}, {"sigma_min", sigma_min}};
  return r;
}

/// The three additive Omega(.) terms of the sample-complexity requirement,
/// with hidden constants set to 1, and their sum.
inline std::map<std::string, double> sample_complexity(Eigen::Index n, double epsilon, double w1, double w2, double w3,
                                                       bool spherical) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::InvalidConfig, "epsilon must lie in (0, 1)");
  if (!(w1 > 0.0 && w2 > 0.0 && w3 > 0.0)) throw Error(Errc::InvalidConfig, "weights must be positive");
  const double nd = static_cast<double>(n);
  const double logn = std::log(nd);
  const double le = std::log(1.0 / epsilon);
  const double ratio = w2 / w3;
  const double noise = w3 / w2;
  double dims = 0.0, second = 0.0, third = 0.0;
  if (spherical) {
    dims = nd * (1.0 / w2) * (logn + le) * logn / (epsilon * epsilon);
    second = (1.0 / w2) * std::log(1.0 / epsilon + ratio) / (epsilon * epsilon + noise * noise);
    third = std::log(1.0 / epsilon + ratio) / w3;
  } else {
    dims = nd * (nd + 1.0 / w2) * (logn + le) * logn / (epsilon * epsilon);
    second = (1.0 / w2) * std::log(1.0 / epsilon + std::sqrt(ratio)) / (std::pow(epsilon, 4) + noise * noise);
    third = std::log(1.0 / epsilon + std::sqrt(ratio)) / w3;
  }
  return {{"dimension_term", dims}, {"mixing_term", second}, {"noise_term", third}, {"total", dims + second + third}};
}

struct TailBound {
  double threshold = 0.0;
  double bound = 0.0;  // probability bound exp(-x)
};

enum class TailSide { Upper, Lower };

/// P(X - n >= 2 sqrt(xn) + 2x) <= exp(-x) for X ~ chi^2_n.
inline TailBound chisq_tail_upper(double n, double x) {
  return {n + 2.0 * std::sqrt(x * n) + 2.0 * x, std::exp(-x)};
}

/// P(X - n <= -2 sqrt(xn)) <= exp(-x) for X ~ chi^2_n.
inline TailBound chisq_tail_lower(double n, double x) { return {n - 2.0 * std::sqrt(x * n), std::exp(-x)}; }

/// Tails of the noncentral chi^2_n(lambda):
/// upper threshold (n + lambda) + 2 sqrt((n + 2 lambda) x) + 2x,
/// lower threshold (n + lambda) - 2 sqrt((n + 2 lambda) x).
inline TailBound noncentral_chisq_tail(double n, double lambda, double x, TailSide side) {
  const double spread = 2.0 * std::sqrt((n + 2.0 * lambda) * x);
  if (side == TailSide::Upper) return {n + lambda + spread + 2.0 * x, std::exp(-x)};
  return {n + lambda - spread, std::exp(-x)};
}

/// For y ~ N(mu, sigma): P(|y - mu|^2 >= tr + 2 sqrt(tr(sigma^2) x) + 2|sigma| x) <= exp(-x).
/// A nonzero shift (mu2 - mu1, measuring from the other mean) adds
/// |shift|^2 (1 + 2|sigma| x / sqrt(tr(sigma^2) x)).
inline TailBound quadform_tail(const Matrix& sigma, const Vector& shift, double x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double tr = ev.sum();
  const double tr2 = ev.squaredNorm();
  const double norm = ev.cwiseAbs().maxCoeff();
  double threshold = tr + 2.0 * std::sqrt(tr2 * x) + 2.0 * norm * x;
  const double s2 = shift.squaredNorm();
  if (s2 > 0.0) threshold += s2 * (1.0 + 2.0 * norm * x / std::sqrt(tr2 * x));
  return {threshold, std::exp(-x)};
}

/// Draws from chi^2_n(lambda) as chi^2_{n-1} + (Z + sqrt(lambda))^2.
inline std::vector<double> sample_noncentral_chisq(int n, double lambda, std::size_t count, Rng& rng) {
  std::vector<double> out(count);
  boost::random::normal_distribution<double> normal;
  boost::random::chi_squared_distribution<double> central(n > 1 ? n - 1 : 1);
  const double shift = std::sqrt(lambda);
  for (auto& v : out) {
    const double z = normal(rng) + shift;
    v = z * z + (n > 1 ? central(rng) : 0.0);
  }
  return out;
}

/// Empirical frequency of `draws` on the bound's side of the threshold.
inline double tail_frequency(std::span<const double> draws, double threshold, TailSide side) {
  std::size_t hits = 0;
  for (double d : draws) hits += side == TailSide::Upper ? (d >= threshold) : (d <= threshold);
  return static_cast<double>(hits) / static_cast<double>(draws.size());
}

/// Bound plus a 3-sigma Monte Carlo allowance sqrt(bound / N).
inline bool respects_bound(double frequency, double bound, std::size_t draws) {
  return frequency <= bound + 3.0 * std::sqrt(bound / static_cast<double>(draws));
}

}  // namespace robgmm
