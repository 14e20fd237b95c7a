#pragma once

// Plain expectation-maximisation for a two-component Gaussian mixture; the
// baseline the robust estimator is compared against.

#include "robgmm/model.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <array>
#include <cassert>
#include <limits>

namespace robgmm {

enum class EmInit { RandomPoints, KmeansLike };
enum class CovarianceMode { FullPerComponent, Shared };

struct EmConfig {
  int max_iters = 1000;
  double tol = 1e-6;  // relative log-likelihood change
  double reg = 1e-6;  // added to every covariance diagonal
  EmInit init = EmInit::RandomPoints;
  std::uint64_t seed = 0;
  CovarianceMode covariance_mode = CovarianceMode::FullPerComponent;

  void validate() const {
    if (max_iters < 1 || !(tol > 0.0) || !(reg >= 0.0))
      throw Error(Errc::InvalidConfig, "EM needs max_iters >= 1, tol > 0, reg >= 0");
  }
};

struct EmTrace {
  std::vector<double> log_likelihood;  // after each E-step
  int reinitializations = 0;
};

namespace detail {

struct Component {
  double weight = 0.5;
  Vector mean;
  Matrix cov;
};

inline Matrix pooled_covariance(const Points& x) {
  const Points c = x.rowwise() - x.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(x.rows());
}

/// log N(x_i | mean, cov) for every row; throws when cov is not PD.
inline Vector log_density(const Points& x, const Component& c) {
  Eigen::LLT<Matrix> llt(c.cov);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::NonFiniteLikelihood, "component covariance lost positive definiteness");
  const Matrix z = llt.matrixL().solve((x.rowwise() - c.mean.transpose()).transpose());
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(x.cols());
  constexpr double kLog2Pi = 1.8378770664093453;
  return (-0.5 * (z.colwise().squaredNorm().array() + log_det + n * kLog2Pi)).transpose();
}

struct EStep {
  Matrix resp;  // m x 2, rows sum to one
  double log_likelihood = 0.0;
};

inline EStep e_step(const Points& x, const std::array<Component, 2>& comp) {
  const auto m = x.rows();
  Matrix logp(m, 2);
  for (int k = 0; k < 2; ++k) logp.col(k) = log_density(x, comp[k]).array() + std::log(comp[k].weight);
  const Vector mx = logp.rowwise().maxCoeff();
  const Vector lse = mx.array() + ((logp.colwise() - mx).array().exp().rowwise().sum()).log();
  return {(logp.colwise() - lse).array().exp(), lse.sum()};
}

}  // namespace detail

/// Fits the mixture by EM. mu1_hat is the larger-weight component; sigma_hat
/// is the weight-averaged covariance (the shared one in Shared mode).
inline EstimationResult estimate_em(const Points& x, const EmConfig& cfg, EmTrace* trace = nullptr) {
  cfg.validate();
  const auto m = x.rows();
  const auto n = x.cols();
  if (n < 1 || m < 2 * (n + 1)) throw Error(Errc::TooFewSamples, "EM needs m >= 2(n + 1)");
  if (!x.allFinite()) throw Error(Errc::NonFiniteLikelihood, "input contains non-finite values");

  Rng rng(cfg.seed);
  boost::random::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  const Matrix reg = cfg.reg * Matrix::Identity(n, n);
  const Matrix pooled = detail::pooled_covariance(x) + reg;

  std::array<detail::Component, 2> comp;
  {
    const Eigen::Index a = pick(rng);
    Eigen::Index b = pick(rng);
    for (int tries = 0; tries < 64 && x.row(b) == x.row(a); ++tries) b = pick(rng);
    comp[0] = {0.5, x.row(a).transpose(), pooled};
    comp[1] = {0.5, x.row(b).transpose(), pooled};
  }
  if (cfg.init == EmInit::KmeansLike) {
    // Farthest-point seeding from the first pick, then a few Lloyd sweeps.
    Eigen::Index far = 0;
    (x.rowwise() - comp[0].mean.transpose()).rowwise().squaredNorm().maxCoeff(&far);
    comp[1].mean = x.row(far).transpose();
    for (int sweep = 0; sweep < 10; ++sweep) {
      const Vector d0 = (x.rowwise() - comp[0].mean.transpose()).rowwise().squaredNorm();
      const Vector d1 = (x.rowwise() - comp[1].mean.transpose()).rowwise().squaredNorm();
      Vector s0 = Vector::Zero(n), s1 = Vector::Zero(n);
      Eigen::Index c0 = 0, c1 = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (d0(i) <= d1(i)) {
          s0 += x.row(i).transpose();
          ++c0;
        } else {
          s1 += x.row(i).transpose();
          ++c1;
        }
      }
      if (c0 == 0 || c1 == 0) break;
      comp[0].mean = s0 / static_cast<double>(c0);
      comp[1].mean = s1 / static_cast<double>(c1);
    }
  }

  Matrix resp(m, 2);
  double ll_prev = -std::numeric_limits<double>::infinity();
  int iter = 0;
  int reinit_left = 1;
  bool converged = false;
  bool just_reinitialized = true;
  EmTrace local;
  EmTrace& tr = trace ? *trace : local;

  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    auto step = detail::e_step(x, comp);
    const double ll = step.log_likelihood;
    if (!std::isfinite(ll)) throw Error(Errc::NonFiniteLikelihood, "log-likelihood is not finite");
    resp = std::move(step.resp);
    // EM ascent holds exactly only without the diagonal regularizer.
    assert(cfg.reg > 0.0 || just_reinitialized || ll >= ll_prev - 1e-8);
    just_reinitialized = false;
    tr.log_likelihood.push_back(ll);

    if (iter > 1 && std::abs(ll - ll_prev) <= cfg.tol * std::abs(ll)) {
      converged = true;
      break;
    }
    ll_prev = ll;

    // M-step
    const Eigen::RowVector2d nk = resp.colwise().sum();
    bool reinit = false;
    for (int k = 0; k < 2; ++k) {
      if (nk(k) < 1e-12) {
        if (reinit_left-- <= 0) throw Error(Errc::DegenerateComponent, "a component lost all responsibility twice");
        comp[k] = {0.5, x.row(pick(rng)).transpose(), pooled};
        comp[1 - k].weight = 0.5;
        ++tr.reinitializations;
        reinit = true;
      }
    }
    if (reinit) {
      just_reinitialized = true;
      continue;
    }

    Matrix shared = Matrix::Zero(n, n);
    for (int k = 0; k < 2; ++k) {
      comp[k].weight = nk(k) / static_cast<double>(m);
      comp[k].mean = (x.transpose() * resp.col(k)) / nk(k);
      const Points c = x.rowwise() - comp[k].mean.transpose();
      const Matrix s = c.transpose() * resp.col(k).asDiagonal() * c;
      if (cfg.covariance_mode == CovarianceMode::FullPerComponent)
        comp[k].cov = s / nk(k) + reg;
      else
        shared += s;
    }
    if (cfg.covariance_mode == CovarianceMode::Shared)
      for (auto& c : comp) c.cov = shared / static_cast<double>(m) + reg;
    for (const auto& c : comp)
      if (!c.mean.allFinite() || !c.cov.allFinite())
        throw Error(Errc::NonFiniteLikelihood, "parameters became non-finite");
  }

  const int big = comp[0].weight >= comp[1].weight ? 0 : 1;
  EstimationResult out;
  out.mu1_hat = comp[big].mean;
  out.mu2_hat = comp[1 - big].mean;
  out.sigma_hat = comp[0].weight * comp[0].cov + comp[1].weight * comp[1].cov;
  out.sigma_hat = 0.5 * (out.sigma_hat + out.sigma_hat.transpose()).eval();
  out.diagnostics["em_iterations"] = std::min(iter, cfg.max_iters);
  out.diagnostics["em_converged"] = converged ? 1.0 : 0.0;
  out.diagnostics["em_log_likelihood"] = tr.log_likelihood.empty() ? 0.0 : tr.log_likelihood.back();
  out.diagnostics["em_weight1"] = comp[big].weight;
  out.diagnostics["em_weight2"] = comp[1 - big].weight;
  out.diagnostics["em_reinitializations"] = tr.reinitializations;
  return out;
}

}  // namespace robgmm
