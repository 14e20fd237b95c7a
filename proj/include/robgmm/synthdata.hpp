#pragma once

// Seeded generation of noisy two-component mixtures.
//
// Every dataset is driven by one master seed. Component labels, G1 draws, G2
// draws and noise draws each come from their own substream, so swapping the
// noise model leaves the Gaussian samples untouched.

#include "robgmm/model.hpp"

#include <boost/random/cauchy_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <array>
#include <functional>
#include <utility>

namespace robgmm {

enum class NoiseKind { Cauchy, PointMass, External };

struct NoiseModel {
  NoiseKind kind = NoiseKind::Cauchy;
  Vector point;             // PointMass only
  double scale = 1.0;       // Cauchy only
  std::optional<Vector> location;  // Cauchy only; zero vector when absent
  /// External only: fills one noise point of the requested dimension.
  std::function<void(Eigen::Ref<Vector>, Rng&)> sampler;

  static NoiseModel cauchy(double scale = 1.0) { return {NoiseKind::Cauchy, {}, scale, std::nullopt, {}}; }
  static NoiseModel point_mass(Vector p) { return {NoiseKind::PointMass, std::move(p), 1.0, std::nullopt, {}}; }
};

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Cauchy: return "cauchy";
    case NoiseKind::PointMass: return "point_mass";
    case NoiseKind::External: return "external";
  }
  return "?";
}

enum class Allocation { Multinomial, ExactCounts };

struct GenerationConfig {
  MixtureModel model;
  Eigen::Index m = 0;
  NoiseModel noise;
  std::uint64_t seed = 0;
  Allocation allocation = Allocation::Multinomial;
};

/// Largest-remainder rounding of m * w so the three counts sum to m.
inline std::array<Eigen::Index, 3> exact_counts(Eigen::Index m, const std::array<double, 3>& w) {
  std::array<Eigen::Index, 3> counts{};
  std::array<double, 3> remainder{};
  Eigen::Index assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double target = static_cast<double>(m) * w[i];
    counts[i] = static_cast<Eigen::Index>(std::floor(target));
    remainder[i] = target - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < m; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

inline void validate_generation(const GenerationConfig& cfg) {
  try {
    validate_model_structure(cfg.model);
  } catch (const Error& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  if (cfg.m < 1) throw Error(Errc::InvalidConfig, "sample count must be positive");
  const auto n = cfg.model.dim();
  const auto& noise = cfg.noise;
  if (noise.kind == NoiseKind::PointMass && noise.point.size() != n)
    throw Error(Errc::InvalidConfig, "point-mass noise location has the wrong dimension");
  if (noise.kind == NoiseKind::Cauchy) {
    if (!(noise.scale > 0.0)) throw Error(Errc::InvalidConfig, "Cauchy scale must be positive");
    if (noise.location && noise.location->size() != n)
      throw Error(Errc::InvalidConfig, "Cauchy location has the wrong dimension");
  }
  if (noise.kind == NoiseKind::External && !noise.sampler)
    throw Error(Errc::InvalidConfig, "external noise requires a sampler");
  if (cfg.allocation == Allocation::ExactCounts) {
    const std::array<double, 3> w{cfg.model.w1, cfg.model.w2, cfg.model.w3};
    for (double wi : w)
      if (std::llround(static_cast<double>(cfg.m) * wi) < 1)
        throw Error(Errc::InvalidConfig, "exact allocation needs round(m*w_i) >= 1 for every component");
  }
}

/// `count` points with i.i.d. Cauchy(location_j, scale) coordinates.
inline Points sample_cauchy(Eigen::Index n, double scale, const Vector& location, Eigen::Index count, Rng& rng) {
  Points out(std::max<Eigen::Index>(count, 0), n);
  boost::random::cauchy_distribution<double> cauchy(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = location(j) + scale * cauchy(rng);
  return out;
}

namespace detail {

class GaussianSampler {
 public:
  GaussianSampler(const Vector& mean, const Matrix& sigma, std::uint64_t seed)
      : mean_(mean), factor_(sigma.llt().matrixL()), rng_(seed), z_(mean.size()) {}

  void draw(Eigen::Ref<Vector> out) {
    for (Eigen::Index j = 0; j < z_.size(); ++j) z_(j) = normal_(rng_);
    out = mean_ + factor_ * z_;
  }

 private:
  Vector mean_;
  Matrix factor_;
  Rng rng_;
  Vector z_;
  boost::random::normal_distribution<double> normal_;
};

enum Substream : std::uint64_t { kLabels = 0, kG1 = 1, kG2 = 2, kNoise = 3 };

}  // namespace detail

/// Draws a fully labeled dataset. Gaussian points are mean + L z with L the
/// Cholesky factor of sigma and z i.i.d. standard normal.
inline Dataset generate(const GenerationConfig& cfg) {
  validate_generation(cfg);
  const auto& model = cfg.model;
  const auto n = model.dim();
  const auto m = cfg.m;

  Rng label_rng(substream_seed(cfg.seed, detail::kLabels));
  std::vector<Label> labels(static_cast<std::size_t>(m));
  if (cfg.allocation == Allocation::Multinomial) {
    boost::random::uniform_01<double> u01;
    for (auto& l : labels) {
      const double u = u01(label_rng);
      l = u < model.w1 ? Label::G1 : (u < model.w1 + model.w2 ? Label::G2 : Label::Noise);
    }
  } else {
    const auto counts = exact_counts(m, {model.w1, model.w2, model.w3});
    std::size_t pos = 0;
    for (std::size_t c = 0; c < 3; ++c)
      for (Eigen::Index k = 0; k < counts[c]; ++k) labels[pos++] = static_cast<Label>(c);
    // Fisher-Yates with a portable integer distribution.
    for (std::size_t i = labels.size(); i > 1; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(labels[i - 1], labels[pick(label_rng)]);
    }
  }

  detail::GaussianSampler g1(model.mu1, model.sigma, substream_seed(cfg.seed, detail::kG1));
  detail::GaussianSampler g2(model.mu2, model.sigma, substream_seed(cfg.seed, detail::kG2));
  Rng noise_rng(substream_seed(cfg.seed, detail::kNoise));
  const Vector cauchy_loc = cfg.noise.location.value_or(Vector::Zero(n));

  Dataset ds;
  ds.points.resize(m, n);
  ds.seed = cfg.seed;
  Vector buf(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    switch (labels[static_cast<std::size_t>(i)]) {
      case Label::G1: g1.draw(buf); break;
      case Label::G2: g2.draw(buf); break;
      case Label::Noise:
        switch (cfg.noise.kind) {
          case NoiseKind::Cauchy:
            buf = sample_cauchy(n, cfg.noise.scale, cauchy_loc, 1, noise_rng).row(0).transpose();
            break;
          case NoiseKind::PointMass: buf = cfg.noise.point; break;
          case NoiseKind::External: cfg.noise.sampler(buf, noise_rng); break;
        }
        break;
    }
    ds.points.row(i) = buf.transpose();
  }
  ds.labels = std::move(labels);
  return ds;
}

}  // namespace robgmm
