#pragma once

// Benchmark campaigns: seeded datasets per (n, rep) cell, both estimators,
// permutation-scored errors and mean(std) aggregation.

#include "robgmm/em.hpp"
#include "robgmm/gmm2.hpp"
#include "robgmm/synthdata.hpp"
#include "robgmm/theory.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace robgmm {

enum class Method { Alg1, Em };

inline const char* method_name(Method m) { return m == Method::Alg1 ? "alg1" : "em"; }

struct BenchmarkConfig {
  double w1 = 0.8;
  double w2 = 0.16;
  double w3 = 0.04;
  Eigen::Index m = 10000;
  std::vector<Eigen::Index> dims{10};
  int reps = 10;
  std::vector<Method> methods{Method::Alg1, Method::Em};
  NoiseModel noise = NoiseModel::cauchy();
  Allocation allocation = Allocation::Multinomial;
  std::vector<double> alpha_grid{0.5, 0.67, 0.83, 1.0, 1.17, 1.33, 1.5};
  std::uint64_t seed = 1;
  /// Stand-in model: lambda = separation_factor * ratio-separation bound.
  double separation_factor = 4.0;
  /// Used verbatim for the dimension it matches; other dims get the stand-in.
  std::optional<MixtureModel> model;
  Alg1Config alg1;
  EmConfig em;

  void validate() const {
    if (reps < 1) throw Error(Errc::InvalidConfig, "reps must be at least 1");
    if (dims.empty()) throw Error(Errc::InvalidConfig, "dims must not be empty");
    if (methods.empty()) throw Error(Errc::InvalidConfig, "at least one method is required");
    if (m < 4) throw Error(Errc::InvalidConfig, "m must be at least 4");
    for (auto n : dims)
      if (n < 1) throw Error(Errc::InvalidConfig, "dimensions must be positive");
    for (double a : alpha_grid) {
      const double w1p = 1.0 - a * (1.0 - w1);
      if (!(a > 0.0) || !(w1p > 0.0 && w1p < 1.0))
        throw Error(Errc::InvalidConfig, "alpha values must be positive with 1 - alpha(1 - w1) in (0, 1)");
    }
    if (!(separation_factor > 0.0)) throw Error(Errc::InvalidConfig, "separation_factor must be positive");
    if (model) validate_model(*model);
  }
};

/// Default model for dimension n: mu1 = 0, sigma = I and mu2 along the
/// all-ones diagonal at the distance that makes lambda equal
/// separation_factor times the ratio-separation bound.
inline MixtureModel standin_model(Eigen::Index n, double w1, double w2, double w3, double separation_factor) {
  MixtureModel mm;
  mm.w1 = w1;
  mm.w2 = w2;
  mm.w3 = w3;
  mm.mu1 = Vector::Zero(n);
  const double lambda = separation_factor * first_separation_rhs(n, w1, w2);
  mm.mu2 = Vector::Constant(n, std::sqrt(lambda / static_cast<double>(n)));
  mm.sigma = Matrix::Identity(n, n);
  return mm;
}

inline MixtureModel model_for(const BenchmarkConfig& cfg, Eigen::Index n) {
  if (cfg.model && cfg.model->dim() == n) return *cfg.model;
  return standin_model(n, cfg.w1, cfg.w2, cfg.w3, cfg.separation_factor);
}

/// master XOR a stable hash of (n, rep); independent of which dims run.
inline std::uint64_t cell_seed(std::uint64_t master, Eigen::Index n, int rep) {
  return master ^ mix64((static_cast<std::uint64_t>(n) << 32) ^ static_cast<std::uint64_t>(rep));
}

struct BenchmarkRecord {
  Eigen::Index n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  Method method = Method::Alg1;
  double alpha = 1.0;
  bool ok = true;
  std::string failure;
  double err_mu1 = 0.0;
  double err_mu2 = 0.0;
  double err_total = 0.0;
  std::optional<double> true_err_mu1;
  std::optional<double> true_err_mu2;
  double runtime_ms = 0.0;
};

/// Label-oracle sampling errors |mean(G_k) - mu_k|; absent without labels.
inline std::pair<std::optional<double>, std::optional<double>> sampling_errors(const Dataset& ds,
                                                                               const MixtureModel& truth) {
  auto err = [&](Label l, const Vector& mu) -> std::optional<double> {
    const auto idx = ds.indices_of(l);
    if (idx.empty()) return std::nullopt;
    return (select_rows(ds.points, idx).colwise().mean().transpose() - mu).norm();
  };
  return {err(Label::G1, truth.mu1), err(Label::G2, truth.mu2)};
}

inline Dataset cell_dataset(const BenchmarkConfig& cfg, const MixtureModel& truth, std::uint64_t seed) {
  GenerationConfig g;
  g.model = truth;
  g.m = cfg.m;
  g.noise = cfg.noise;
  g.seed = seed;
  g.allocation = cfg.allocation;
  return generate(g);
}

inline BenchmarkRecord run_method(const Dataset& ds, const MixtureModel& truth, const BenchmarkConfig& cfg,
                                  Method method, double w1_input, std::uint64_t seed) {
  BenchmarkRecord rec;
  rec.method = method;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    EstimationResult est;
    if (method == Method::Alg1) {
      Alg1Config a = cfg.alg1;
      a.w1_input = w1_input;
      est = estimate_alg1(ds.points, a);
    } else {
      EmConfig e = cfg.em;
      e.seed = substream_seed(seed, 17);
      est = estimate_em(ds.points, e);
    }
    const auto br = estimation_error_breakdown(est, truth);
    rec.err_mu1 = br.err_mu1;
    rec.err_mu2 = br.err_mu2;
    rec.err_total = br.total;
  } catch (const Error& e) {
    rec.ok = false;
    rec.failure = errc_name(e.code());
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const auto [t1, t2] = sampling_errors(ds, truth);
  rec.true_err_mu1 = t1;
  rec.true_err_mu2 = t2;
  return rec;
}

struct AggregateCell {
  Eigen::Index n = 0;
  Method method = Method::Alg1;
  double alpha = 1.0;
  std::size_t failed = 0;
  MeanStd err_mu1;
  MeanStd err_mu2;
  MeanStd err_total;
};

/// Groups successful records by (n, method, alpha); failures are counted, not
/// averaged.
inline std::vector<AggregateCell> aggregate(const std::vector<BenchmarkRecord>& records) {
  std::map<std::tuple<Eigen::Index, int, double>, std::vector<const BenchmarkRecord*>> groups;
  for (const auto& r : records) groups[{r.n, static_cast<int>(r.method), r.alpha}].push_back(&r);
  std::vector<AggregateCell> out;
  for (const auto& [key, recs] : groups) {
    AggregateCell cell;
    cell.n = std::get<0>(key);
    cell.method = static_cast<Method>(std::get<1>(key));
    cell.alpha = std::get<2>(key);
    std::vector<double> e1, e2, et;
    for (const auto* r : recs) {
      if (!r->ok) {
        ++cell.failed;
        continue;
      }
      e1.push_back(r->err_mu1);
      e2.push_back(r->err_mu2);
      et.push_back(r->err_total);
    }
    cell.err_mu1 = mean_std(e1);
    cell.err_mu2 = mean_std(e2);
    cell.err_total = mean_std(et);
    out.push_back(cell);
  }
  return out;
}

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  std::vector<AggregateCell> table;
};

/// One record per (n, rep, method), ordered by n, then rep, then method.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  BenchmarkResult out;
  for (auto n : cfg.dims) {
    const MixtureModel truth = model_for(cfg, n);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto seed = cell_seed(cfg.seed, n, rep);
      const Dataset ds = cell_dataset(cfg, truth, seed);
      for (auto method : cfg.methods) {
        auto rec = run_method(ds, truth, cfg, method, truth.w1, seed);
        rec.n = n;
        rec.rep = rep;
        out.records.push_back(std::move(rec));
      }
    }
  }
  out.table = aggregate(out.records);
  return out;
}

/// Algorithm-1 error as the w1 fed to it is distorted:
/// w1_input = 1 - alpha (1 - w1). Every alpha reuses the same datasets.
inline BenchmarkResult run_sensitivity(const BenchmarkConfig& cfg) {
  cfg.validate();
  if (cfg.alpha_grid.empty()) throw Error(Errc::InvalidConfig, "sensitivity needs an alpha grid");
  BenchmarkResult out;
  for (auto n : cfg.dims) {
    const MixtureModel truth = model_for(cfg, n);
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto seed = cell_seed(cfg.seed, n, rep);
      const Dataset ds = cell_dataset(cfg, truth, seed);
      for (double alpha : cfg.alpha_grid) {
        const double w1_input = alpha == 1.0 ? truth.w1 : 1.0 - alpha * (1.0 - truth.w1);
        auto rec = run_method(ds, truth, cfg, Method::Alg1, w1_input, seed);
        rec.n = n;
        rec.rep = rep;
        rec.alpha = alpha;
        out.records.push_back(std::move(rec));
      }
    }
  }
  out.table = aggregate(out.records);
  return out;
}

}  // namespace robgmm
