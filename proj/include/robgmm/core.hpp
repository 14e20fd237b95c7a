#pragma once

// Shared vocabulary: matrix aliases, the error type, RNG plumbing and the
// order-statistic helpers every estimator in the library leans on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robgmm {

/// Point clouds are stored row-wise: one sample per row, one coordinate per column.
using Points = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// 64-bit Mersenne twister. The engine's output sequence is fixed by the
/// standard, so seeded runs are reproducible across toolchains.
using Rng = std::mt19937_64;

enum class Errc {
  // validation
  WeightOrderViolation,
  WeightSumViolation,
  NonPositiveDefiniteCovariance,
  DimensionMismatch,
  InvalidConfig,
  FractionOutOfRange,
  EmptyInput,
  TooFewSamples,
  NotSpherical,
  // numerical
  SingularCovariance,
  DegenerateComponent,
  NonFiniteLikelihood,
  // input / output
  ParseError,
  IoError,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::WeightOrderViolation: return "WeightOrderViolation";
    case Errc::WeightSumViolation: return "WeightSumViolation";
    case Errc::NonPositiveDefiniteCovariance: return "NonPositiveDefiniteCovariance";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::FractionOutOfRange: return "FractionOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NotSpherical: return "NotSpherical";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::DegenerateComponent: return "DegenerateComponent";
    case Errc::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

inline bool is_io_error(Errc code) { return code == Errc::ParseError || code == Errc::IoError; }

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t offset) {
  return mix64(master ^ mix64(offset + 1));
}

/// Type-1 sample quantile: the order statistic at rank ceil(q*m) (1-based),
/// clamped to [1, m].
inline double quantile_type1(std::vector<double> values, double q) {
  if (values.empty()) throw Error(Errc::EmptyInput, "quantile of an empty sample");
  const auto m = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m)));
  rank = std::clamp<std::size_t>(rank, 1, m);
  auto it = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

/// Sample median; even counts average the two middle order statistics.
inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "median of an empty sample");
  const auto m = values.size();
  auto upper = values.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(values.begin(), upper, values.end());
  if (m % 2 == 1) return *upper;
  const double hi = *upper;
  const double lo = *std::max_element(values.begin(), upper);
  return 0.5 * (lo + hi);
}

inline std::vector<double> column_values(const Points& points, Eigen::Index col) {
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[static_cast<std::size_t>(i)] = points(i, col);
  return out;
}

inline Vector coordinatewise_median(const Points& points) {
  Vector a(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) a(j) = median(column_values(points, j));
  return a;
}

inline Points select_rows(const Points& points, std::span<const Eigen::Index> rows) {
  Points out(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Mean and sample standard deviation (ddof = 1; zero for a single value).
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace robgmm
