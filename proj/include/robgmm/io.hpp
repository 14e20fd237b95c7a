#pragma once

// Flat-file plumbing: dataset CSV, result/report JSON, model JSON, the
// key = value benchmark config and the campaign CSV tables.

#include "robgmm/bench.hpp"
#include "robgmm/theory.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace robgmm {

using Json = nlohmann::ordered_json;

/// 17 significant digits: enough for an exact double round trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] inline void parse_error(std::size_t line, const std::string& what) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace detail

// ---------------------------------------------------------------- datasets

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  ds.validate();
  const auto n = ds.dim();
  for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << 'x' << (j + 1);
  if (ds.labels) os << ",label";
  os << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << format_double(ds.points(i, j));
    if (ds.labels) os << ',' << label_name((*ds.labels)[static_cast<std::size_t>(i)]);
    os << '\n';
  }
}

/// Header must be x1,...,xn with an optional trailing label column. Blank
/// lines are skipped; every other malformed line is a ParseError naming it.
inline Dataset read_dataset(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw Error(Errc::EmptyInput, "dataset CSV has no header");

  const auto header = detail::split(line, ',');
  const bool labeled = header.back() == "label";
  const std::size_t n = header.size() - (labeled ? 1 : 0);
  if (n == 0) detail::parse_error(lineno, "header has no coordinate columns");
  for (std::size_t j = 0; j < n; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      detail::parse_error(lineno, "expected column x" + std::to_string(j + 1) + ", found '" + std::string(header[j]) + "'");

  std::vector<double> values;
  std::vector<Label> labels;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != header.size())
      detail::parse_error(lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[j], v)) detail::parse_error(lineno, "bad number '" + std::string(fields[j]) + "'");
      values.push_back(v);
    }
    if (labeled) {
      const auto l = parse_label(std::string(fields[n]));
      if (!l) detail::parse_error(lineno, "unknown label '" + std::string(fields[n]) + "'");
      labels.push_back(*l);
    }
  }
  const auto m = static_cast<Eigen::Index>(values.size() / n);
  Dataset ds;
  ds.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), m, static_cast<Eigen::Index>(n));
  if (labeled) ds.labels = std::move(labels);
  return ds;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open " + path.string() + " for reading");
  return is;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  return os;
}

inline void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw Error(Errc::IoError, "write to " + path.string() + " failed");
}

inline Dataset read_dataset(const std::filesystem::path& path) {
  auto is = open_input(path);
  return read_dataset(is);
}

inline void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto os = open_output(path);
  write_dataset(os, ds);
  finish(os, path);
}

// -------------------------------------------------------------------- JSON

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Row-major nested arrays.
inline Json to_json(const Matrix& a) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(Errc::ParseError, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(Errc::ParseError, std::string(what) + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(Errc::ParseError, std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_from_json(j[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) throw Error(Errc::DimensionMismatch, std::string(what) + " rows differ in length");
    a.row(i) = r.transpose();
  }
  return a;
}

inline double number_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw Error(Errc::ParseError, std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

inline Json model_to_json(const MixtureModel& m) {
  return Json{{"w1", m.w1}, {"w2", m.w2}, {"w3", m.w3},
              {"mu1", to_json(m.mu1)}, {"mu2", to_json(m.mu2)}, {"sigma", to_json(m.sigma)}};
}

/// Parses and structurally validates a model (weights, dimensions, PD sigma).
inline MixtureModel model_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "model JSON must be an object");
  MixtureModel m;
  m.w1 = number_field(j, "w1");
  m.w2 = number_field(j, "w2");
  m.w3 = number_field(j, "w3");
  if (!j.contains("mu1") || !j.contains("mu2") || !j.contains("sigma"))
    throw Error(Errc::ParseError, "model JSON needs mu1, mu2 and sigma");
  m.mu1 = vector_from_json(j["mu1"], "mu1");
  m.mu2 = vector_from_json(j["mu2"], "mu2");
  m.sigma = matrix_from_json(j["sigma"], "sigma");
  validate_model_structure(m);
  return m;
}

inline Json parse_json(std::istream& is, const std::string& where) {
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, where + ": " + e.what());
  }
}

inline MixtureModel read_model(const std::filesystem::path& path) {
  auto is = open_input(path);
  return model_from_json(parse_json(is, path.string()));
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

inline Json to_json(const AgnosticConfig& c) {
  return Json{{"eta", c.eta},
              {"epsilon", c.epsilon},
              {"damping_c", c.damping_c},
              {"branch", branch_name(c.branch)},
              {"sigma_floor", c.sigma_floor}};
}

inline Json to_json(const Alg1Config& c) {
  Json first = to_json(c.agnostic);
  first.erase("eta");  // always 1 - w1_input
  return Json{{"w1_input", c.w1_input},
              {"first_eta", 1.0 - c.w1_input},
              {"agnostic", std::move(first)},
              {"second_eta_scale", c.second_eta_scale},
              {"second_eta", c.second_eta_scale * (1.0 - c.w1_input)},
              {"second_branch", branch_name(c.second_branch)},
              {"cov_branch", "general"},
              {"rank_rule", "k = clamp(round(m * w1_input), 1, m - 1)"},
              {"cutoff", "inclusive"},
              {"scoring_covariance", "full sample"}};
}

inline const char* init_name(EmInit i) { return i == EmInit::RandomPoints ? "random_points" : "kmeans_like"; }
inline const char* covariance_mode_name(CovarianceMode c) {
  return c == CovarianceMode::FullPerComponent ? "full_per_component" : "shared";
}
inline const char* allocation_name(Allocation a) {
  return a == Allocation::Multinomial ? "multinomial" : "exact_counts";
}

inline Json to_json(const EmConfig& c) {
  return Json{{"k", 2},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"reg", c.reg},
              {"init", init_name(c.init)},
              {"seed", c.seed},
              {"covariance_mode", covariance_mode_name(c.covariance_mode)}};
}

inline Json to_json(const NoiseModel& nm) {
  Json out{{"kind", noise_kind_name(nm.kind)}};
  if (nm.kind == NoiseKind::Cauchy) {
    out["scale"] = nm.scale;
    if (nm.location) out["location"] = to_json(*nm.location);
  } else if (nm.kind == NoiseKind::PointMass) {
    out["point"] = to_json(nm.point);
  }
  return out;
}

inline Json to_json(const BenchmarkConfig& c) {
  Json dims = Json::array(), methods = Json::array(), alphas = Json::array();
  for (auto n : c.dims) dims.push_back(n);
  for (auto m : c.methods) methods.push_back(method_name(m));
  for (double a : c.alpha_grid) alphas.push_back(a);
  Json out{{"w1", c.w1},
           {"w2", c.w2},
           {"w3", c.w3},
           {"m", c.m},
           {"dims", dims},
           {"reps", c.reps},
           {"methods", methods},
           {"noise", to_json(c.noise)},
           {"allocation", allocation_name(c.allocation)},
           {"alpha_grid", alphas},
           {"seed", c.seed},
           {"separation_factor", c.separation_factor},
           {"cell_seed", "seed ^ mix64((n << 32) ^ rep)"},
           {"alg1", to_json(c.alg1)},
           {"em", to_json(c.em)}};
  out["alg1"].erase("w1_input");
  out["alg1"].erase("first_eta");
  out["alg1"].erase("second_eta");
  out["em"].erase("seed");
  out["em"]["seed_rule"] = "substream(cell seed, 17)";
  out["model"] = c.model ? model_to_json(*c.model) : Json(nullptr);
  return out;
}

inline Json result_to_json(const EstimationResult& r, Json config_echo) {
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  return Json{{"mu1_hat", to_json(r.mu1_hat)},
              {"mu2_hat", to_json(r.mu2_hat)},
              {"sigma_hat", to_json(r.sigma_hat)},
              {"diagnostics", std::move(diag)},
              {"config_echo", std::move(config_echo)}};
}

inline Json to_json(const SeparationConstants& c) {
  return Json{{"c", c.c}, {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c1_prime", c.c1_prime}};
}

inline Json report_to_json(const SeparationReport& rep, Json config_echo) {
  Json conds = Json::array();
  for (const auto& c : rep.conditions)
    conds.push_back(Json{{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"satisfied", c.satisfied}});
  Json bounds = Json::object(), spectrum = Json::object();
  for (const auto& [k, v] : rep.sample_bounds) bounds[k] = v;
  for (const auto& [k, v] : rep.spectrum) spectrum[k] = v;
  return Json{{"regime", rep.regime},
              {"lambda", rep.lambda},
              {"delta", rep.delta},
              {"all_satisfied", rep.all_satisfied()},
              {"conditions", std::move(conds)},
              {"sample_bounds", std::move(bounds)},
              {"spectrum", std::move(spectrum)},
              {"config_echo", std::move(config_echo)}};
}

// --------------------------------------------------------- benchmark config

namespace detail {

inline double to_double(std::string_view v, std::size_t line) {
  double out = 0.0;
  if (!parse_double(v, out)) parse_error(line, "bad number '" + std::string(v) + "'");
  return out;
}

inline long long to_int(std::string_view v, std::size_t line) {
  long long out = 0;
  v = trim(v);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    parse_error(line, "bad integer '" + std::string(v) + "'");
  return out;
}

inline std::vector<double> to_doubles(std::string_view v, std::size_t line) {
  std::vector<double> out;
  for (auto f : split(v, ',')) out.push_back(to_double(f, line));
  return out;
}

inline AgnosticBranch to_branch(std::string_view v, std::size_t line) {
  if (v == "gaussian") return AgnosticBranch::Gaussian;
  if (v == "general") return AgnosticBranch::General;
  parse_error(line, "branch must be gaussian or general");
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment and `[section]` prefixes
/// the keys that follow with `section.`. Recognized keys:
///   w1 w2 w3 m dims reps methods seed separation_factor alpha_grid
///   allocation (multinomial|exact_counts) model (JSON path, relative to base_dir)
///   noise (cauchy|point_mass) noise.scale noise.location noise.point
///   alg1.epsilon alg1.damping_c alg1.branch alg1.sigma_floor
///   alg1.second_eta_scale alg1.second_branch
///   em.max_iters em.tol em.reg em.init em.covariance_mode
inline BenchmarkConfig parse_benchmark_config(std::istream& is, const std::filesystem::path& base_dir = {}) {
  BenchmarkConfig cfg;
  std::optional<Vector> point;
  std::optional<Vector> location;
  std::optional<double> scale;
  std::string kind = "cauchy";
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view s(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') detail::parse_error(line, "unterminated section header");
      section = std::string(detail::trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) detail::parse_error(line, "expected key = value");
    std::string key(detail::trim(s.substr(0, eq)));
    const std::string_view val = detail::trim(s.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (val.empty()) detail::parse_error(line, "empty value for '" + key + "'");

    if (key == "w1") cfg.w1 = detail::to_double(val, line);
    else if (key == "w2") cfg.w2 = detail::to_double(val, line);
    else if (key == "w3") cfg.w3 = detail::to_double(val, line);
    else if (key == "m") cfg.m = detail::to_int(val, line);
    else if (key == "reps") cfg.reps = static_cast<int>(detail::to_int(val, line));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::to_int(val, line));
    else if (key == "separation_factor") cfg.separation_factor = detail::to_double(val, line);
    else if (key == "alpha_grid") cfg.alpha_grid = detail::to_doubles(val, line);
    else if (key == "dims") {
      cfg.dims.clear();
      for (auto f : detail::split(val, ',')) cfg.dims.push_back(detail::to_int(f, line));
    } else if (key == "methods") {
      cfg.methods.clear();
      for (auto f : detail::split(val, ',')) {
        if (f == "alg1") cfg.methods.push_back(Method::Alg1);
        else if (f == "em") cfg.methods.push_back(Method::Em);
        else detail::parse_error(line, "unknown method '" + std::string(f) + "'");
      }
    } else if (key == "allocation") {
      if (val == "multinomial") cfg.allocation = Allocation::Multinomial;
      else if (val == "exact_counts") cfg.allocation = Allocation::ExactCounts;
      else detail::parse_error(line, "allocation must be multinomial or exact_counts");
    } else if (key == "model") {
      cfg.model = read_model(base_dir / std::filesystem::path(std::string(val)));
    } else if (key == "noise" || key == "noise.kind") {
      kind = std::string(val);
      if (kind != "cauchy" && kind != "point_mass") detail::parse_error(line, "noise must be cauchy or point_mass");
    } else if (key == "noise.scale") scale = detail::to_double(val, line);
    else if (key == "noise.point") {
      const auto v = detail::to_doubles(val, line);
      point = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (key == "noise.location") {
      const auto v = detail::to_doubles(val, line);
      location = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (key == "alg1.epsilon") cfg.alg1.agnostic.epsilon = detail::to_double(val, line);
    else if (key == "alg1.damping_c") cfg.alg1.agnostic.damping_c = detail::to_double(val, line);
    else if (key == "alg1.sigma_floor") cfg.alg1.agnostic.sigma_floor = detail::to_double(val, line);
    else if (key == "alg1.branch") cfg.alg1.agnostic.branch = detail::to_branch(val, line);
    else if (key == "alg1.second_eta_scale") cfg.alg1.second_eta_scale = detail::to_double(val, line);
    else if (key == "alg1.second_branch") cfg.alg1.second_branch = detail::to_branch(val, line);
    else if (key == "em.max_iters") cfg.em.max_iters = static_cast<int>(detail::to_int(val, line));
    else if (key == "em.tol") cfg.em.tol = detail::to_double(val, line);
    else if (key == "em.reg") cfg.em.reg = detail::to_double(val, line);
    else if (key == "em.init") {
      if (val == "random_points") cfg.em.init = EmInit::RandomPoints;
      else if (val == "kmeans_like") cfg.em.init = EmInit::KmeansLike;
      else detail::parse_error(line, "em.init must be random_points or kmeans_like");
    } else if (key == "em.covariance_mode") {
      if (val == "full_per_component") cfg.em.covariance_mode = CovarianceMode::FullPerComponent;
      else if (val == "shared") cfg.em.covariance_mode = CovarianceMode::Shared;
      else detail::parse_error(line, "em.covariance_mode must be full_per_component or shared");
    } else {
      detail::parse_error(line, "unknown key '" + key + "'");
    }
  }
  if (kind == "point_mass") {
    if (!point) throw Error(Errc::InvalidConfig, "point_mass noise needs noise.point");
    cfg.noise = NoiseModel::point_mass(*point);
  } else {
    cfg.noise = NoiseModel::cauchy(scale.value_or(1.0));
    cfg.noise.location = location;
  }
  cfg.validate();
  return cfg;
}

inline BenchmarkConfig read_benchmark_config(const std::filesystem::path& path) {
  auto is = open_input(path);
  return parse_benchmark_config(is, path.parent_path());
}

// ------------------------------------------------------------ campaign CSVs

namespace detail {

inline std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace detail

/// One row per record. Absent sampling errors (unlabeled data) and the
/// metrics of failed records are empty fields; runtime only on request.
inline void write_records_csv(std::ostream& os, const std::vector<BenchmarkRecord>& records, bool timing = false) {
  os << "n,rep,seed,method,alpha,status,err_mu1,err_mu2,err_total,true_err_mu1,true_err_mu2";
  if (timing) os << ",runtime_ms";
  os << '\n';
  for (const auto& r : records) {
    os << r.n << ',' << r.rep << ',' << r.seed << ',' << method_name(r.method) << ',' << format_double(r.alpha) << ','
       << (r.ok ? "ok" : r.failure) << ',';
    if (r.ok)
      os << format_double(r.err_mu1) << ',' << format_double(r.err_mu2) << ',' << format_double(r.err_total);
    else
      os << ",,";
    os << ',' << detail::optional_field(r.true_err_mu1) << ',' << detail::optional_field(r.true_err_mu2);
    if (timing) os << ',' << format_double(r.runtime_ms);
    os << '\n';
  }
}

/// mean/std columns use ddof = 1 (std is 0 for a single record) and are
/// empty for a cell whose records all failed.
inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateCell>& table) {
  os << "n,method,alpha,count,failed,err_mu1_mean,err_mu1_std,err_mu2_mean,err_mu2_std,err_total_mean,err_total_std\n";
  for (const auto& c : table) {
    os << c.n << ',' << method_name(c.method) << ',' << format_double(c.alpha) << ',' << c.err_total.count << ','
       << c.failed;
    for (const auto* s : {&c.err_mu1, &c.err_mu2, &c.err_total}) {
      if (s->count == 0)
        os << ",,";
      else
        os << ',' << format_double(s->mean) << ',' << format_double(s->std);
    }
    os << '\n';
  }
}

inline void write_records_csv(const std::filesystem::path& path, const std::vector<BenchmarkRecord>& records,
                              bool timing = false) {
  auto os = open_output(path);
  write_records_csv(os, records, timing);
  finish(os, path);
}

inline void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateCell>& table) {
  auto os = open_output(path);
  write_aggregate_csv(os, table);
  finish(os, path);
}

}  // namespace robgmm
