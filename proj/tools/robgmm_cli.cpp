// robgmm: dataset generation, single estimates, benchmark campaigns, the
// w1-sensitivity sweep and separation reports from the command line.
//
// Exit status: 0 success, 1 validation or usage error, 2 I/O error.

#include "robgmm/robgmm.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

using namespace robgmm;

std::optional<Vector> parse_vector(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::vector<double> v;
  for (auto f : robgmm::detail::split(s, ',')) {
    double x = 0.0;
    if (!robgmm::detail::parse_double(f, x)) throw Error(Errc::InvalidConfig, "bad number '" + std::string(f) + "'");
    v.push_back(x);
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

AgnosticBranch parse_branch(const std::string& s) {
  return s == "general" ? AgnosticBranch::General : AgnosticBranch::Gaussian;
}

void emit_json(const std::string& out, const Json& j) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json(out, j);
}

MixtureModel two_cluster_model() {
  MixtureModel m;
  m.w1 = 20.0 / 41.0;
  m.w2 = 20.0 / 41.0;
  m.w3 = 1.0 / 41.0;
  m.mu1 = Vector{{1.0, 2.0}};
  m.mu2 = Vector{{3.0, 5.0}};
  m.sigma = Matrix::Identity(2, 2);
  return m;
}

struct GenOptions {
  std::string model_path;
  std::string preset;
  std::string out;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  std::string noise = "cauchy";
  double noise_scale = 1.0;
  std::string noise_point;
  std::string noise_location;
  std::string allocation = "multinomial";
  // Which of the above were given explicitly; they override a preset.
  bool has_m = false, has_noise = false, has_allocation = false;
};

int run_gen(const GenOptions& o) {
  GenerationConfig g;
  g.noise = NoiseModel::cauchy(o.noise_scale);
  g.noise.location = parse_vector(o.noise_location);
  g.allocation = o.allocation == "exact_counts" ? Allocation::ExactCounts : Allocation::Multinomial;
  if (o.preset == "two_cluster") {
    g.model = two_cluster_model();
    g.m = 41;
    if (!o.has_noise) g.noise = NoiseModel::point_mass(Vector{{6.0, 1.0}});
    if (!o.has_allocation) g.allocation = Allocation::ExactCounts;
  } else if (!o.model_path.empty()) {
    g.model = read_model(o.model_path);
  } else {
    throw Error(Errc::InvalidConfig, "gen needs --model or --preset two_cluster");
  }
  if (o.has_m) g.m = o.m;
  if (g.m <= 0) throw Error(Errc::InvalidConfig, "gen needs a positive --m");
  g.seed = o.seed;
  if (o.has_noise && o.noise == "point_mass") {
    const auto p = parse_vector(o.noise_point);
    if (!p) throw Error(Errc::InvalidConfig, "point_mass noise needs --noise-point");
    g.noise = NoiseModel::point_mass(*p);
  }

  const Dataset ds = generate(g);
  write_dataset(o.out, ds);
  write_json(o.out + ".meta.json",
             Json{{"config_echo",
                   Json{{"model", model_to_json(g.model)},
                        {"m", g.m},
                        {"seed", g.seed},
                        {"noise", to_json(g.noise)},
                        {"allocation", allocation_name(g.allocation)},
                        {"substreams", Json{{"labels", 0}, {"g1", 1}, {"g2", 2}, {"noise", 3}}}}}});
  return 0;
}

struct EstimateOptions {
  std::string input;
  std::string out;
  std::string method = "alg1";
  double w1 = -1.0;
  std::uint64_t seed = 0;
  std::string truth;
  bool timing = false;
  Alg1Config alg1;
  std::string branch = "general";
  std::string second_branch = "gaussian";
  EmConfig em;
  std::string em_init = "random_points";
  std::string covariance_mode = "full_per_component";
};

int run_estimate(EstimateOptions o) {
  const Dataset ds = read_dataset(o.input);
  EstimationResult r;
  Json echo{{"input", o.input}, {"method", o.method}, {"m", ds.size()}, {"n", ds.dim()}};
  const auto start = std::chrono::steady_clock::now();
  if (o.method == "alg1") {
    if (o.w1 < 0.0) throw Error(Errc::InvalidConfig, "alg1 needs --w1");
    o.alg1.w1_input = o.w1;
    o.alg1.agnostic.branch = parse_branch(o.branch);
    o.alg1.second_branch = parse_branch(o.second_branch);
    r = estimate_alg1(ds.points, o.alg1);
    echo["alg1"] = to_json(o.alg1);
  } else {
    o.em.seed = o.seed;
    o.em.init = o.em_init == "kmeans_like" ? EmInit::KmeansLike : EmInit::RandomPoints;
    o.em.covariance_mode =
        o.covariance_mode == "shared" ? CovarianceMode::Shared : CovarianceMode::FullPerComponent;
    r = estimate_em(ds.points, o.em);
    echo["em"] = to_json(o.em);
  }
  if (o.timing)
    r.diagnostics["runtime_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  Json out = result_to_json(r, echo);
  if (!o.truth.empty()) {
    const MixtureModel truth = read_model(o.truth);
    const auto br = estimation_error_breakdown(r, truth);
    out["error"] = Json{{"err_mu1", br.err_mu1}, {"err_mu2", br.err_mu2}, {"err_total", br.total}, {"swapped", br.swapped}};
    out["config_echo"]["truth"] = model_to_json(truth);
  }
  emit_json(o.out, out);
  return 0;
}

struct CampaignOptions {
  std::string config;
  std::string prefix;
  bool timing = false;
};

int run_campaign(const CampaignOptions& o, bool sensitivity) {
  const BenchmarkConfig cfg = read_benchmark_config(o.config);
  const BenchmarkResult res = sensitivity ? run_sensitivity(cfg) : run_benchmark(cfg);
  write_records_csv(o.prefix + "_records.csv", res.records, o.timing);
  write_aggregate_csv(o.prefix + "_aggregate.csv", res.table);
  Json echo = to_json(cfg);
  Json models = Json::object();
  for (auto n : cfg.dims) models[std::to_string(n)] = model_to_json(model_for(cfg, n));
  echo["models"] = std::move(models);
  echo["campaign"] = sensitivity ? "sensitivity" : "benchmark";
  write_json(o.prefix + "_meta.json", Json{{"config_echo", std::move(echo)}});
  return 0;
}

struct CheckOptions {
  std::string model_path;
  std::string out;
  std::string regime = "auto";
  double eta = 0.1;
  double epsilon = 0.1;
  SeparationConstants constants;
};

int run_check(const CheckOptions& o) {
  SeparationParams p;
  p.model = read_model(o.model_path);
  p.eta = o.eta;
  p.constants = o.constants;
  const bool spherical = o.regime == "spherical" || (o.regime == "auto" && is_spherical(p.model.sigma));
  const SeparationReport rep = spherical ? check_spherical_separation(p) : check_nonspherical_separation(p);
  Json echo{{"model", model_to_json(p.model)},
            {"eta", p.eta},
            {"epsilon", o.epsilon},
            {"regime_requested", o.regime},
            {"constants", to_json(p.constants)}};
  Json out = report_to_json(rep, std::move(echo));
  Json sc = Json::object();
  for (const auto& [k, v] : sample_complexity(p.model.dim(), o.epsilon, p.model.w1, p.model.w2, p.model.w3, spherical))
    sc[k] = v;
  out["sample_complexity"] = std::move(sc);
  emit_json(o.out, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust estimation for noisy two-component Gaussian mixtures"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Sample a labelled dataset to CSV");
  g->add_option("--model", gen.model_path, "Model JSON (w1, w2, w3, mu1, mu2, sigma)");
  g->add_option("--preset", gen.preset, "Built-in scenario instead of --model")->check(CLI::IsMember({"two_cluster"}));
  auto* gen_m = g->add_option("--m", gen.m, "Sample count");
  g->add_option("--seed", gen.seed, "Master seed");
  auto* gen_noise = g->add_option("--noise", gen.noise)->check(CLI::IsMember({"cauchy", "point_mass"}));
  g->add_option("--noise-scale", gen.noise_scale);
  g->add_option("--noise-point", gen.noise_point, "Comma-separated coordinates");
  g->add_option("--noise-location", gen.noise_location, "Comma-separated Cauchy location");
  auto* gen_alloc = g->add_option("--allocation", gen.allocation)->check(CLI::IsMember({"multinomial", "exact_counts"}));
  g->add_option("--out", gen.out, "Output CSV; metadata goes to <out>.meta.json")->required();

  EstimateOptions est;
  auto* e = app.add_subcommand("estimate", "Estimate both means and the shared covariance from a CSV");
  e->add_option("--input", est.input, "Dataset CSV")->required();
  e->add_option("--method", est.method)->check(CLI::IsMember({"alg1", "em"}));
  e->add_option("--w1", est.w1, "Dominant-component weight fed to alg1");
  e->add_option("--seed", est.seed, "EM initialization seed");
  e->add_option("--out", est.out, "Result JSON (stdout when omitted)");
  e->add_option("--truth", est.truth, "Model JSON; adds permutation-matched errors");
  e->add_flag("--timing", est.timing, "Record runtime_ms in diagnostics");
  e->add_option("--epsilon", est.alg1.agnostic.epsilon);
  e->add_option("--damping-c", est.alg1.agnostic.damping_c);
  e->add_option("--branch", est.branch, "First mean call")->check(CLI::IsMember({"gaussian", "general"}));
  e->add_option("--second-branch", est.second_branch)->check(CLI::IsMember({"gaussian", "general"}));
  e->add_option("--second-eta-scale", est.alg1.second_eta_scale);
  e->add_option("--em-max-iters", est.em.max_iters);
  e->add_option("--em-tol", est.em.tol);
  e->add_option("--em-reg", est.em.reg);
  e->add_option("--em-init", est.em_init)->check(CLI::IsMember({"random_points", "kmeans_like"}));
  e->add_option("--covariance-mode", est.covariance_mode)->check(CLI::IsMember({"full_per_component", "shared"}));

  CampaignOptions bench;
  auto* b = app.add_subcommand("bench", "Run a benchmark campaign");
  b->add_option("--config", bench.config, "key = value config file")->required();
  b->add_option("--out-prefix", bench.prefix, "Writes <prefix>_records.csv, _aggregate.csv, _meta.json")->required();
  b->add_flag("--timing", bench.timing, "Add a runtime_ms column to the records");

  CampaignOptions sens;
  auto* s = app.add_subcommand("sensitivity", "Sweep the w1 distortion ratio alpha");
  s->add_option("--config", sens.config, "key = value config file")->required();
  s->add_option("--out-prefix", sens.prefix, "Writes <prefix>_records.csv, _aggregate.csv, _meta.json")->required();
  s->add_flag("--timing", sens.timing, "Add a runtime_ms column to the records");

  CheckOptions chk;
  auto* c = app.add_subcommand("check", "Evaluate the separation conditions for a model");
  c->add_option("--model", chk.model_path, "Model JSON")->required();
  c->add_option("--out", chk.out, "Report JSON (stdout when omitted)");
  c->add_option("--regime", chk.regime)->check(CLI::IsMember({"auto", "spherical", "nonspherical"}));
  c->add_option("--eta", chk.eta);
  c->add_option("--epsilon", chk.epsilon, "Accuracy target for the sample-complexity terms");
  c->add_option("--c", chk.constants.c);
  c->add_option("--c1", chk.constants.c1);
  c->add_option("--c2", chk.constants.c2);
  c->add_option("--c3", chk.constants.c3);
  c->add_option("--c1-prime", chk.constants.c1_prime);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) {
      gen.has_m = gen_m->count() > 0;
      gen.has_noise = gen_noise->count() > 0;
      gen.has_allocation = gen_alloc->count() > 0;
      return run_gen(gen);
    }
    if (e->parsed()) return run_estimate(est);
    if (b->parsed()) return run_campaign(bench, false);
    if (s->parsed()) return run_campaign(sens, true);
    if (c->parsed()) return run_check(chk);
  } catch (const Error& err) {
    std::cerr << "error [" << errc_name(err.code()) << "]: " << err.what() << '\n';
    return is_io_error(err.code()) ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
