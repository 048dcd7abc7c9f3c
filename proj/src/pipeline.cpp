/*
 * Copyright 2026 The pls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pls/cli/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "pls/pls.hpp"

#ifndef PLS_VERSION
#define PLS_VERSION "0.1.0"
#endif

namespace pls::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

bool positive_finite(double v) { return v > 0 && std::isfinite(v); }

Index default_inducing(Index n) { return static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n)))); }

Kernel<double> resolve_kernel(const RunConfig& cfg, const Matrix<double>& x) {
  const KernelFamily family = kernel_family_from_string(cfg.kernel);
  Vector<double> ls;
  if (cfg.lengthscales.empty()) {
    ls = median_heuristic(x, cfg.seed);
  } else if (cfg.lengthscales.size() == 1) {
    ls = Vector<double>::Constant(x.cols(), cfg.lengthscales.front());
  } else {
    require(static_cast<Index>(cfg.lengthscales.size()) == x.cols(),
            "--lengthscale has " + std::to_string(cfg.lengthscales.size()) + " values but the data has " +
                std::to_string(x.cols()) + " features");
    ls = Eigen::Map<const Vector<double>>(cfg.lengthscales.data(), x.cols());
  }
  return Kernel<double>(family, ls, cfg.signal_var);
}

HyperparamSearchConfig<double> tuning_config(const RunConfig& cfg, const Dataset& train) {
  auto sc = cfg.likelihood == "bernoulli" ? HyperparamSearchConfig<double>::classification()
                                          : HyperparamSearchConfig<double>::regression();
  sc.family = kernel_family_from_string(cfg.kernel);
  sc.seed = cfg.seed;
  sc.grid = HyperparamGrid<double>::around(train.X, train.y, cfg.seed);
  if (cfg.tune_grid.empty()) return sc;

  const json g = read_json(cfg.tune_grid);
  try {
    if (g.contains("lengthscales")) {
      sc.grid.lengthscales.clear();
      for (const auto& item : g.at("lengthscales")) {
        if (item.is_number()) {
          sc.grid.lengthscales.push_back(Vector<double>::Constant(train.dim(), item.get<double>()));
        } else {
          const auto v = item.get<std::vector<double>>();
          sc.grid.lengthscales.push_back(Eigen::Map<const Vector<double>>(v.data(), static_cast<Index>(v.size())));
        }
      }
    }
    if (g.contains("signal_variances")) sc.grid.signal_variances = g.at("signal_variances").get<std::vector<double>>();
    if (g.contains("noise_variances")) sc.grid.noise_variances = g.at("noise_variances").get<std::vector<double>>();
    if (g.contains("subset_size")) sc.subset_size = g.at("subset_size").get<Index>();
    if (g.contains("n_repeats")) sc.n_repeats = g.at("n_repeats").get<Index>();
  } catch (const json::exception& e) {
    throw InputError(cfg.tune_grid + ": " + e.what());
  }
  return sc;
}

std::vector<std::string> indexed_header(const std::string& prefix, Index n) {
  std::vector<std::string> h;
  h.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

json vector_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json timings_json(const PhaseTimings& t) {
  return {{"select", t.select}, {"decompose", t.decompose}, {"simulate", t.simulate}, {"predict", t.predict}};
}

InitKind init_kind(const std::string& name) { return name == "zero" ? InitKind::Zero : InitKind::PriorGaussian; }

}  // namespace

std::string version_string() { return PLS_VERSION; }

Likelihood<double> make_likelihood(const RunConfig& cfg) {
  if (cfg.likelihood == "gaussian") return Gaussian<double>(cfg.noise_var);
  if (cfg.likelihood == "bernoulli") return BernoulliLogistic<double>();
  if (cfg.likelihood == "poisson") return PoissonSquared<double>();
  if (cfg.likelihood == "student_t") {
    require(positive_finite(cfg.noise_var), "--noise-var must be positive");
    return StudentT<double>(cfg.dof, std::sqrt(cfg.noise_var));
  }
  if (cfg.likelihood == "shift") return ShiftMixture<double>(cfg.shift, cfg.mix_alpha, cfg.noise_var);
  throw InputError("unknown likelihood '" + cfg.likelihood + "' (expected gaussian, bernoulli, poisson, student_t or shift)");
}

void validate(const RunConfig& cfg) {
  require(cfg.data_path.empty() != cfg.synthetic.empty(), "exactly one of --data and --synthetic is required");
  if (!cfg.synthetic.empty()) {
    synthetic_latent(cfg.synthetic, 0.0);
    require(cfg.synthetic_n >= 2, "--n must be at least 2");
  }
  require(cfg.test_frac > 0 && cfg.test_frac < 1, "--test-frac must lie strictly between 0 and 1");
  kernel_family_from_string(cfg.kernel);
  for (double l : cfg.lengthscales) require(positive_finite(l), "--lengthscale values must be positive");
  require(positive_finite(cfg.signal_var), "--signal-var must be positive");
  const Likelihood<double> lik = make_likelihood(cfg);
  if (cfg.curvature) require(positive_finite(*cfg.curvature), "--curvature must be positive");
  require(cfg.inducing >= 0, "--inducing must be non-negative");
  require(cfg.select == "greedy" || cfg.select == "random", "--select must be greedy or random");
  require(cfg.rank_floor >= 0 && cfg.rank_floor < 1, "--rank-floor must lie in [0, 1)");
  if (cfg.eta) {
    require(positive_finite(*cfg.eta), "--eta must be positive");
  } else {
    require(cfg.curvature.has_value() || curvature_bound(lik).has_value(),
            "likelihood '" + cfg.likelihood + "' has no curvature bound: pass --curvature or --eta");
  }
  require(cfg.steps >= 0, "--steps must be non-negative");
  if (cfg.horizon) require(positive_finite(*cfg.horizon), "--horizon must be positive");
  require(cfg.particles >= 2, "--particles must be at least 2");
  require(cfg.init == "prior" || cfg.init == "zero", "--init must be prior or zero");
  if (cfg.kappa) require(positive_finite(*cfg.kappa), "--kappa must be positive");
  require(cfg.potential_mc >= 0, "--potential-mc must be non-negative");
  if (!cfg.tune_grid.empty())
    require(std::filesystem::exists(cfg.tune_grid), "tuning grid file '" + cfg.tune_grid + "' does not exist");
  require(!cfg.out_dir.empty(), "--out must not be empty");
}

json config_to_json(const RunConfig& cfg) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"data_path", cfg.data_path},   {"synthetic", cfg.synthetic},   {"synthetic_n", cfg.synthetic_n},
          {"test_frac", cfg.test_frac},   {"kernel", cfg.kernel},         {"lengthscales", cfg.lengthscales},
          {"signal_var", cfg.signal_var}, {"likelihood", cfg.likelihood}, {"noise_var", cfg.noise_var},
          {"dof", cfg.dof},               {"shift", cfg.shift},           {"mix_alpha", cfg.mix_alpha},
          {"curvature", opt(cfg.curvature)}, {"inducing", cfg.inducing},  {"select", cfg.select},
          {"rank_floor", cfg.rank_floor}, {"eta", opt(cfg.eta)},          {"steps", cfg.steps},
          {"horizon", opt(cfg.horizon)},  {"particles", cfg.particles},   {"init", cfg.init},
          {"kappa", opt(cfg.kappa)},      {"potential_mc", cfg.potential_mc}, {"tune", cfg.tune},
          {"tune_grid", cfg.tune_grid},   {"seed", cfg.seed},             {"out_dir", cfg.out_dir}};
}

RunSummary run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  configure_workers_from_env();
  RunSummary summary;
  Likelihood<double> lik = make_likelihood(cfg);

  Dataset data = cfg.synthetic.empty() ? load_csv(cfg.data_path, task_for_likelihood(cfg.likelihood))
                                       : gen_synthetic(cfg.synthetic, cfg.synthetic_n, cfg.seed);
  check_observations(lik, data.y);
  auto [train, test] = train_test_split(data, cfg.test_frac, cfg.seed);
  summary.n_train = train.size();
  summary.n_test = test.size();

  const Index m = cfg.inducing > 0 ? cfg.inducing : default_inducing(train.size());
  require(m <= train.size(), "--inducing " + std::to_string(m) + " exceeds the " + std::to_string(train.size()) +
                                 " training points");

  const std::filesystem::path out = cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());

  json tuning = nullptr;
  Kernel<double> kernel = resolve_kernel(cfg, train.X);
  if (cfg.tune) {
    const HyperparamFit<double> fit = fit_hyperparams(train.X, train.y, tuning_config(cfg, train));
    kernel = fit.kernel;
    if (cfg.likelihood == "gaussian") lik = Gaussian<double>(fit.noise_variance);
    tuning = {{"kernel", to_json(fit.kernel)}, {"noise_variance", fit.noise_variance}, {"repeats", fit.per_repeat.size()}};
  }

  auto t0 = Clock::now();
  const Matrix<double> z = cfg.select == "greedy" ? select_inducing_greedy(kernel, train.X, m, cfg.seed)
                                                  : select_inducing_random(train.X, m, cfg.seed);
  summary.timings.select = seconds_since(t0);
  t0 = Clock::now();
  const SpectralBasis<double> basis = fit_nystroem(kernel, z, cfg.rank_floor);
  summary.timings.decompose = seconds_since(t0);
  summary.basis_size = basis.size();

  const Matrix<double> e = eval_basis(basis, train.X);
  SdeConfig<double> sde;
  sde.step_size = cfg.eta ? *cfg.eta : default_step_size(basis.eigenvalues, e, lik, cfg.curvature);
  sde.n_steps = cfg.horizon ? static_cast<Index>(std::ceil(*cfg.horizon / sde.step_size)) : cfg.steps;
  sde.n_particles = cfg.particles;
  sde.seed = cfg.seed;
  sde.init = init_kind(cfg.init);
  summary.step_size = sde.step_size;
  summary.steps = sde.n_steps;

  t0 = Clock::now();
  const ParticleEnsemble<double> ens = simulate(sde, basis, train.X, train.y, lik);
  summary.timings.simulate = seconds_since(t0);

  t0 = Clock::now();
  const JointPriorCov<double> joint = build_joint(basis, kernel, test.X, JointRepair::ProjectSchur);
  const PredictiveDraws<double> draws = matheron_sample(joint, ens, cfg.seed);
  summary.timings.predict = seconds_since(t0);

  const MetricReport<double> report = metrics(draws, test.y, lik, MetricOptions{cfg.seed, true});
  if (!cfg.kappa) summary.warnings.emplace_back("kappa not given; KL bound uses kappa = 1");
  const BoundReport<double> bound = kl_bound(basis, kernel, train.X, cfg.kappa.value_or(1.0),
                                             AnchorSet<double>::from_training(train.X, 2000, cfg.seed));

  json tail = nullptr;
  if (basis.size() >= 10) {
    const TailDecayFit<double> fit = tail_decay_fit(basis);
    tail = {{"exp_slope", fit.exp_slope}, {"exp_r2", fit.exp_r2}, {"poly_slope", fit.poly_slope}, {"poly_r2", fit.poly_r2}};
  }
  json oracle = nullptr;
  if (const auto* g = std::get_if<Gaussian<double>>(&lik)) {
    const GaussianCoeffPosterior<double> post = gaussian_oracle(e, basis.eigenvalues, train.y, g->noise_variance);
    const Vector<double> mean = ens.coeffs.colwise().mean().transpose();
    const Vector<double> se = (post.covariance.diagonal() / static_cast<double>(ens.size())).cwiseSqrt();
    oracle = {{"mean", vector_json(post.mean)},
              {"ensemble_mean", vector_json(mean)},
              {"max_abs_z", ((mean - post.mean).cwiseQuotient(se)).cwiseAbs().maxCoeff()}};
  }
  json potential = nullptr;
  if (cfg.potential_mc > 0) {
    const OptimalPotential<double> op(basis, kernel, train.X, train.y, lik,
                                      AnchorSet<double>::from_training(train.X, 2000, cfg.seed));
    const Vector<double> u = ens.coeffs.colwise().mean().transpose();
    const PotentialEstimate<double> est = op.estimate(u, cfg.potential_mc, cfg.seed);
    potential = {{"at", "ensemble_mean"}, {"v_star", est.value}, {"std_error", est.std_error}, {"v_inf", est.v_inf},
                 {"n_mc", cfg.potential_mc}};
  }

  write_json(out / "basis.json", to_json(basis));
  write_matrix_csv(out / "coeffs.csv", ens.coeffs, indexed_header("u", basis.size()));
  write_matrix_csv(out / "predictions.csv", draws.values, indexed_header("", test.size()));
  write_csv(out / "test_points.csv", test);

  json metrics_json = to_json(report);
  metrics_json["schema_version"] = kSchemaVersion;
  metrics_json["n_test"] = test.size();
  metrics_json["n_draws"] = draws.values.rows();
  write_json(out / "metrics.json", metrics_json);

  json diagnostics{
      {"schema_version", kSchemaVersion},
      {"kl_bound", to_json(bound)},
      {"eigenvalues", vector_json(basis.eigenvalues)},
      {"basis_size", basis.size()},
      {"num_inducing", basis.num_inducing()},
      {"duplicates_removed", basis.duplicates_removed},
      {"tail_decay", tail},
      {"joint",
       {{"variant", std::string(joint_variant_name(joint.repaired))},
        {"jitter", joint.jitter},
        {"repaired", joint.repaired},
        {"schur_min_eigenvalue", joint.repaired ? json(joint.schur_min_eigenvalue) : json(nullptr)}}},
      {"sampler",
       {{"step_size", sde.step_size},
        {"steps", sde.n_steps},
        {"horizon", sde.horizon()},
        {"particles", sde.n_particles},
        {"init", cfg.init},
        {"stability_ratio", sde.step_size / basis.eigenvalues.minCoeff()}}},
      {"gaussian_oracle", oracle},
      {"optimal_potential", potential},
      {"timings_s", timings_json(summary.timings)},
      {"warnings", summary.warnings}};
  write_json(out / "diagnostics.json", diagnostics);

  json manifest{{"schema_version", kSchemaVersion},
                {"version", version_string()},
                {"config", config_to_json(cfg)},
                {"resolved",
                 {{"kernel", to_json(kernel)},
                  {"likelihood", std::string(likelihood_name(lik))},
                  {"inducing", m},
                  {"step_size", sde.step_size},
                  {"steps", sde.n_steps},
                  {"tuning", tuning}}},
                {"data",
                 {{"source", cfg.synthetic.empty() ? cfg.data_path : "synthetic:" + cfg.synthetic},
                  {"task", std::string(to_string(data.task))},
                  {"n", data.size()},
                  {"n_train", train.size()},
                  {"n_test", test.size()},
                  {"ground_truth", data.ground_truth}}},
                {"workers", worker_count()},
                {"outputs",
                 {"basis.json", "coeffs.csv", "predictions.csv", "test_points.csv", "metrics.json", "diagnostics.json",
                  "manifest.json"}}};
  write_json(out / "manifest.json", manifest);
  return summary;
}

void predict_from_artifacts(const std::filesystem::path& basis_json, const std::filesystem::path& coeffs_csv,
                            const std::filesystem::path& points_csv, const std::filesystem::path& out_csv,
                            std::uint64_t seed) {
  configure_workers_from_env();
  const SpectralBasis<double> basis = basis_from_json(read_json(basis_json));
  const Matrix<double> coeffs = load_matrix_csv(coeffs_csv);
  const Matrix<double> points = load_matrix_csv(points_csv);
  require(points.cols() == basis.dim(), points_csv.string() + ": expected " + std::to_string(basis.dim()) +
                                            " feature columns, found " + std::to_string(points.cols()));
  const JointPriorCov<double> joint = build_joint(basis, basis.kernel, points, JointRepair::ProjectSchur);
  const PredictiveDraws<double> draws = matheron_sample(joint, coeffs, seed);
  write_matrix_csv(out_csv, draws.values, indexed_header("", points.rows()));
}

std::vector<ScalingRow> scaling_report(const RunConfig& cfg, const ScalingSweep& sweep) {
  validate(cfg);
  const Likelihood<double> lik = make_likelihood(cfg);
  const Index base_n = cfg.synthetic_n;
  const Index base_j = cfg.particles;

  auto run_one = [&](const std::string& name, Index n, Index m, Index j) {
    require(n >= 2 && j >= 1 && m >= 1, "scaling sweep values must be positive");
    ScalingRow row{name, std::max(n, m), m, j, {}};
    const Dataset data = gen_synthetic("sine_regression", row.n, cfg.seed);
    const Kernel<double> kernel = resolve_kernel(cfg, data.X);
    auto t0 = Clock::now();
    const Matrix<double> z = cfg.select == "greedy" ? select_inducing_greedy(kernel, data.X, m, cfg.seed)
                                                    : select_inducing_random(data.X, m, cfg.seed);
    row.timings.select = seconds_since(t0);
    t0 = Clock::now();
    const SpectralBasis<double> basis = fit_nystroem(kernel, z, cfg.rank_floor);
    row.timings.decompose = seconds_since(t0);

    SdeConfig<double> sde;
    sde.step_size = cfg.eta ? *cfg.eta : default_step_size(basis.eigenvalues, eval_basis(basis, data.X), lik, cfg.curvature);
    sde.n_steps = cfg.steps;
    sde.n_particles = j;
    sde.seed = cfg.seed;
    t0 = Clock::now();
    const ParticleEnsemble<double> ens = simulate(sde, basis, data.X, data.y, lik);
    row.timings.simulate = seconds_since(t0);

    const Matrix<double> xs = Vector<double>::LinSpaced(50, -3.0, 3.0);
    t0 = Clock::now();
    const JointPriorCov<double> joint = build_joint(basis, kernel, xs, JointRepair::ProjectSchur);
    matheron_sample(joint, ens, cfg.seed);
    row.timings.predict = seconds_since(t0);
    return row;
  };

  const Index base_m = cfg.inducing > 0 ? cfg.inducing : default_inducing(base_n);
  std::vector<ScalingRow> rows;
  for (Index n : sweep.n_values)
    rows.push_back(run_one("N", n, cfg.inducing > 0 ? cfg.inducing : default_inducing(n), base_j));
  for (Index m : sweep.m_values) rows.push_back(run_one("M", base_n, m, base_j));
  for (Index j : sweep.j_values) rows.push_back(run_one("J", base_n, base_m, j));
  return rows;
}

void write_scaling_csv(const std::filesystem::path& path, const std::vector<ScalingRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "sweep,n,m,j,select_s,decompose_s,simulate_s,predict_s\n";
  for (const auto& r : rows)
    out << r.sweep << ',' << r.n << ',' << r.m << ',' << r.j << ',' << format_double(r.timings.select) << ','
        << format_double(r.timings.decompose) << ',' << format_double(r.timings.simulate) << ','
        << format_double(r.timings.predict) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const InputError*>(&e) != nullptr) return 1;
  return 1;
}

}  // namespace pls::cli
