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

// pls: command-line front end for projected Langevin sampling.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pls/cli/dataset.hpp"
#include "pls/cli/pipeline.hpp"
#include "pls/cli/serialize.hpp"

namespace {

void add_model_options(CLI::App& app, pls::cli::RunConfig& cfg) {
  app.add_option("--data", cfg.data_path, "CSV with header; last column is the target");
  app.add_option("--synthetic", cfg.synthetic, "sine_regression, shift_mixture or poisson_squared");
  app.add_option("--n", cfg.synthetic_n, "rows for --synthetic");
  app.add_option("--test-frac", cfg.test_frac, "held-out fraction");
  app.add_option("--kernel", cfg.kernel, "se, matern12, matern32 or matern52");
  app.add_option("--lengthscale", cfg.lengthscales, "one value (isotropic) or one per feature; default median heuristic")
      ->delimiter(',');
  app.add_option("--signal-var", cfg.signal_var, "kernel signal variance");
  app.add_option("--likelihood", cfg.likelihood, "gaussian, bernoulli, poisson, student_t or shift");
  app.add_option("--noise-var", cfg.noise_var, "observation noise variance (squared scale for student_t)");
  app.add_option("--dof", cfg.dof, "Student-t degrees of freedom");
  app.add_option("--shift", cfg.shift, "shift-mixture offset s");
  app.add_option("--mix-alpha", cfg.mix_alpha, "shift-mixture weight alpha");
  app.add_option("--curvature", cfg.curvature, "likelihood curvature bound for the default step size");
  app.add_option("--inducing", cfg.inducing, "inducing points M; default ceil(sqrt(N))");
  app.add_option("--select", cfg.select, "greedy or random");
  app.add_option("--rank-floor", cfg.rank_floor, "drop eigenvalues below this fraction of the largest");
  app.add_option("--eta", cfg.eta, "Euler-Maruyama step size; default from the drift Lipschitz estimate");
  app.add_option("--steps", cfg.steps, "number of steps");
  app.add_option("--horizon", cfg.horizon, "total time T; overrides --steps");
  app.add_option("--particles", cfg.particles, "number of particles J");
  app.add_option("--init", cfg.init, "prior or zero");
  app.add_option("--kappa", cfg.kappa, "Lipschitz constant for the KL bound");
  app.add_option("--potential-mc", cfg.potential_mc, "Monte Carlo draws for V* at the ensemble mean (0 = off)");
  app.add_flag("--tune", cfg.tune, "grid-search kernel hyperparameters first");
  app.add_option("--tune-grid", cfg.tune_grid, "JSON file overriding the tuning grid");
  app.add_option("--seed", cfg.seed, "64-bit seed");
  app.add_option("--out", cfg.out_dir, "output directory");
}

std::vector<pls::Index> parse_list(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected Langevin sampling for Bayesian inference over functions"};
  app.set_version_flag("--version", pls::cli::version_string());
  app.require_subcommand(1);

  pls::cli::RunConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "fit, simulate, predict and write diagnostics");
  add_model_options(*run, run_cfg);

  std::string gen_name;
  pls::Index gen_n = 200;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset to CSV");
  gen->add_option("--name", gen_name, "sine_regression, shift_mixture or poisson_squared")->required();
  gen->add_option("--n", gen_n, "number of rows");
  gen->add_option("--seed", gen_seed, "64-bit seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  std::string pred_basis, pred_coeffs, pred_points, pred_out;
  std::uint64_t pred_seed = 0;
  CLI::App* pred = app.add_subcommand("predict", "Matheron draws at new points from saved artifacts");
  pred->add_option("--basis", pred_basis, "basis.json")->required();
  pred->add_option("--coeffs", pred_coeffs, "coeffs.csv")->required();
  pred->add_option("--points", pred_points, "CSV of feature columns")->required();
  pred->add_option("--out", pred_out, "output CSV path")->required();
  pred->add_option("--seed", pred_seed, "64-bit seed");

  pls::cli::RunConfig scale_cfg;
  scale_cfg.synthetic = "sine_regression";
  scale_cfg.steps = 100;
  std::vector<long long> sweep_n, sweep_m, sweep_j;
  std::string scale_out = "scaling.csv";
  CLI::App* scale = app.add_subcommand("scaling", "time each phase over N, M or J sweeps");
  add_model_options(*scale, scale_cfg);
  scale->add_option("--sweep-n", sweep_n, "comma-separated N values")->delimiter(',');
  scale->add_option("--sweep-m", sweep_m, "comma-separated M values")->delimiter(',');
  scale->add_option("--sweep-j", sweep_j, "comma-separated J values")->delimiter(',');
  scale->add_option("--csv", scale_out, "timing CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto summary = pls::cli::run_pipeline(run_cfg);
      for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "train " << summary.n_train << ", test " << summary.n_test << ", basis " << summary.basis_size
                << ", eta " << summary.step_size << ", steps " << summary.steps << "; outputs in " << run_cfg.out_dir
                << '\n';
    } else if (*gen) {
      const auto data = pls::cli::gen_synthetic(gen_name, gen_n, gen_seed);
      pls::cli::write_csv(gen_out, data);
      pls::cli::write_json(gen_out + ".truth.json", {{"name", gen_name},
                                                     {"n", gen_n},
                                                     {"seed", gen_seed},
                                                     {"ground_truth", data.ground_truth},
                                                     {"version", pls::cli::version_string()}});
    } else if (*pred) {
      pls::cli::predict_from_artifacts(pred_basis, pred_coeffs, pred_points, pred_out, pred_seed);
    } else if (*scale) {
      const auto rows =
          pls::cli::scaling_report(scale_cfg, {parse_list(sweep_n), parse_list(sweep_m), parse_list(sweep_j)});
      pls::cli::write_scaling_csv(scale_out, rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pls::cli::exit_code_for(e);
  }
  return 0;
}
