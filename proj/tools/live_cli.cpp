// live: case-probability inference in high-dimensional logistic models.
// Subcommands: fit (penalized logistic regression), infer (bias-corrected
// case-probability CI/test), simulate (Monte-Carlo coverage/power studies).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "live/baselines.hpp"
#include "live/inference.hpp"
#include "live/io.hpp"
#include "live/log.hpp"
#include "live/simulation.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int exit_code_for(const live::Error& e) {
  switch (e.kind()) {
    case live::ErrorKind::validation: return 2;
    case live::ErrorKind::numerical: return 3;
    case live::ErrorKind::io: return 4;
  }
  return 1;
}

struct FitArgs {
  std::string dataset_path;
  bool add_intercept = false;
  double fixed_lambda = -1.0;
  int folds = 10;
  int grid = 50;
  std::uint64_t seed = 1;
  bool penalize_intercept = false;
  bool standardize = false;
  std::string out = "model.csv";
};

int run_fit(const FitArgs& args) {
  const auto t0 = Clock::now();
  live::RunManifest manifest;
  manifest.command = "fit " + args.dataset_path;
  manifest.master_seed = args.seed;

  const auto t_read = Clock::now();
  const live::Dataset data =
      live::read_dataset_csv(args.dataset_path, args.add_intercept);
  manifest.phase_seconds.emplace_back("read", seconds_since(t_read));

  live::CvOptions cv_opts;
  cv_opts.n_folds = args.folds;
  cv_opts.grid_size = args.grid;
  cv_opts.fit.penalize_intercept = args.penalize_intercept;
  cv_opts.fit.standardize = args.standardize;

  double lambda = args.fixed_lambda;
  live::CvResult cv;
  const bool used_cv = args.fixed_lambda <= 0.0;
  const auto t_fit = Clock::now();
  if (used_cv) {
    live::RngStream stream(args.seed, 0);
    cv = live::cross_validate_lambda(data, stream, cv_opts);
    lambda = cv.lambda_min;
  }
  const live::FittedModel model = live::fit_logistic_lasso(data, lambda, cv_opts.fit);
  manifest.phase_seconds.emplace_back("fit", seconds_since(t_fit));

  live::write_model_file(args.out, model, data.p());
  if (used_cv) {
    live::write_cv_curve_csv(args.out + ".cv.csv", cv);
    std::cout << "lambda_min " << live::format_double(cv.lambda_min)
              << "  lambda_1se " << live::format_double(cv.lambda_1se) << "\n";
  }
  int nonzero = 0;
  for (Eigen::Index j = 0; j < model.beta_hat.size(); ++j)
    if (model.beta_hat[j] != 0.0) ++nonzero;
  std::cout << "fit: lambda " << live::format_double(model.lambda) << ", "
            << nonzero << "/" << data.p() << " nonzero, objective "
            << live::format_double(model.objective_value)
            << (model.converged ? "" : "  [not converged]") << "\n";
  std::cout << "model written to " << args.out << "\n";

  manifest.wall_clock_seconds = seconds_since(t0);
  live::write_manifest(args.out, manifest);
  return 0;
}

struct InferArgs {
  std::string dataset_path;
  std::string loading_path;
  std::string method = "live";
  double alpha = 0.05;
  double threshold = 0.5;
  std::uint64_t seed = 1;
  bool add_intercept = false;
  double fixed_lambda = -1.0;
  std::string out;
};

int run_infer(const InferArgs& args) {
  const auto t0 = Clock::now();
  live::RunManifest manifest;
  manifest.command = "infer " + args.dataset_path + " " + args.loading_path;
  manifest.master_seed = args.seed;

  const live::Dataset data =
      live::read_dataset_csv(args.dataset_path, args.add_intercept);
  const std::vector<live::Loading> loadings =
      live::read_loadings_csv(args.loading_path, data.p());
  const live::Method method = live::method_from_name(args.method);

  live::InferOptions opts;
  opts.alpha = args.alpha;
  opts.threshold_c = args.threshold;
  if (args.fixed_lambda > 0.0) opts.fixed_lambda = args.fixed_lambda;

  // one shared fit (and Gram) for the whole loading batch
  const auto t_fit = Clock::now();
  live::RngStream stream(args.seed, 0);
  double lambda;
  if (opts.fixed_lambda) {
    lambda = *opts.fixed_lambda;
  } else {
    const live::CvResult cv = live::cross_validate_lambda(data, stream, opts.cv);
    lambda = cv.lambda_min;
  }
  const live::FittedModel fit = live::fit_logistic_lasso(data, lambda, opts.cv.fit);
  manifest.phase_seconds.emplace_back("fit", seconds_since(t_fit));

  const auto t_inf = Clock::now();
  live::Gram gram;
  if (method == live::Method::live) gram = live::sample_gram(data);
  std::vector<live::InferenceResult> results;
  results.reserve(loadings.size());
  for (const live::Loading& x_star : loadings) {
    switch (method) {
      case live::Method::live:
        results.push_back(live::infer_with_fit(data, x_star, fit, gram, opts));
        break;
      case live::Method::plugin_lasso:
        results.push_back(live::plugin_lasso_inference(data, x_star, fit,
                                                       args.alpha, args.threshold));
        break;
      case live::Method::post_selection:
        results.push_back(live::post_selection_inference(
            data, x_star, args.alpha, args.threshold, fit));
        break;
    }
  }
  manifest.phase_seconds.emplace_back("inference", seconds_since(t_inf));
  manifest.wall_clock_seconds = seconds_since(t0);

  const std::string json_text = results.size() == 1
                                    ? live::inference_result_to_json(results[0])
                                    : live::inference_results_to_json(results);
  if (args.out.empty()) {
    std::cout << json_text;
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) live::throw_io("cannot open '" + args.out + "' for writing");
    out << json_text;
    live::write_manifest(args.out, manifest);
    std::cout << "results written to " << args.out << "\n";
  }
  return 0;
}

live::SimulationConfig preset_config(const std::string& name) {
  live::SimulationConfig cfg;
  std::smatch m;
  if (std::regex_match(name, m,
                       std::regex(R"(table1-loading([12])-r(1|25)-n(\d+))"))) {
    cfg.beta.kind = live::BetaSpec::Kind::exact_sparse;
    cfg.loading.kind = m[1] == "1" ? live::LoadingSpec::Kind::loading1
                                   : live::LoadingSpec::Kind::loading2;
    cfg.loading.r = m[2] == "1" ? 1.0 : 1.0 / 25.0;
    cfg.n = std::stoi(m[3]);
    return cfg;
  }
  if (std::regex_match(name, m,
                       std::regex(R"(table3-decay([12])-r(1|25)-n(\d+))"))) {
    cfg.beta.kind = live::BetaSpec::Kind::decay;
    cfg.beta.decay_exponent = m[1] == "1" ? 1.0 : 2.0;
    cfg.loading.kind = live::LoadingSpec::Kind::loading1;
    cfg.loading.r = m[2] == "1" ? 1.0 : 1.0 / 25.0;
    cfg.n = std::stoi(m[3]);
    return cfg;
  }
  if (std::regex_match(name, m, std::regex(R"(table5-loading3-n(\d+))"))) {
    cfg.beta.kind = live::BetaSpec::Kind::exact_sparse_adversarial;
    cfg.loading.kind = live::LoadingSpec::Kind::loading3;
    cfg.loading.r = 1.0 / 25.0;
    cfg.n = std::stoi(m[1]);
    return cfg;
  }
  if (std::regex_match(name, m,
                       std::regex(R"(table4-intercept(neg1|pos1)-r(1|25)-n(\d+))"))) {
    cfg.beta.kind = live::BetaSpec::Kind::exact_sparse_with_intercept;
    cfg.beta.intercept = m[1] == "neg1" ? -1.0 : 1.0;
    cfg.loading.kind = live::LoadingSpec::Kind::loading1;
    cfg.loading.r = m[2] == "1" ? 1.0 : 1.0 / 25.0;
    cfg.n = std::stoi(m[3]);
    return cfg;
  }
  live::throw_validation(
      "unknown preset '" + name +
      "' (expected table1-loading<1|2>-r<1|25>-n<N>, table3-decay<1|2>-r<1|25>-n<N>, "
      "table5-loading3-n<N> or table4-intercept<neg1|pos1>-r<1|25>-n<N>)");
}

struct SimulateArgs {
  std::string config_path;
  std::string preset;
  int jobs = 1;
  std::string out = "sim-out";
  int reps_override = -1;
  std::int64_t seed_override = -1;
  bool fresh = false;
};

int run_simulate(const SimulateArgs& args) {
  const auto t0 = Clock::now();
  live::SimulationConfig cfg;
  if (!args.preset.empty())
    cfg = preset_config(args.preset);
  else if (!args.config_path.empty())
    cfg = live::read_config_json(args.config_path);
  else
    live::throw_validation("simulate: give a config file or --preset");
  if (args.reps_override > 0) cfg.n_reps = args.reps_override;
  if (args.seed_override >= 0)
    cfg.master_seed = static_cast<std::uint64_t>(args.seed_override);
  live::validate_config(cfg);

  const fs::path out_dir(args.out);
  const fs::path reps_dir = out_dir / "reps";
  fs::create_directories(reps_dir);
  if (args.fresh)
    for (const auto& entry : fs::directory_iterator(reps_dir))
      fs::remove(entry.path());

  {
    std::ofstream cfg_out(out_dir / "config.json", std::ios::binary);
    cfg_out << live::config_to_json_text(cfg);
  }

  const auto t_ctx = Clock::now();
  const live::ExperimentContext ctx = live::make_experiment_context(cfg);
  live::log::info("simulate: truth = " + live::format_double(ctx.truth) +
                  ", ||x*|| = " + live::format_double(ctx.loading.norm()));

  // resume: collect finished replications, run the rest
  std::vector<live::ReplicationResult> results;
  std::set<int> have;
  for (int r = 0; r < cfg.n_reps; ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "rep_%05d.csv", r);
    const fs::path f = reps_dir / name;
    if (fs::exists(f)) {
      try {
        live::ReplicationResult rep = live::replication_from_csv(f.string());
        if (rep.rep_index == r && rep.per_method.size() == cfg.methods.size()) {
          results.push_back(std::move(rep));
          have.insert(r);
        }
      } catch (const live::Error&) {
        // partial file from an interrupted run: redo this replication
      }
    }
  }
  std::vector<int> todo;
  for (int r = 0; r < cfg.n_reps; ++r)
    if (!have.count(r)) todo.push_back(r);
  if (!results.empty())
    live::log::info("simulate: resuming, " + std::to_string(results.size()) +
                    " replications already on disk");

  const auto write_rep = [&](const live::ReplicationResult& rep, int done,
                             int total) {
    char name[32], tmp[40];
    std::snprintf(name, sizeof name, "rep_%05d.csv", rep.rep_index);
    std::snprintf(tmp, sizeof tmp, "rep_%05d.csv.tmp", rep.rep_index);
    {
      std::ofstream out(reps_dir / tmp, std::ios::binary);
      out << live::replication_csv_header() << "\n"
          << live::replication_to_csv_rows(rep);
    }
    fs::rename(reps_dir / tmp, reps_dir / name);  // whole files only
    live::log::info("simulate: replication " + std::to_string(rep.rep_index) +
                    " done (" + std::to_string(done) + "/" +
                    std::to_string(total) + ")");
  };

  std::vector<live::ReplicationResult> fresh =
      live::run_experiment(ctx, args.jobs, todo, write_rep);
  results.insert(results.end(), std::make_move_iterator(fresh.begin()),
                 std::make_move_iterator(fresh.end()));
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.rep_index < b.rep_index; });

  const live::SummaryMetrics summary = live::aggregate(results, ctx.truth);
  live::write_summary_csv((out_dir / "summary.csv").string(), cfg, ctx.truth,
                          summary);
  live::write_replications_csv((out_dir / "replications.csv").string(), results);

  live::RunManifest manifest;
  manifest.command = args.preset.empty() ? "simulate " + args.config_path
                                         : "simulate --preset " + args.preset;
  manifest.config_snapshot = live::config_to_json_text(cfg);
  manifest.master_seed = cfg.master_seed;
  manifest.phase_seconds.emplace_back("context", seconds_since(t_ctx));
  manifest.wall_clock_seconds = seconds_since(t0);
  live::write_manifest((out_dir / "summary.csv").string(), manifest);

  std::cout << "truth " << live::format_double(ctx.truth) << "\n";
  for (const auto& [method, mm] : summary.per_method) {
    std::printf("%-8s Cov %5.3f  ERR %5.3f  Len %5.3f  RMSE %5.3f  Bias %+5.3f  "
                "SE %5.3f  t %.2fs%s\n",
                live::method_name(method).c_str(), mm.cov, mm.err, mm.len,
                mm.rmse, mm.bias, mm.se, mm.mean_runtime,
                mm.n_failed ? ("  [" + std::to_string(mm.n_failed) + " failed]").c_str()
                            : "");
  }
  std::cout << "summary written to " << (out_dir / "summary.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-corrected inference for case probabilities in "
               "high-dimensional sparse logistic regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit a penalized logistic model");
  fit->add_option("dataset", fit_args.dataset_path, "dataset CSV")->required();
  fit->add_flag("--add-intercept", fit_args.add_intercept,
                "prepend an all-ones intercept column");
  fit->add_option("--lambda", fit_args.fixed_lambda,
                  "fixed penalty (bypasses cross-validation)");
  fit->add_option("--folds", fit_args.folds, "CV folds")->default_val(10);
  fit->add_option("--grid", fit_args.grid, "CV grid size")->default_val(50);
  fit->add_option("--seed", fit_args.seed, "master seed")->default_val(1);
  fit->add_flag("--penalize-intercept", fit_args.penalize_intercept,
                "penalize the intercept coordinate too");
  fit->add_flag("--standardize", fit_args.standardize,
                "unit-variance column scaling");
  fit->add_option("--out", fit_args.out, "model file")->default_val("model.csv");

  InferArgs infer_args;
  CLI::App* infer = app.add_subcommand("infer", "Case-probability inference");
  infer->add_option("dataset", infer_args.dataset_path, "dataset CSV")->required();
  infer->add_option("loading", infer_args.loading_path, "loading CSV")->required();
  infer->add_option("--method", infer_args.method, "live|plugin|postsel")
      ->default_val("live");
  infer->add_option("--alpha", infer_args.alpha, "CI level")->default_val(0.05);
  infer->add_option("--threshold", infer_args.threshold, "labelling threshold c*")
      ->default_val(0.5);
  infer->add_option("--seed", infer_args.seed, "master seed")->default_val(1);
  infer->add_flag("--add-intercept", infer_args.add_intercept,
                  "prepend an all-ones intercept column");
  infer->add_option("--lambda", infer_args.fixed_lambda,
                    "fixed penalty (bypasses cross-validation)");
  infer->add_option("--out", infer_args.out, "result JSON (stdout if omitted)");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo study");
  sim->add_option("config", sim_args.config_path, "config JSON");
  sim->add_option("--preset", sim_args.preset,
                  "named setting, e.g. table1-loading1-r1-n200");
  sim->add_option("--jobs", sim_args.jobs, "replication worker threads")
      ->default_val(1);
  sim->add_option("--out", sim_args.out, "output directory")->default_val("sim-out");
  sim->add_option("--reps", sim_args.reps_override, "override n_reps");
  sim->add_option("--seed", sim_args.seed_override, "override master_seed");
  sim->add_flag("--fresh", sim_args.fresh, "discard completed replication files");

  try {
    app.parse(argc, argv);
    if (fit->parsed()) return run_fit(fit_args);
    if (infer->parsed()) return run_infer(infer_args);
    if (sim->parsed()) return run_simulate(sim_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const live::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
