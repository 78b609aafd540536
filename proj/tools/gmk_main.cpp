#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmk/error.hpp"
#include "gmk/runner.hpp"

namespace {

gmk::ExperimentConfig load_with_overrides(const std::string& config_path,
                                          const std::string& out_dir,
                                          int64_t seed) {
  gmk::ExperimentConfig cfg = gmk::load_experiment_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.train.seed = static_cast<uint64_t>(seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative-model watermarking: embed, verify, attack"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir;
  int64_t seed = -1;

  auto add_common = [&](CLI::App* sub, bool with_checkpoint) {
    sub->add_option("config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_checkpoint)
      sub->add_option("--checkpoint", checkpoint_path, "checkpoint path")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "training seed override");
  };

  CLI::App* embed = app.add_subcommand("embed", "train and watermark a model");
  add_common(embed, false);

  CLI::App* verify = app.add_subcommand(
      "verify", "two-step ownership verification of a checkpoint");
  add_common(verify, true);

  std::string attack_kind;
  CLI::App* attack = app.add_subcommand("attack", "attack a checkpoint");
  attack->add_option("kind", attack_kind, "finetune | overwrite | flip")
      ->required();
  add_common(attack, true);

  std::vector<double> fractions = {0.0, 0.1, 0.25, 0.5};
  std::vector<uint64_t> sweep_seeds = {1, 2, 3};
  CLI::App* sweep = app.add_subcommand("sweep-flips",
                                       "sign-flip fraction sweep");
  add_common(sweep, true);
  sweep->add_option("--fractions", fractions, "flip fractions");
  sweep->add_option("--seeds", sweep_seeds, "flip seeds");

  std::vector<double> lambdas = {0.1, 1.0, 10.0};
  CLI::App* ab_lambda = app.add_subcommand("ablate-lambda",
                                           "Q_wm across lambda values");
  add_common(ab_lambda, false);
  ab_lambda->add_option("--lambdas", lambdas, "lambda values");

  std::vector<double> c_values = {-10.0, 0.0};
  CLI::App* ab_nc = app.add_subcommand(
      "ablate-nc", "trigger-constant ablation (Q_wm separation)");
  add_common(ab_nc, false);
  ab_nc->add_option("--c-values", c_values, "trigger constants");

  std::vector<std::string> run_dirs;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report",
                                        "summary table over run directories");
  report->add_option("runs", run_dirs, "run directories")->required();
  report->add_option("--out", report_out, "write CSV to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*embed) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      gmk::RunArtifacts art = gmk::run_embed(cfg);
      std::cout << art.report.summary();
      std::cout << "run directory: " << art.run_dir << "\n";
      return art.diverged ? 1 : 0;
    }
    if (*verify) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      gmk::VerificationReport rep = gmk::run_verify(cfg, checkpoint_path);
      std::cout << rep.summary();
      return rep.exit_code();
    }
    if (*attack) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      auto outcomes = gmk::run_attack(attack_kind, cfg, checkpoint_path);
      for (const auto& a : outcomes) {
        std::cout << a.report.kind;
        if (!a.report.variant.empty()) std::cout << " (" << a.report.variant << ")";
        std::cout << ": qwm " << a.report.pre.qwm_mean << " -> "
                  << a.report.post.qwm_mean << ", ber " << a.report.pre.ber
                  << " -> " << a.report.post.ber << ", fidelity "
                  << a.report.pre.fidelity << " -> " << a.report.post.fidelity
                  << "\n";
      }
      return 0;
    }
    if (*sweep) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      std::cout << gmk::run_flip_sweep(cfg, checkpoint_path, fractions,
                                       sweep_seeds);
      return 0;
    }
    if (*ab_lambda) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      std::cout << gmk::ablate_lambda(cfg, lambdas);
      return 0;
    }
    if (*ab_nc) {
      gmk::ExperimentConfig cfg =
          load_with_overrides(config_path, out_dir, seed);
      std::cout << gmk::ablate_c(cfg, c_values);
      return 0;
    }
    if (*report) {
      std::string csv = gmk::emit_tables(run_dirs);
      if (!report_out.empty()) {
        std::ofstream f(report_out, std::ios::binary);
        f << csv;
      }
      std::cout << csv;
      return 0;
    }
  } catch (const gmk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
