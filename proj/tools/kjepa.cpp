// SPDX-License-Identifier: Apache-2.0
// kjepa: generate the regime corpus, train JEPA / autoencoder models, analyse and report.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "kjepa/cli/commands.hpp"
#include "kjepa/cli/config.hpp"
#include "kjepa/errors.hpp"

namespace fs = std::filesystem;
using namespace kjepa;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

cli::ExperimentConfig resolve(const Globals& g) {
  cli::ExperimentConfig c = g.config.empty() ? cli::ExperimentConfig{} : cli::load_config(g.config);
  cli::validate(c);
  return c;
}

void echo(const cli::ExperimentConfig& c) {
  std::cout << "# resolved config\n" << cli::to_text(c) << "# end config\n" << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman-invariant regime indicators with JEPA: corpus, training, diagnostics"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config file (sectioned key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed,
                 "Override the command's seed (gen: data.global_seed, train: train.seed, "
                 "analyze: analyze.kmeans_seed, gradcheck: check seed)");
  app.add_option("--out", g.out,
                 "Override the command's output directory (gen: data.out_dir, train: "
                 "train.out_dir, analyze: analyze.out_dir)");

  auto* gen = app.add_subcommand("gen", "Generate train/val/test splits and manifests");

  auto* train = app.add_subcommand("train", "Train a JEPA or autoencoder model");
  std::string mode = "jepa";
  std::optional<std::string> resume;
  train->add_option("--mode", mode, "jepa|ae")->check(CLI::IsMember({"jepa", "ae"}));
  train->add_option("--resume", resume, "Continue from a checkpoint of the same architecture")
      ->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Run the diagnostic suite on the test split");
  cli::AnalyzeInputs inputs;
  std::optional<std::string> ae_path, init_path;
  analyze->add_option("--jepa", inputs.jepa, "JEPA checkpoint")->required()->check(CLI::ExistingFile);
  analyze->add_option("--ae", ae_path, "Autoencoder checkpoint (purity_ae is absent without it)")
      ->check(CLI::ExistingFile);
  analyze->add_option("--jepa-init", init_path,
                      "Untrained JEPA weights (default: <jepa>.init.kjc beside the checkpoint)")
      ->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Summarise a report file against the thresholds");
  std::string report_path;
  report->add_option("report", report_path, "report.txt or report.json")
      ->required()
      ->check(CLI::ExistingFile);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return cli::run_report(report_path, std::cout);

    cli::ExperimentConfig c = resolve(g);
    if (gen->parsed()) {
      if (g.seed) c.data.global_seed = *g.seed;
      if (g.out) c.data.out_dir = *g.out;
      echo(c);
      cli::run_gen(c, std::cout);
      return 0;
    }
    if (train->parsed()) {
      if (g.seed) c.train.seed = *g.seed;
      if (g.out) c.train.out_dir = *g.out;
      const models::ModelMode m = models::parse_mode(mode);
      echo(c);
      if (m == models::ModelMode::ae)
        std::cerr << "warning: --mode ae ignores model.predictor and model.predictor_init\n";
      if (c.model.latent_dim < 18)
        std::cerr << "warning: latent_dim < 18 cannot hold one indicator per regime\n";
      cli::run_train(c, m, resume ? std::optional<fs::path>(*resume) : std::nullopt, std::cout);
      return 0;
    }
    if (analyze->parsed()) {
      if (g.seed) c.analyze.kmeans_seed = *g.seed;
      if (g.out) c.analyze.out_dir = *g.out;
      if (ae_path) inputs.ae = *ae_path;
      if (init_path) inputs.jepa_init = *init_path;
      echo(c);
      cli::run_analyze(c, inputs, std::cout);
      return 0;
    }
    if (gradcheck->parsed()) {
      echo(c);
      return cli::run_gradcheck(c, g.seed.value_or(0), std::cout);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
