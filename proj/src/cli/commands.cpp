// SPDX-License-Identifier: Apache-2.0
#include "kjepa/cli/commands.hpp"

#include <cstdio>
#include <fstream>

#include "kjepa/analysis/clustering.hpp"
#include "kjepa/analysis/diagnostics.hpp"
#include "kjepa/analysis/embeddings.hpp"
#include "kjepa/analysis/thresholds.hpp"
#include "kjepa/errors.hpp"
#include "kjepa/hash.hpp"
#include "kjepa/models/checkpoint.hpp"
#include "kjepa/models/gradcheck_suite.hpp"
#include "kjepa/numerics/layer_checks.hpp"
#include "kjepa/synthgen/regimes.hpp"

namespace kjepa::cli {

namespace fs = std::filesystem;
using models::ModelMode;

synth::DatasetFiles run_gen(const ExperimentConfig& c, std::ostream& out) {
  validate(c);
  const synth::DatasetFiles files = synth::build_dataset(c.data);
  for (const auto* f : {&files.train, &files.val, &files.test})
    out << "split=" << f->split << " pairs=" << f->num_pairs << " hash=" << hex64(f->content_hash)
        << " path=" << f->path.string() << '\n';
  return files;
}

TrainPaths train_paths(const fs::path& out_dir, ModelMode mode) {
  const std::string stem(models::to_string(mode));
  return {out_dir / (stem + ".kjc"), out_dir / (stem + ".init.kjc"), out_dir / (stem + ".log")};
}

training::TrainResult run_train(const ExperimentConfig& c, ModelMode mode,
                                const std::optional<fs::path>& resume, std::ostream& out) {
  validate(c);
  training::TrainConfig t;
  t.epochs = c.train.epochs;
  t.batch_size = c.train.batch;
  t.lr = c.train.lr;
  t.adam_eps = c.train.adam_eps;
  t.ema_alpha = c.train.ema_alpha;
  t.seed = c.train.seed;
  t.eval_every = c.train.eval_every;
  t.clip_norm = c.train.clip_norm;
  t.model = c.model;
  t.model.mode = mode;
  t.train_path = c.data.out_dir / "train.kjd";
  t.val_path = c.data.out_dir / "val.kjd";
  t.resume_from = resume;

  const TrainPaths paths = train_paths(c.train.out_dir, mode);
  t.checkpoint_path = paths.checkpoint;
  fs::create_directories(c.train.out_dir);
  models::save_checkpoint(resume ? models::load_checkpoint(*resume, t.model)
                                 : models::init_params<float>(t.model, t.seed),
                          paths.initial);

  std::ofstream log(paths.history, std::ios::trunc);
  if (!log) throw IoError("cannot write " + paths.history.string());
  auto on_epoch = [&](const training::EpochRecord& r) {
    const std::string line = training::format_epoch(r);
    out << line << std::endl;
    log << line << std::endl;
  };
  training::TrainResult result =
      mode == ModelMode::jepa ? training::train_jepa(t, on_epoch) : training::train_ae(t, on_epoch);
  out << "checkpoint=" << paths.checkpoint.string() << '\n';
  return result;
}

namespace {

struct Clustering {
  analysis::EmbeddingSet embeddings;
  analysis::KMeansResult kmeans;
  double purity = 0.0;
};

Clustering cluster(models::ModelParams<float>& params, const synth::Dataset& test,
                   const ExperimentConfig& c, analysis::Encoder encoder) {
  Clustering out;
  out.embeddings = analysis::embed_split(params, test, models::Window::context, encoder);
  analysis::KMeansOptions opts;
  opts.clusters = synth::kNumRegimes;
  opts.restarts = c.analyze.kmeans_restarts;
  opts.seed = c.analyze.kmeans_seed;
  out.kmeans = analysis::kmeans(out.embeddings.rows, out.embeddings.dim, opts);
  out.purity = analysis::purity(out.kmeans.assignments, out.embeddings.labels);
  return out;
}

}  // namespace

analysis::AnalysisReport run_analyze(const ExperimentConfig& c, const AnalyzeInputs& in,
                                     std::ostream& out) {
  validate(c);
  const fs::path test_path = c.data.out_dir / "test.kjd";
  const synth::Dataset test = synth::read_dataset(test_path);
  const synth::DataConfig data = synth::config_from_manifest(synth::read_manifest(
      synth::manifest_path(test_path)));
  fs::create_directories(c.analyze.out_dir);

  models::ModelConfig jm = c.model;
  jm.mode = ModelMode::jepa;
  models::ModelParams<float> jepa = models::load_checkpoint(in.jepa, jm);
  fs::path init_path = in.jepa_init.value_or(fs::path(in.jepa).replace_extension(".init.kjc"));
  models::ModelParams<float> untrained = fs::exists(init_path)
                                             ? models::load_checkpoint(init_path, jm)
                                             : models::init_params<float>(jm, c.train.seed);
  if (!fs::exists(init_path))
    out << "note: " << init_path.string() << " not found, untrained baseline re-initialised from "
        << "train.seed=" << c.train.seed << '\n';

  analysis::AnalysisReport r;
  const Clustering jc = cluster(jepa, test, c, c.analyze.encoder);
  r.purity_jepa = jc.purity;
  analysis::export_embeddings(jc.embeddings, c.analyze.out_dir / "embeddings_jepa.csv");

  const analysis::PredictorMatrix pm =
      jm.predictor == models::PredictorKind::linear
          ? analysis::PredictorMatrix::from_params(jepa)
          : analysis::fit_linear_predictor(jepa, jc.embeddings);
  if (jm.predictor != models::PredictorKind::linear)
    out << "note: MLP predictor, matrix diagnostics use its least-squares linear fit\n";
  const analysis::MDiagnostics md = analysis::m_diagnostics(pm);
  r.frob_rel = md.frob_rel;
  r.skew_rel = md.skew_rel;
  r.eigen_mags = md.eigen_mags;
  const analysis::CentroidAction ca = analysis::centroid_action(pm, jc.kmeans.centroids);
  r.centroid_errors = ca.errors;
  r.centroid_mean = ca.mean;

  r.invariance_err = analysis::pathwise_invariance(jepa, test, c.analyze.encoder);
  r.invariance_err_untrained = analysis::pathwise_invariance(untrained, test, c.analyze.encoder);

  analysis::DecompositionOptions dopts;
  dopts.draws = c.analyze.decomposition_draws;
  r.decomposition_gap = analysis::loss_decomposition_check(jepa, test, data, dopts).gap;

  if (in.ae) {
    models::ModelConfig am = c.model;
    am.mode = ModelMode::ae;
    models::ModelParams<float> ae = models::load_checkpoint(*in.ae, am);
    const Clustering ac = cluster(ae, test, c, analysis::Encoder::online);
    r.purity_ae = ac.purity;
    analysis::export_embeddings(ac.embeddings, c.analyze.out_dir / "embeddings_ae.csv");
  }

  analysis::write_report(r, c.analyze.out_dir / "report.txt", c.analyze.out_dir / "report.json");
  out << analysis::to_text(r);
  return r;
}

int run_report(const fs::path& report, std::ostream& out) {
  const analysis::AnalysisReport r = analysis::read_report(report);
  analysis::print_summary(r, out);
  for (const auto& line : analysis::check_thresholds(r))
    if (!line.pass) return 1;
  return 0;
}

int run_gradcheck(const ExperimentConfig& c, std::uint64_t seed, std::ostream& out) {
  namespace th = analysis::thresholds;
  bool ok = true;
  char buf[200];
  auto print = [&](const std::string& name, const GradCheckResult& g, double limit) {
    const bool pass = g.max_rel_error <= limit;
    ok = ok && pass;
    std::snprintf(buf, sizeof buf,
                  "%s %-26s max_rel=%.3e (<= %.0e) coords=%zu kink_skipped=%zu worst=%s[%zu]\n",
                  pass ? "PASS" : "FAIL", name.c_str(), g.max_rel_error, limit, g.checked,
                  g.kink_skipped, g.worst_param.c_str(), g.worst_index);
    out << buf;
  };
  GradCheckOptions opts;
  opts.seed = seed;
  for (const auto& [name, g] : layer_grad_checks(seed, opts)) print(name, g, th::kGradCheckLayerMax);
  models::ModelConfig jepa = c.model, ae = c.model;
  jepa.mode = models::ModelMode::jepa;
  ae.mode = models::ModelMode::ae;
  print("jepa_composite", models::jepa_grad_check(jepa, seed, 2, opts), th::kGradCheckCompositeMax);
  GradCheckOptions ae_opts = opts;
  ae_opts.step = th::kAeGradCheckStep;
  print("ae_composite", models::ae_grad_check(ae, seed, 2, ae_opts), th::kAeGradCheckMax);
  return ok ? 0 : 1;
}

}  // namespace kjepa::cli
