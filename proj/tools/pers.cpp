// Command-line surface for the multi-view personality profiling pipeline:
// stats, preprocess, featurize, train, evaluate, predict, synth.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pers/pipeline.hpp"

namespace {

using pers::PipelineConfig;

struct CommonFlags {
  std::string config_path;
  std::string corpus;
  std::string images;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string views;
  std::string dimension;
  std::string baseline;

  CLI::Option* o_corpus = nullptr;
  CLI::Option* o_images = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_workers = nullptr;
  CLI::Option* o_views = nullptr;
  CLI::Option* o_dimension = nullptr;
  CLI::Option* o_baseline = nullptr;

  void attach(CLI::App* cmd, bool with_model_opts = true) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    o_corpus = cmd->add_option("--corpus", corpus, "users JSONL file");
    o_images = cmd->add_option("--images", images, "image store CSV file or shard directory");
    o_out = cmd->add_option("--out", out, "output directory");
    o_seed = cmd->add_option("--seed", seed, "master seed");
    o_workers = cmd->add_option("--workers", workers, "worker thread count");
    if (with_model_opts) {
      o_views = cmd->add_option("--views", views, "text | image | both");
      o_dimension = cmd->add_option("--dimension", dimension, "EI | SN | TF | JP | all");
      o_baseline = cmd->add_option("--baseline", baseline, "none | single | early | early_pca | all");
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    if (o_corpus && o_corpus->count()) cfg.corpus_path = corpus;
    if (o_images && o_images->count()) cfg.images_path = images;
    if (o_out && o_out->count()) cfg.out_dir = out;
    if (o_seed && o_seed->count()) cfg.seed = seed;
    if (o_workers && o_workers->count()) cfg.workers = workers;
    if (o_views && o_views->count()) cfg.views = views;
    if (o_dimension && o_dimension->count()) cfg.dimension = dimension;
    if (o_baseline && o_baseline->count()) cfg.baseline = baseline;
    return cfg;
  }
};

pers::Corpus ingest_for(const PipelineConfig& cfg, bool need_images,
                        std::optional<pers::ImageConceptStore>& store) {
  if (cfg.corpus_path.empty()) throw pers::ConfigError("no corpus path given (--corpus)");
  pers::Corpus corpus = pers::parse_users_jsonl(cfg.corpus_path);
  if (!cfg.images_path.empty()) {
    store = pers::ImageConceptStore::load(cfg.images_path);
    pers::validate_image_refs(corpus, *store);
    corpus.image_store_path = cfg.images_path;
  } else if (need_images) {
    throw pers::ConfigError("image view requested but no image store given (--images)");
  }
  return corpus;
}

std::filesystem::path ensure_out_dir(const PipelineConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_stats(const PipelineConfig& cfg) {
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus = ingest_for(cfg, false, store);
  const pers::StatsReport report = pers::corpus_stats(corpus);
  std::cout << report.render_text();
  if (!cfg.out_dir.empty()) {
    const auto dir = ensure_out_dir(cfg);
    pers::write_file(dir / "stats.json", report.to_json().dump(2) + "\n");
    pers::write_file(dir / "stats.txt", report.render_text());
  }
  return 0;
}

int run_preprocess_cmd(const PipelineConfig& cfg) {
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus = ingest_for(cfg, false, store);
  const pers::Corpus normalized = pers::run_preprocess(corpus, cfg);
  const auto dir = ensure_out_dir(cfg);
  pers::write_corpus_jsonl(normalized, dir / "preprocessed.jsonl");
  std::cout << "preprocessed " << normalized.users.size() << " of " << corpus.users.size()
            << " users -> " << (dir / "preprocessed.jsonl").string() << "\n";
  return 0;
}

int run_featurize(const PipelineConfig& cfg) {
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus = ingest_for(cfg, cfg.use_image(), store);
  const auto dir = ensure_out_dir(cfg);
  const pers::TrainedViews views =
      pers::featurize_training(corpus, cfg, store ? &*store : nullptr);
  nlohmann::json meta;
  meta["fingerprint"] = cfg.fingerprint();
  if (views.text_featurizer) {
    pers::write_file(dir / "text_featurizer.pft", views.text_featurizer->serialize());
    views.text_features->write_csv(dir / "features_text.csv");
    meta["text"] = {{"k", views.text_featurizer->config.k},
                    {"vocabulary", views.text_featurizer->vocabulary.size()}};
  }
  if (views.image_featurizer) {
    pers::write_file(dir / "image_featurizer.pfi", views.image_featurizer->serialize());
    views.image_features->write_csv(dir / "features_image.csv");
    meta["image"] = {{"k", views.image_featurizer->k_config}};
  }
  pers::write_file(dir / "featurize_meta.json", meta.dump(2) + "\n");
  std::cout << "featurized " << corpus.users.size() << " users -> " << dir.string() << "\n";
  return 0;
}

int run_train_cmd(const PipelineConfig& cfg) {
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus = ingest_for(cfg, cfg.use_image(), store);
  const pers::TrainArtifacts artifacts =
      pers::run_train(corpus, store ? &*store : nullptr, cfg);
  save_train_artifacts(artifacts, cfg);
  std::cout << "trained " << artifacts.models.size() << " dimension model(s), fingerprint "
            << artifacts.fingerprint << " -> " << cfg.out_dir << "\n";
  return 0;
}

int run_evaluate_cmd(const PipelineConfig& cfg, const std::string& model_dir) {
  const pers::TrainArtifacts artifacts = pers::load_train_artifacts(model_dir);
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus =
      ingest_for(cfg, artifacts.models.begin()->second.has_image(), store);
  const pers::EvalReport report =
      pers::run_evaluate(artifacts, corpus, store ? &*store : nullptr, cfg);
  std::cout << report.render_text();
  const auto dir = ensure_out_dir(cfg);
  pers::write_file(dir / "eval_report.json", report.to_json().dump(2) + "\n");
  pers::write_file(dir / "eval_report.txt", report.render_text());
  return 0;
}

int run_predict_cmd(const PipelineConfig& cfg, const std::string& model_dir) {
  const pers::TrainArtifacts artifacts = pers::load_train_artifacts(model_dir);
  std::optional<pers::ImageConceptStore> store;
  const pers::Corpus corpus =
      ingest_for(cfg, artifacts.models.begin()->second.has_image(), store);
  const auto records = pers::run_predict(artifacts, corpus, store ? &*store : nullptr, cfg);
  const auto dir = ensure_out_dir(cfg);
  pers::write_predictions_jsonl(records, dir / "predictions.jsonl");
  std::cout << "predicted " << records.size() << " users -> "
            << (dir / "predictions.jsonl").string() << "\n";
  return 0;
}

int run_synth_cmd(const PipelineConfig& cfg) {
  pers::SynthConfig synth = cfg.synth;
  synth.seed = pers::derive_seed(cfg.seed, "synth");
  const pers::SynthResult result = pers::generate_corpus(synth);
  const auto dir = ensure_out_dir(cfg);
  pers::write_corpus_jsonl(result.corpus, dir / "users.jsonl");
  if (!result.store.empty()) result.store.save_csv(dir / "images.csv");
  nlohmann::json meta;
  meta["n_users"] = synth.n_users;
  meta["posts_per_user"] = synth.posts_per_user;
  meta["tokens_per_post"] = synth.tokens_per_post;
  meta["images_min"] = synth.images_min;
  meta["images_max"] = synth.images_max;
  meta["image_dim"] = synth.image_dim;
  meta["text_signal"] = synth.text_signal;
  meta["image_signal"] = synth.image_signal;
  meta["seed"] = cfg.seed;
  meta["text_bayes_estimate"] = result.report.text_bayes;
  meta["image_bayes_estimate"] = result.report.image_bayes;
  pers::write_file(dir / "synth_meta.json", meta.dump(2) + "\n");
  std::cout << "generated " << result.corpus.users.size() << " users, "
            << result.store.size() << " images -> " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PERS: multi-view stacked-ensemble personality profiling"};
  app.require_subcommand(1);

  CommonFlags stats_flags, prep_flags, feat_flags, train_flags, eval_flags, pred_flags, synth_flags;

  CLI::App* stats_cmd = app.add_subcommand("stats", "corpus statistics report");
  stats_flags.attach(stats_cmd, false);

  CLI::App* prep_cmd = app.add_subcommand("preprocess", "normalize posts into a new corpus file");
  prep_flags.attach(prep_cmd, false);
  bool drop_type_posts = false;
  prep_cmd->add_flag("--drop-type-posts", drop_type_posts,
                     "drop posts containing raw type mentions instead of masking");

  CLI::App* feat_cmd = app.add_subcommand("featurize", "fit featurizers and export matrices");
  feat_flags.attach(feat_cmd);

  CLI::App* train_cmd = app.add_subcommand("train", "train the stacked ensemble per dimension");
  train_flags.attach(train_cmd);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate trained models on the held-out split");
  eval_flags.attach(eval_cmd);
  std::string eval_model_dir;
  eval_cmd->add_option("--model-dir", eval_model_dir, "directory with train artifacts");

  CLI::App* pred_cmd = app.add_subcommand("predict", "per-user predictions as JSONL");
  pred_flags.attach(pred_cmd);
  std::string pred_model_dir;
  pred_cmd->add_option("--model-dir", pred_model_dir, "directory with train artifacts");

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_flags.attach(synth_cmd, false);
  std::vector<double> text_signal, image_signal;
  std::string label_dist;
  int n_users = 0, posts_per_user = 0, images_min = -1, images_max = -1, image_dim = 0;
  auto* o_n_users = synth_cmd->add_option("--n-users", n_users, "number of users");
  auto* o_ppu = synth_cmd->add_option("--posts-per-user", posts_per_user, "posts per user");
  auto* o_imin = synth_cmd->add_option("--images-min", images_min, "min images per user");
  auto* o_imax = synth_cmd->add_option("--images-max", images_max, "max images per user");
  auto* o_idim = synth_cmd->add_option("--image-dim", image_dim, "image concept dimension");
  auto* o_tsig = synth_cmd->add_option("--text-signal", text_signal,
                                       "per-dimension text signal strengths (EI,SN,TF,JP)")
                     ->delimiter(',')
                     ->expected(4);
  auto* o_isig = synth_cmd->add_option("--image-signal", image_signal,
                                       "per-dimension image signal strengths (EI,SN,TF,JP)")
                     ->delimiter(',')
                     ->expected(4);
  auto* o_dist = synth_cmd->add_option("--label-dist", label_dist,
                                       "uniform | twitter | facebook | percafe");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_cmd->parsed()) return run_stats(stats_flags.resolve());
    if (prep_cmd->parsed()) {
      PipelineConfig cfg = prep_flags.resolve();
      if (drop_type_posts) cfg.drop_type_posts = true;
      return run_preprocess_cmd(cfg);
    }
    if (feat_cmd->parsed()) {
      PipelineConfig cfg = feat_flags.resolve();
      cfg.validate();
      return run_featurize(cfg);
    }
    if (train_cmd->parsed()) return run_train_cmd(train_flags.resolve());
    if (eval_cmd->parsed()) {
      PipelineConfig cfg = eval_flags.resolve();
      const std::string dir = !eval_model_dir.empty() ? eval_model_dir : cfg.out_dir;
      return run_evaluate_cmd(cfg, dir);
    }
    if (pred_cmd->parsed()) {
      PipelineConfig cfg = pred_flags.resolve();
      const std::string dir = !pred_model_dir.empty() ? pred_model_dir : cfg.out_dir;
      return run_predict_cmd(cfg, dir);
    }
    if (synth_cmd->parsed()) {
      PipelineConfig cfg = synth_flags.resolve();
      if (o_n_users->count()) cfg.synth.n_users = n_users;
      if (o_ppu->count()) cfg.synth.posts_per_user = posts_per_user;
      if (o_imin->count()) cfg.synth.images_min = images_min;
      if (o_imax->count()) cfg.synth.images_max = images_max;
      if (o_idim->count()) cfg.synth.image_dim = image_dim;
      if (o_tsig->count())
        for (int d = 0; d < 4; ++d) cfg.synth.text_signal[std::size_t(d)] = text_signal[std::size_t(d)];
      if (o_isig->count())
        for (int d = 0; d < 4; ++d) cfg.synth.image_signal[std::size_t(d)] = image_signal[std::size_t(d)];
      if (o_dist->count()) {
        if (label_dist == "uniform") cfg.synth.label_distribution = pers::SynthConfig::uniform_distribution();
        else cfg.synth.label_distribution = pers::reference_type_distribution(pers::source_from_name(label_dist));
      }
      return run_synth_cmd(cfg);
    }
  } catch (const pers::Error& e) {
    nlohmann::json err;
    err["code"] = e.exit_code();
    err["name"] = pers::error_code_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["code"] = int(pers::ErrorCode::internal);
    err["name"] = "InternalError";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return int(pers::ErrorCode::internal);
  }
  return 0;
}
