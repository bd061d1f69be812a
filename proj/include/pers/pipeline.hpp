#pragma once

// Batch pipeline orchestration behind the CLI: config file handling and the
// stats / preprocess / featurize / train / evaluate / predict / synth flows.
// Artifacts embed the config fingerprint; evaluation refuses mismatches.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pers/bytes.hpp"
#include "pers/corpus.hpp"
#include "pers/errors.hpp"
#include "pers/features.hpp"
#include "pers/metrics.hpp"
#include "pers/stacking.hpp"
#include "pers/synth.hpp"
#include "pers/textprep.hpp"

namespace pers {

struct PipelineConfig {
  // paths
  std::string corpus_path;
  std::string images_path;  // empty = no image store
  std::string out_dir = "out";
  // normalizer
  std::string emoji_table_path;        // empty = bundled table
  std::string datetime_patterns_path;  // empty = bundled patterns
  bool drop_type_posts = false;        // preprocess: drop, not mask
  // filtering / split
  int min_posts = 10;
  double split_ratio = 0.85;
  // featurizers
  Eigen::Index text_k = 100;
  Eigen::Index image_k = 200;
  int min_df = 2;
  double max_df_ratio = 0.95;
  Eigen::Index early_pca_k = 200;
  // stacking
  StackingConfig stacking = StackingConfig::defaults();
  // run controls
  std::uint64_t seed = 42;
  int workers = 1;
  std::string views = "both";     // text | image | both
  std::string dimension = "all";  // EI | SN | TF | JP | all
  std::string baseline = "none";  // none | single | early | early_pca | all
  // synth
  SynthConfig synth;

  bool use_text() const { return views == "text" || views == "both"; }
  bool use_image() const { return views == "image" || views == "both"; }

  void validate() const {
    if (views != "text" && views != "image" && views != "both")
      throw ConfigError("views must be text, image or both");
    if (dimension != "all") dimension_from_name(dimension);
    if (baseline != "none" && baseline != "single" && baseline != "early" &&
        baseline != "early_pca" && baseline != "all")
      throw ConfigError("baseline must be none, single, early, early_pca or all");
    if (text_k < 1 || image_k < 1 || early_pca_k < 1) throw ConfigError("feature dims must be >= 1");
    if (min_posts < 1) throw ConfigError("min_posts must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio <= 1.0)) throw ConfigError("split ratio in (0,1]");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    stacking.validate();
  }

  std::vector<Dimension> dimensions() const {
    if (dimension == "all")
      return {Dimension::EI, Dimension::SN, Dimension::TF, Dimension::JP};
    return {dimension_from_name(dimension)};
  }

  NormalizerConfig normalizer() const {
    NormalizerConfig cfg = NormalizerConfig::defaults();
    if (!emoji_table_path.empty()) cfg.load_emoji_csv(emoji_table_path);
    if (!datetime_patterns_path.empty()) cfg.load_datetime_patterns(datetime_patterns_path);
    return cfg;
  }

  // Stacking config with the pipeline seed folded in.
  StackingConfig seeded_stacking() const {
    StackingConfig cfg = stacking;
    cfg.seed = derive_seed(seed, "stacking");
    return cfg;
  }

  nlohmann::json featurizer_config_json() const {
    return nlohmann::json{{"text_k", text_k},
                          {"image_k", image_k},
                          {"min_df", min_df},
                          {"max_df_ratio", max_df_ratio},
                          {"views", views},
                          {"split_ratio", split_ratio},
                          {"min_posts", min_posts},
                          {"seed", seed}};
  }

  std::string fingerprint() const {
    return config_fingerprint(seeded_stacking(), featurizer_config_json());
  }

  static PipelineConfig load(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    PipelineConfig cfg;
    cfg.merge_json(j);
    return cfg;
  }

  void merge_json(const nlohmann::json& j) {
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      if (p.contains("corpus")) corpus_path = p["corpus"].get<std::string>();
      if (p.contains("images")) images_path = p["images"].get<std::string>();
      if (p.contains("out")) out_dir = p["out"].get<std::string>();
    }
    if (j.contains("normalizer")) {
      const auto& n = j["normalizer"];
      if (n.contains("emoji_table")) emoji_table_path = n["emoji_table"].get<std::string>();
      if (n.contains("datetime_patterns"))
        datetime_patterns_path = n["datetime_patterns"].get<std::string>();
      if (n.contains("drop_type_posts")) drop_type_posts = n["drop_type_posts"].get<bool>();
    }
    if (j.contains("filter") && j["filter"].contains("min_posts"))
      min_posts = j["filter"]["min_posts"].get<int>();
    if (j.contains("split") && j["split"].contains("ratio"))
      split_ratio = j["split"]["ratio"].get<double>();
    if (j.contains("features")) {
      const auto& f = j["features"];
      if (f.contains("text_k")) text_k = f["text_k"].get<Eigen::Index>();
      if (f.contains("image_k")) image_k = f["image_k"].get<Eigen::Index>();
      if (f.contains("min_df")) min_df = f["min_df"].get<int>();
      if (f.contains("max_df_ratio")) max_df_ratio = f["max_df_ratio"].get<double>();
      if (f.contains("early_pca_k")) early_pca_k = f["early_pca_k"].get<Eigen::Index>();
    }
    if (j.contains("stacking")) {
      const auto& s = j["stacking"];
      if (s.contains("k_folds")) stacking.k_folds = s["k_folds"].get<int>();
      if (s.contains("meta_c")) stacking.meta_c = s["meta_c"].get<double>();
      if (s.contains("base_specs")) {
        stacking.base_specs.clear();
        for (const auto& spec : s["base_specs"])
          stacking.base_specs.push_back(LearnerSpec::from_json(spec));
      }
    }
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) workers = j["workers"].get<int>();
    if (j.contains("views")) views = j["views"].get<std::string>();
    if (j.contains("dimension")) dimension = j["dimension"].get<std::string>();
    if (j.contains("baseline")) baseline = j["baseline"].get<std::string>();
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      if (s.contains("n_users")) synth.n_users = s["n_users"].get<int>();
      if (s.contains("posts_per_user")) synth.posts_per_user = s["posts_per_user"].get<int>();
      if (s.contains("tokens_per_post")) synth.tokens_per_post = s["tokens_per_post"].get<int>();
      if (s.contains("images_min")) synth.images_min = s["images_min"].get<int>();
      if (s.contains("images_max")) synth.images_max = s["images_max"].get<int>();
      if (s.contains("signal_vocab_size"))
        synth.signal_vocab_size = s["signal_vocab_size"].get<int>();
      if (s.contains("noise_vocab_size")) synth.noise_vocab_size = s["noise_vocab_size"].get<int>();
      if (s.contains("image_dim")) synth.image_dim = s["image_dim"].get<int>();
      if (s.contains("decoy_rate")) synth.decoy_rate = s["decoy_rate"].get<double>();
      if (s.contains("text_signal"))
        for (int d = 0; d < 4; ++d) synth.text_signal[std::size_t(d)] = s["text_signal"].at(std::size_t(d)).get<double>();
      if (s.contains("image_signal"))
        for (int d = 0; d < 4; ++d) synth.image_signal[std::size_t(d)] = s["image_signal"].at(std::size_t(d)).get<double>();
      if (s.contains("label_distribution")) {
        if (s["label_distribution"].is_string()) {
          synth.label_distribution =
              reference_type_distribution(source_from_name(s["label_distribution"].get<std::string>()));
        } else {
          for (int t = 0; t < 16; ++t)
            synth.label_distribution[std::size_t(t)] = s["label_distribution"].at(std::size_t(t)).get<double>();
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Shared helpers

namespace detail {

inline Corpus select_users(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  Corpus out;
  out.image_store_path = corpus.image_store_path;
  for (const auto& user : corpus.users)
    if (wanted.count(user.user_id)) out.users.push_back(user);
  if (out.users.size() != wanted.size())
    throw ConfigError("split references " + std::to_string(wanted.size()) +
                      " users but the corpus matched " + std::to_string(out.users.size()));
  return out;
}

inline std::vector<int> labels_for(const Corpus& corpus, Dimension dim) {
  std::vector<int> y;
  y.reserve(corpus.users.size());
  for (const auto& user : corpus.users) y.push_back(user.label.bit(dim));
  return y;
}

inline std::string spec_display_name(const LearnerSpec& spec) {
  if (spec.kind == LearnerKind::gbt && spec.goss_enabled) return "gbt_goss";
  return learner_kind_name(spec.kind);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, text);
}

}  // namespace detail

struct TrainedViews {
  std::optional<TextFeaturizer> text_featurizer;
  std::optional<ImageFeaturizer> image_featurizer;
  std::optional<FeatureMatrix> text_features;   // train rows
  std::optional<FeatureMatrix> image_features;  // train rows
};

// Fits featurizers on the training corpus only and produces train features.
inline TrainedViews featurize_training(const Corpus& train_corpus, const PipelineConfig& cfg,
                                       const ImageConceptStore* store) {
  TrainedViews views;
  const NormalizerConfig norm = cfg.normalizer();
  if (cfg.use_text()) {
    const Documents docs = build_user_documents(train_corpus, norm, cfg.workers);
    TextFeaturizerConfig tf_cfg;
    tf_cfg.k = cfg.text_k;
    tf_cfg.min_df = cfg.min_df;
    tf_cfg.max_df_ratio = cfg.max_df_ratio;
    views.text_featurizer = fit_text_featurizer(docs, tf_cfg, derive_seed(cfg.seed, "text-featurizer"));
    views.text_features = views.text_featurizer->apply(docs);
  }
  if (cfg.use_image()) {
    if (store == nullptr) throw ConfigError("image view requested but no image store given");
    const FeatureMatrix agg = aggregate_image_concepts(train_corpus, *store);
    views.image_featurizer =
        fit_image_featurizer(agg, cfg.image_k, derive_seed(cfg.seed, "image-featurizer"));
    views.image_features = views.image_featurizer->apply(agg);
  }
  return views;
}

// Test/predict-time features through already-fitted featurizers.
inline std::pair<std::optional<FeatureMatrix>, std::optional<FeatureMatrix>> featurize_with(
    const Corpus& corpus, const PipelineConfig& cfg, const std::optional<TextFeaturizer>& text_f,
    const std::optional<ImageFeaturizer>& image_f, const ImageConceptStore* store) {
  std::optional<FeatureMatrix> text_x, image_x;
  if (text_f) {
    const Documents docs = build_user_documents(corpus, cfg.normalizer(), cfg.workers);
    text_x = text_f->apply(docs);
  }
  if (image_f) {
    if (store == nullptr) throw ConfigError("image view requested but no image store given");
    image_x = image_f->apply(aggregate_image_concepts(corpus, *store));
  }
  return {std::move(text_x), std::move(image_x)};
}

// ---------------------------------------------------------------------------
// Baselines: independently trained base classifiers per view, early fusion,
// and early fusion + PCA.

struct BaselineEntry {
  std::string name;   // "gbt", "random_forest", ...
  std::string view;   // "text", "image", "early", "early_pca"
  std::string dimension;
  LearnerModel model;
};

struct BaselineSet {
  std::vector<BaselineEntry> entries;
  std::optional<Projector> early_pca;  // shared by early_pca entries
  std::string fingerprint;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "pers.baselines";
    j["version"] = 1;
    j["fingerprint"] = fingerprint;
    j["early_pca"] =
        early_pca ? nlohmann::json(base64_encode(early_pca->serialize())) : nlohmann::json(nullptr);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries)
      arr.push_back({{"name", e.name},
                     {"view", e.view},
                     {"dimension", e.dimension},
                     {"model", e.model.to_json()}});
    j["entries"] = arr;
    return j;
  }

  static BaselineSet from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "pers.baselines" || j.value("version", 0) != 1)
      throw IoError("baseline payload: unknown format/version");
    BaselineSet set;
    set.fingerprint = j.at("fingerprint").get<std::string>();
    if (!j.at("early_pca").is_null())
      set.early_pca = Projector::deserialize(base64_decode(j.at("early_pca").get<std::string>()));
    for (const auto& e : j.at("entries")) {
      BaselineEntry entry;
      entry.name = e.at("name").get<std::string>();
      entry.view = e.at("view").get<std::string>();
      entry.dimension = e.at("dimension").get<std::string>();
      entry.model = LearnerModel::from_json(e.at("model"));
      set.entries.push_back(std::move(entry));
    }
    return set;
  }
};

inline BaselineSet train_baselines(const Corpus& train_corpus, const TrainedViews& views,
                                   const PipelineConfig& cfg) {
  BaselineSet set;
  set.fingerprint = cfg.fingerprint();
  const bool want_single = cfg.baseline == "single" || cfg.baseline == "all";
  const bool want_early = cfg.baseline == "early" || cfg.baseline == "all";
  const bool want_early_pca = cfg.baseline == "early_pca" || cfg.baseline == "all";
  if (!(want_single || want_early || want_early_pca)) return set;

  std::optional<FeatureMatrix> fused;
  if ((want_early || want_early_pca) && views.text_features && views.image_features)
    fused = fuse_features(*views.text_features, *views.image_features);

  std::optional<FeatureMatrix> fused_pca;
  if (want_early_pca && fused) {
    const Eigen::Index k =
        std::min<Eigen::Index>(cfg.early_pca_k, std::min(fused->n(), fused->dim()));
    set.early_pca = pca_fit(fused->rows, k, derive_seed(cfg.seed, "early-pca"));
    fused_pca = FeatureMatrix{project(*set.early_pca, fused->rows), fused->row_ids, View::fused, {}};
  }

  const StackingConfig stack_cfg = cfg.seeded_stacking();
  for (Dimension dim : cfg.dimensions()) {
    const std::vector<int> y = detail::labels_for(train_corpus, dim);
    for (std::size_t j = 0; j < stack_cfg.base_specs.size(); ++j) {
      const LearnerSpec& spec = stack_cfg.base_specs[j];
      const std::string name = detail::spec_display_name(spec);
      const std::uint64_t seed_base =
          derive_seed(stack_cfg.seed, "baseline", {std::uint64_t(j), std::uint64_t(int(dim))});
      auto fit_one = [&](const FeatureMatrix& x, const std::string& view_tag, std::uint64_t s) {
        set.entries.push_back(
            {name, view_tag, dimension_name(dim), fit_learner(x.rows, y, spec, s, cfg.workers)});
      };
      if (want_single) {
        if (views.text_features) fit_one(*views.text_features, "text", derive_seed(seed_base, "text"));
        if (views.image_features)
          fit_one(*views.image_features, "image", derive_seed(seed_base, "image"));
      }
      if (want_early && fused) fit_one(*fused, "early", derive_seed(seed_base, "early"));
      if (want_early_pca && fused_pca)
        fit_one(*fused_pca, "early_pca", derive_seed(seed_base, "early_pca"));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Command flows

struct TrainArtifacts {
  std::map<std::string, PersModel> models;  // by dimension name
  SplitAssignment split;
  std::optional<BaselineSet> baselines;
  std::string fingerprint;
  int min_posts = 10;  // echoed from training so evaluation filters identically
};

inline TrainArtifacts run_train(const Corpus& ingested, const ImageConceptStore* store,
                                const PipelineConfig& cfg) {
  cfg.validate();
  const Corpus filtered = filter_min_posts(ingested, cfg.min_posts);
  if (filtered.users.empty()) throw InsufficientData("no users left after the min-post filter");

  TrainArtifacts artifacts;
  artifacts.fingerprint = cfg.fingerprint();
  artifacts.min_posts = cfg.min_posts;
  artifacts.split = stratified_split(filtered, cfg.split_ratio, derive_seed(cfg.seed, "split"));

  const Corpus train_corpus = detail::select_users(filtered, artifacts.split.train_ids);
  const TrainedViews views = featurize_training(train_corpus, cfg, store);

  const StackingConfig stack_cfg = cfg.seeded_stacking();
  for (Dimension dim : cfg.dimensions()) {
    const std::vector<int> y = detail::labels_for(train_corpus, dim);
    PersModel model = pers_fit(views.text_features ? &*views.text_features : nullptr,
                               views.image_features ? &*views.image_features : nullptr, y,
                               stack_cfg, dim, cfg.workers);
    model.text_featurizer = views.text_featurizer;
    model.image_featurizer = views.image_featurizer;
    model.fingerprint = artifacts.fingerprint;
    artifacts.models.emplace(dimension_name(dim), std::move(model));
  }

  if (cfg.baseline != "none") artifacts.baselines = train_baselines(train_corpus, views, cfg);
  return artifacts;
}

inline void save_train_artifacts(const TrainArtifacts& artifacts, const PipelineConfig& cfg) {
  const std::filesystem::path out(cfg.out_dir);
  std::filesystem::create_directories(out);
  for (const auto& [dim_name, model] : artifacts.models)
    write_file(out / ("model_" + dim_name + ".pers.json"), model.serialize());
  nlohmann::json split_doc;
  split_doc["fingerprint"] = artifacts.fingerprint;
  split_doc["split"] = artifacts.split.to_json();
  write_file(out / "split.json", split_doc.dump(2) + "\n");
  if (artifacts.baselines)
    write_file(out / "baselines.json", artifacts.baselines->to_json().dump() + "\n");
  nlohmann::json meta;
  meta["fingerprint"] = artifacts.fingerprint;
  meta["views"] = cfg.views;
  meta["dimension"] = cfg.dimension;
  meta["baseline"] = cfg.baseline;
  meta["stacking"] = cfg.seeded_stacking().to_json();
  meta["featurizers"] = cfg.featurizer_config_json();
  write_file(out / "train_meta.json", meta.dump(2) + "\n");
}

inline TrainArtifacts load_train_artifacts(const std::string& model_dir) {
  const std::filesystem::path dir(model_dir);
  if (!std::filesystem::exists(dir / "train_meta.json"))
    throw MissingArtifact("no train_meta.json under " + model_dir +
                          " (run the train command first)");
  TrainArtifacts artifacts;
  const nlohmann::json meta = nlohmann::json::parse(read_file(dir / "train_meta.json"));
  artifacts.fingerprint = meta.at("fingerprint").get<std::string>();
  if (meta.contains("featurizers") && meta["featurizers"].contains("min_posts"))
    artifacts.min_posts = meta["featurizers"]["min_posts"].get<int>();
  const nlohmann::json split_doc = nlohmann::json::parse(read_file(dir / "split.json"));
  if (split_doc.at("fingerprint").get<std::string>() != artifacts.fingerprint)
    throw ConfigError("split.json fingerprint does not match train_meta.json");
  artifacts.split = SplitAssignment::from_json(split_doc.at("split"));
  for (Dimension d : kAllDimensions) {
    const std::filesystem::path path = dir / ("model_" + std::string(dimension_name(d)) + ".pers.json");
    if (!std::filesystem::exists(path)) continue;
    PersModel model = PersModel::deserialize(read_file(path));
    if (model.fingerprint != artifacts.fingerprint)
      throw ConfigError("model " + path.string() + " fingerprint mismatch");
    artifacts.models.emplace(dimension_name(d), std::move(model));
  }
  if (artifacts.models.empty()) throw MissingArtifact("no model_*.pers.json under " + model_dir);
  const std::filesystem::path baselines_path = dir / "baselines.json";
  if (std::filesystem::exists(baselines_path)) {
    BaselineSet set = BaselineSet::from_json(nlohmann::json::parse(read_file(baselines_path)));
    if (set.fingerprint != artifacts.fingerprint)
      throw ConfigError("baselines.json fingerprint mismatch");
    artifacts.baselines = std::move(set);
  }
  return artifacts;
}

inline EvalReport run_evaluate(const TrainArtifacts& artifacts, const Corpus& ingested,
                               const ImageConceptStore* store, const PipelineConfig& cfg) {
  const Corpus filtered = filter_min_posts(ingested, artifacts.min_posts);
  const Corpus test_corpus = detail::select_users(filtered, artifacts.split.test_ids);
  if (test_corpus.users.empty()) throw InsufficientData("the stored split has no test users");

  const PersModel& first = artifacts.models.begin()->second;
  auto [text_x, image_x] = featurize_with(test_corpus, cfg, first.text_featurizer,
                                          first.image_featurizer, store);

  EvalReport report;
  report.fingerprint = artifacts.fingerprint;
  report.views = first.has_text() && first.has_image() ? "both"
                 : first.has_text()                    ? "text"
                                                       : "image";
  {
    std::map<std::string, std::int64_t> sources;
    for (const auto& u : test_corpus.users) sources[source_name(u.source)] += 1;
    std::string tag;
    for (const auto& [name, count] : sources) {
      if (!tag.empty()) tag += "+";
      tag += name + "(" + std::to_string(count) + ")";
    }
    report.corpus_tag = tag;
  }

  EvalRow pers_row;
  pers_row.model = "PERS";
  for (const auto& [dim_name, model] : artifacts.models) {
    const Dimension dim = dimension_from_name(dim_name);
    if (model.has_text() && !text_x) throw MissingArtifact("model lacks its text featurizer");
    if (model.has_image() && !image_x) throw MissingArtifact("model lacks its image featurizer");
    const PersPrediction pred =
        pers_predict(model, model.has_text() ? &*text_x : nullptr,
                     model.has_image() ? &*image_x : nullptr);
    pers_row.dims[dim_name] = evaluate_binary(detail::labels_for(test_corpus, dim), pred.labels);
  }
  report.rows.push_back(std::move(pers_row));

  if (artifacts.baselines) {
    std::optional<FeatureMatrix> fused, fused_pca;
    if (text_x && image_x) fused = fuse_features(*text_x, *image_x);
    if (fused && artifacts.baselines->early_pca)
      fused_pca = FeatureMatrix{project(*artifacts.baselines->early_pca, fused->rows),
                                fused->row_ids, View::fused, {}};
    std::map<std::string, EvalRow> rows;  // keyed by "name/view"
    for (const auto& entry : artifacts.baselines->entries) {
      const FeatureMatrix* x = nullptr;
      if (entry.view == "text" && text_x) x = &*text_x;
      else if (entry.view == "image" && image_x) x = &*image_x;
      else if (entry.view == "early" && fused) x = &*fused;
      else if (entry.view == "early_pca" && fused_pca) x = &*fused_pca;
      if (x == nullptr) continue;
      const Dimension dim = dimension_from_name(entry.dimension);
      const std::vector<int> labels = predict_labels(entry.model, x->rows);
      EvalRow& row = rows[entry.name + "/" + entry.view];
      row.model = entry.name + "/" + entry.view;
      row.dims[entry.dimension] = evaluate_binary(detail::labels_for(test_corpus, dim), labels);
    }
    for (auto& [key, row] : rows) report.rows.push_back(std::move(row));
  }
  return report;
}

struct PredictionRecord {
  std::string user_id;
  std::map<std::string, char> poles;     // dimension -> predicted pole letter
  std::map<std::string, double> scores;  // dimension -> meta decision value
};

inline std::vector<PredictionRecord> run_predict(const TrainArtifacts& artifacts,
                                                 const Corpus& corpus,
                                                 const ImageConceptStore* store,
                                                 const PipelineConfig& cfg) {
  if (corpus.users.empty()) throw EmptyInput("no users to predict");
  const PersModel& first = artifacts.models.begin()->second;
  auto [text_x, image_x] =
      featurize_with(corpus, cfg, first.text_featurizer, first.image_featurizer, store);

  std::vector<PredictionRecord> records(corpus.users.size());
  for (std::size_t i = 0; i < corpus.users.size(); ++i)
    records[i].user_id = corpus.users[i].user_id;
  for (const auto& [dim_name, model] : artifacts.models) {
    const Dimension dim = dimension_from_name(dim_name);
    if (model.has_text() && !text_x) throw MissingArtifact("model lacks its text featurizer");
    if (model.has_image() && !image_x) throw MissingArtifact("model lacks its image featurizer");
    const PersPrediction pred = pers_predict(model, model.has_text() ? &*text_x : nullptr,
                                             model.has_image() ? &*image_x : nullptr);
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].poles[dim_name] =
          kPoleLetters[std::size_t(int(dim))][std::size_t(pred.labels[i])];
      records[i].scores[dim_name] = pred.scores[Eigen::Index(i)];
    }
  }
  return records;
}

inline void write_predictions_jsonl(const std::vector<PredictionRecord>& records,
                                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& rec : records) {
    nlohmann::json j;
    j["user_id"] = rec.user_id;
    for (const auto& [dim, pole] : rec.poles) j[dim] = std::string(1, pole);
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [dim, score] : rec.scores) scores[dim] = score;
    j["scores"] = scores;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write to " + path.string());
}

// Preprocess flow: normalize every post; optionally drop posts that contain a
// raw type mention instead of masking them. Users left without posts are
// dropped.
inline Corpus run_preprocess(const Corpus& corpus, const PipelineConfig& cfg) {
  const NormalizerConfig norm = cfg.normalizer();
  Corpus out;
  out.image_store_path = corpus.image_store_path;
  for (const auto& user : corpus.users) {
    UserRecord copy = user;
    copy.posts.clear();
    for (const auto& post : user.posts) {
      if (cfg.drop_type_posts && contains_type_mention(post)) continue;
      copy.posts.push_back(preprocess_post(post, norm));
    }
    if (!copy.posts.empty()) out.users.push_back(std::move(copy));
  }
  return out;
}

}  // namespace pers
