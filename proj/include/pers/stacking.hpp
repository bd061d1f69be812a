#pragma once

// Two-step stacked generalization. Stage 1 produces per-modality out-of-fold
// score matrices (n x J) from J base learners under a shared K-fold
// assignment; the per-modality matrices are fused column-wise into H (n x 2J);
// stage 2 repeats the out-of-fold protocol on H (n x J); a linear SVM meta
// classifier is trained on the stage-2 scores. Inference runs through
// full-data refits of every stage model.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pers/bytes.hpp"
#include "pers/errors.hpp"
#include "pers/features.hpp"
#include "pers/learners.hpp"
#include "pers/mbti.hpp"
#include "pers/parallel.hpp"
#include "pers/rng.hpp"

namespace pers {

struct StackingConfig {
  int k_folds = 5;
  std::vector<LearnerSpec> base_specs;
  double meta_c = 1.0;
  std::uint64_t seed = 0;

  int j() const { return int(base_specs.size()); }

  // The default base trio: boosted trees, boosted trees with one-side
  // sampling, and a random forest.
  static StackingConfig defaults() {
    StackingConfig cfg;
    cfg.base_specs = {LearnerSpec::gbt(), LearnerSpec::gbt_goss(), LearnerSpec::random_forest()};
    return cfg;
  }

  void validate() const {
    if (k_folds < 2) throw ConfigError("stacking needs k_folds >= 2");
    if (base_specs.empty()) throw ConfigError("stacking needs at least one base learner");
    if (!(meta_c > 0.0)) throw ConfigError("meta_c must be positive");
    for (const auto& spec : base_specs) spec.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& s : base_specs) specs.push_back(s.to_json());
    return nlohmann::json{
        {"k_folds", k_folds}, {"base_specs", specs}, {"meta_c", meta_c}, {"seed", seed}};
  }

  static StackingConfig from_json(const nlohmann::json& j) {
    StackingConfig cfg;
    cfg.k_folds = j.at("k_folds").get<int>();
    for (const auto& s : j.at("base_specs")) cfg.base_specs.push_back(LearnerSpec::from_json(s));
    cfg.meta_c = j.at("meta_c").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
  }
};

// 16-hex-digit digest of the stacking + featurizer configuration; embedded in
// every artifact so mismatched pieces refuse to evaluate together.
inline std::string config_fingerprint(const StackingConfig& cfg,
                                      const nlohmann::json& featurizer_cfg) {
  nlohmann::json j;
  j["stacking"] = cfg.to_json();
  j["featurizers"] = featurizer_cfg;
  const std::uint64_t h = hash_string(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Folds

struct FoldAssignment {
  std::vector<int> fold_of;  // per row, 0..k-1
  int k = 0;
};

// Seed-shuffled rows dealt into K near-equal contiguous folds. The assignment
// depends only on (n, k, seed), so stages and modalities share it.
inline FoldAssignment make_folds(int n, int k, std::uint64_t seed) {
  if (k < 2) throw FoldError("need at least 2 folds");
  if (k > n) throw FoldError("more folds (" + std::to_string(k) + ") than rows (" +
                             std::to_string(n) + ")");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[std::size_t(i)] = i;
  Rng rng(derive_seed(seed, "fold-shuffle"));
  rng.shuffle(order);
  FoldAssignment folds;
  folds.k = k;
  folds.fold_of.resize(std::size_t(n));
  const int base = n / k, extra = n % k;
  int cursor = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) folds.fold_of[std::size_t(order[std::size_t(cursor++)])] = f;
  }
  return folds;
}

struct OofMatrix {
  Eigen::MatrixXd scores;  // n x J, entries in [0, 1]
  std::vector<std::string> row_ids;
  std::vector<int> fold_assignment;

  Eigen::Index n() const { return scores.rows(); }
  Eigen::Index j() const { return scores.cols(); }
};

struct StageResult {
  OofMatrix oof;
  std::vector<LearnerModel> full_models;  // J learners refit on all rows
};

namespace detail {

// One stage of the out-of-fold protocol: for each fold k and learner j, fit
// on the complement and score the held-out fold; then refit each learner on
// everything for the inference path.
inline StageResult stage_oof(const FeatureMatrix& x, const std::vector<int>& y,
                             const StackingConfig& cfg, const FoldAssignment& folds,
                             std::string_view stage_tag, int workers) {
  x.check_aligned();
  if (Eigen::Index(y.size()) != x.n()) throw AlignmentError("labels/rows size mismatch");
  const int n = int(x.n());
  const int j_count = cfg.j();
  const int k = folds.k;

  StageResult result;
  result.oof.scores.resize(n, j_count);
  result.oof.row_ids = x.row_ids;
  result.oof.fold_assignment = folds.fold_of;
  result.full_models.resize(std::size_t(j_count));

  std::vector<std::vector<int>> fold_rows(static_cast<std::size_t>(k));
  for (int r = 0; r < n; ++r) fold_rows[std::size_t(folds.fold_of[std::size_t(r)])].push_back(r);

  // Tasks: (j, fold) pairs plus (j, k) for the full refit.
  const std::size_t tasks = std::size_t(j_count) * std::size_t(k + 1);
  parallel_for(tasks, workers, [&](std::size_t task) {
    const int j = int(task) / (k + 1);
    const int fold = int(task) % (k + 1);
    const std::uint64_t task_seed =
        derive_seed(cfg.seed, stage_tag, {std::uint64_t(j), std::uint64_t(fold)});
    if (fold == k) {
      // full fit for inference
      result.full_models[std::size_t(j)] = fit_learner(x.rows, y, cfg.base_specs[std::size_t(j)],
                                                       derive_seed(task_seed, "full"), 1);
      return;
    }
    std::vector<int> train_rows;
    train_rows.reserve(std::size_t(n));
    for (int r = 0; r < n; ++r)
      if (folds.fold_of[std::size_t(r)] != fold) train_rows.push_back(r);
    Eigen::MatrixXd x_train(Eigen::Index(train_rows.size()), x.dim());
    std::vector<int> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      x_train.row(Eigen::Index(i)) = x.rows.row(train_rows[i]);
      y_train[i] = y[std::size_t(train_rows[i])];
    }
    const LearnerModel model =
        fit_learner(x_train, y_train, cfg.base_specs[std::size_t(j)], task_seed, 1);

    const auto& held_out = fold_rows[std::size_t(fold)];
    Eigen::MatrixXd x_held(Eigen::Index(held_out.size()), x.dim());
    for (std::size_t i = 0; i < held_out.size(); ++i)
      x_held.row(Eigen::Index(i)) = x.rows.row(held_out[i]);
    const Eigen::VectorXd scores = predict_scores(model, x_held);
    for (std::size_t i = 0; i < held_out.size(); ++i)
      result.oof.scores(held_out[i], j) = scores[Eigen::Index(i)];
  });
  return result;
}

}  // namespace detail

inline StageResult first_stage_oof(const FeatureMatrix& x, const std::vector<int>& y,
                                   const StackingConfig& cfg, const FoldAssignment& folds,
                                   std::string_view view_tag = "stage1", int workers = 1) {
  cfg.validate();
  if (int(x.n()) < folds.k) throw FoldError("fewer rows than folds");
  return detail::stage_oof(x, y, cfg, folds, view_tag, workers);
}

inline StageResult first_stage_oof(const FeatureMatrix& x, const std::vector<int>& y,
                                   const StackingConfig& cfg, int workers = 1) {
  cfg.validate();
  const FoldAssignment folds = make_folds(int(x.n()), cfg.k_folds, cfg.seed);
  return detail::stage_oof(x, y, cfg, folds, "stage1", workers);
}

// Column-wise fusion of the per-modality score matrices: text columns first.
inline FeatureMatrix fuse_views(const OofMatrix& z_text, const OofMatrix& z_image) {
  if (z_text.row_ids != z_image.row_ids)
    throw AlignmentError("fuse_views: row ids differ between views");
  if (z_text.fold_assignment != z_image.fold_assignment)
    throw AlignmentError("fuse_views: fold assignments differ between views");
  FeatureMatrix h;
  h.view = View::fused;
  h.row_ids = z_text.row_ids;
  h.rows.resize(z_text.n(), z_text.j() + z_image.j());
  h.rows << z_text.scores, z_image.scores;
  return h;
}

inline StageResult second_stage_oof(const FeatureMatrix& h, const std::vector<int>& y,
                                    const StackingConfig& cfg, const FoldAssignment& folds,
                                    int workers = 1) {
  cfg.validate();
  return detail::stage_oof(h, y, cfg, folds, "stage2", workers);
}

inline SvmModel fit_meta_classifier(const OofMatrix& z_second, const std::vector<int>& y,
                                    double meta_c, std::uint64_t seed) {
  return fit_linear_svm(z_second.scores, y, meta_c, derive_seed(seed, "meta"));
}

// ---------------------------------------------------------------------------
// Full pipeline model

struct PersModel {
  Dimension dim = Dimension::EI;
  StackingConfig config;
  std::optional<TextFeaturizer> text_featurizer;
  std::optional<ImageFeaturizer> image_featurizer;
  std::vector<LearnerModel> first_stage_text;   // J, present when text view used
  std::vector<LearnerModel> first_stage_image;  // J, present when image view used
  std::vector<LearnerModel> second_stage;       // J
  SvmModel meta;
  std::string fingerprint;

  bool has_text() const { return !first_stage_text.empty(); }
  bool has_image() const { return !first_stage_image.empty(); }

  std::string serialize() const {
    nlohmann::json j;
    j["format"] = "pers.model";
    j["version"] = 1;
    j["dimension"] = dimension_name(dim);
    j["config"] = config.to_json();
    j["fingerprint"] = fingerprint;
    j["text_featurizer"] =
        text_featurizer ? nlohmann::json(base64_encode(text_featurizer->serialize()))
                        : nlohmann::json(nullptr);
    j["image_featurizer"] =
        image_featurizer ? nlohmann::json(base64_encode(image_featurizer->serialize()))
                         : nlohmann::json(nullptr);
    auto dump_models = [](const std::vector<LearnerModel>& models) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& m : models) arr.push_back(m.to_json());
      return arr;
    };
    j["first_stage_text"] = dump_models(first_stage_text);
    j["first_stage_image"] = dump_models(first_stage_image);
    j["second_stage"] = dump_models(second_stage);
    j["meta"] = meta.to_json();
    return j.dump();
  }

  static PersModel deserialize(const std::string& bytes) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("model payload: ") + e.what());
    }
    if (j.value("format", "") != "pers.model" || j.value("version", 0) != 1)
      throw IoError("model payload: unknown format/version");
    PersModel m;
    m.dim = dimension_from_name(j.at("dimension").get<std::string>());
    m.config = StackingConfig::from_json(j.at("config"));
    m.fingerprint = j.at("fingerprint").get<std::string>();
    if (!j.at("text_featurizer").is_null())
      m.text_featurizer =
          TextFeaturizer::deserialize(base64_decode(j.at("text_featurizer").get<std::string>()));
    if (!j.at("image_featurizer").is_null())
      m.image_featurizer =
          ImageFeaturizer::deserialize(base64_decode(j.at("image_featurizer").get<std::string>()));
    auto load_models = [](const nlohmann::json& arr) {
      std::vector<LearnerModel> models;
      for (const auto& e : arr) models.push_back(LearnerModel::from_json(e));
      return models;
    };
    m.first_stage_text = load_models(j.at("first_stage_text"));
    m.first_stage_image = load_models(j.at("first_stage_image"));
    m.second_stage = load_models(j.at("second_stage"));
    m.meta = SvmModel::from_json(j.at("meta"));
    return m;
  }
};

// Fits the full two-step stack for one dimension. Either view may be absent;
// with a single view its stage-1 scores feed stage 2 directly (no fusion).
inline PersModel pers_fit(const FeatureMatrix* text_x, const FeatureMatrix* image_x,
                          const std::vector<int>& y, const StackingConfig& cfg, Dimension dim,
                          int workers = 1) {
  cfg.validate();
  if (text_x == nullptr && image_x == nullptr)
    throw ConfigError("pers_fit needs at least one view");
  const FeatureMatrix* any = text_x ? text_x : image_x;
  any->check_aligned();
  if (text_x && image_x && text_x->row_ids != image_x->row_ids)
    throw AlignmentError("pers_fit: view row ids differ");
  if (Eigen::Index(y.size()) != any->n()) throw AlignmentError("pers_fit: labels/rows mismatch");
  const int n = int(any->n());
  if (n < cfg.k_folds) throw FoldError("fewer rows than folds");

  const FoldAssignment folds = make_folds(n, cfg.k_folds, cfg.seed);

  PersModel model;
  model.dim = dim;
  model.config = cfg;

  std::optional<StageResult> stage_text, stage_image;
  if (text_x) stage_text = detail::stage_oof(*text_x, y, cfg, folds, "stage1-text", workers);
  if (image_x) stage_image = detail::stage_oof(*image_x, y, cfg, folds, "stage1-image", workers);

  FeatureMatrix h;
  if (stage_text && stage_image) {
    h = fuse_views(stage_text->oof, stage_image->oof);
  } else {
    const StageResult& only = stage_text ? *stage_text : *stage_image;
    h.view = View::fused;
    h.row_ids = only.oof.row_ids;
    h.rows = only.oof.scores;
  }

  StageResult stage2 = detail::stage_oof(h, y, cfg, folds, "stage2", workers);
  model.meta = fit_meta_classifier(stage2.oof, y, cfg.meta_c, cfg.seed);

  if (stage_text) model.first_stage_text = std::move(stage_text->full_models);
  if (stage_image) model.first_stage_image = std::move(stage_image->full_models);
  model.second_stage = std::move(stage2.full_models);
  return model;
}

struct PersPrediction {
  std::vector<int> labels;     // pole bit per row
  Eigen::VectorXd scores;      // meta decision values
};

// Inference through the full-fit models: per-view J scores, fusion, J
// second-stage scores, then the meta decision.
inline PersPrediction pers_predict(const PersModel& model, const FeatureMatrix* text_x,
                                   const FeatureMatrix* image_x) {
  if (model.has_text() != (text_x != nullptr))
    throw DimensionError("model expects text view: " + std::string(model.has_text() ? "yes" : "no"));
  if (model.has_image() != (image_x != nullptr))
    throw DimensionError("model expects image view: " +
                         std::string(model.has_image() ? "yes" : "no"));
  const FeatureMatrix* any = text_x ? text_x : image_x;
  if (any == nullptr) throw DimensionError("prediction needs at least one view");
  const Eigen::Index m = any->n();
  if (text_x && image_x && text_x->row_ids != image_x->row_ids)
    throw AlignmentError("pers_predict: view row ids differ");

  auto stage_scores = [m](const std::vector<LearnerModel>& models, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z(m, Eigen::Index(models.size()));
    for (std::size_t j = 0; j < models.size(); ++j) z.col(Eigen::Index(j)) = predict_scores(models[j], x);
    return z;
  };

  Eigen::MatrixXd h;
  if (model.has_text() && model.has_image()) {
    const Eigen::MatrixXd z_text = stage_scores(model.first_stage_text, text_x->rows);
    const Eigen::MatrixXd z_image = stage_scores(model.first_stage_image, image_x->rows);
    h.resize(m, z_text.cols() + z_image.cols());
    h << z_text, z_image;
  } else if (model.has_text()) {
    h = stage_scores(model.first_stage_text, text_x->rows);
  } else {
    h = stage_scores(model.first_stage_image, image_x->rows);
  }

  const Eigen::MatrixXd z_second = stage_scores(model.second_stage, h);
  PersPrediction pred;
  pred.scores = model.meta.decision(z_second);
  pred.labels.resize(std::size_t(m));
  for (Eigen::Index i = 0; i < m; ++i) pred.labels[std::size_t(i)] = pred.scores[i] >= 0.0 ? 1 : 0;
  return pred;
}

}  // namespace pers
