// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria with runtime bounds measure themselves.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pers/metrics.hpp"
#include "pers/pipeline.hpp"
#include "pers/synth.hpp"

using namespace pers;
namespace fs = std::filesystem;

namespace {

struct Gate {
  int failures = 0;

  void report(int id, const std::string& label, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1 + 2: metric oracles

struct OracleMetrics {
  double f1, mcc;
};

OracleMetrics brute_force_metrics(const std::vector<int>& yt, const std::vector<int>& yp) {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < yt.size(); ++i) {
    if (yt[i] == 1 && yp[i] == 1) tp++;
    if (yt[i] == 0 && yp[i] == 0) tn++;
    if (yt[i] == 0 && yp[i] == 1) fp++;
    if (yt[i] == 1 && yp[i] == 0) fn++;
  }
  auto f1_class = [](long tp_, long fp_, long fn_) {
    const double p = tp_ + fp_ > 0 ? double(tp_) / double(tp_ + fp_) : 0.0;
    const double r = tp_ + fn_ > 0 ? double(tp_) / double(tp_ + fn_) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  };
  OracleMetrics o;
  o.f1 = 0.5 * (f1_class(tp, fp, fn) + f1_class(tn, fn, fp));
  const double denom = double(tp + fp) * double(fn + tn) * double(fp + tn) * double(tp + fn);
  o.mcc = denom > 0 ? double(tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
  return o;
}

void criterion_metric_oracles(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 gen(424242);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(gen() % 80);
    std::vector<int> yt(static_cast<std::size_t>(n)), yp(static_cast<std::size_t>(n));
    const int mode = int(gen() % 5);  // include degenerate all-one-class cases
    for (int i = 0; i < n; ++i) {
      yt[std::size_t(i)] = mode == 0 ? 1 : mode == 1 ? 0 : int(gen() % 2);
      yp[std::size_t(i)] = mode == 2 ? 1 : mode == 3 ? 0 : int(gen() % 2);
    }
    const OracleMetrics o = brute_force_metrics(yt, yp);
    const double d1 = std::abs(f1_macro(yt, yp) - o.f1);
    const double d2 = std::abs(mcc(yt, yp) - o.mcc);
    worst = std::max({worst, d1, d2});
    if (d1 > 1e-12 || d2 > 1e-12) ok = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) ok = false;
  gate.report(1, "metric oracles on 200 random pairs", ok,
              "max deviation " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

void criterion_hand_values(Gate& gate) {
  const std::vector<int> yt{1, 1, 0, 0};
  const std::vector<int> yp{1, 0, 0, 0};
  const double f1 = f1_macro(yt, yp);
  const double mc = mcc(yt, yp);
  const bool ok = std::abs(f1 - 0.7333) <= 1e-4 && std::abs(mc - 0.5774) <= 1e-4;
  gate.report(2, "hand-value checks", ok, "f1=" + fmt(f1) + " mcc=" + fmt(mc));
}

// ---------------------------------------------------------------------------
// 3: shape contract

void criterion_shapes(Gate& gate) {
  SynthConfig synth;
  synth.n_users = 200;
  synth.posts_per_user = 3;
  synth.tokens_per_post = 6;
  synth.images_min = 1;
  synth.images_max = 2;
  synth.image_dim = 64;
  synth.text_signal = {0.5, 0.0, 0.0, 0.0};
  synth.image_signal = {0.5, 0.0, 0.0, 0.0};
  synth.seed = 31;
  const SynthResult data = generate_corpus(synth);

  const NormalizerConfig norm = NormalizerConfig::defaults();
  const Documents docs = build_user_documents(data.corpus, norm);
  TextFeaturizerConfig tf_cfg;
  tf_cfg.k = 8;
  tf_cfg.min_df = 2;
  const TextFeaturizer tf = fit_text_featurizer(docs, tf_cfg, 1);
  const FeatureMatrix text_x = tf.apply(docs);
  const FeatureMatrix agg = aggregate_image_concepts(data.corpus, data.store);
  const ImageFeaturizer imf = fit_image_featurizer(agg, 6, 2);
  const FeatureMatrix image_x = imf.apply(agg);

  std::vector<int> y;
  for (const auto& u : data.corpus.users) y.push_back(u.label.bit(Dimension::EI));

  StackingConfig cfg;
  cfg.k_folds = 5;
  cfg.seed = 17;
  LearnerSpec gbt = LearnerSpec::gbt(6, 3);
  gbt.n_bins = 16;
  cfg.base_specs = {gbt, LearnerSpec::cart(4), LearnerSpec::random_forest(5, 4)};

  const FoldAssignment folds = make_folds(200, 5, cfg.seed);
  const StageResult z_text = first_stage_oof(text_x, y, cfg, folds, "stage1-text");
  const StageResult z_image = first_stage_oof(image_x, y, cfg, folds, "stage1-image");
  const FeatureMatrix h = fuse_views(z_text.oof, z_image.oof);
  const StageResult z_second = second_stage_oof(h, y, cfg, folds);

  const bool ok = z_text.oof.scores.rows() == 200 && z_text.oof.scores.cols() == 3 &&
                  z_image.oof.scores.rows() == 200 && z_image.oof.scores.cols() == 3 &&
                  h.rows.rows() == 200 && h.rows.cols() == 6 &&
                  z_second.oof.scores.rows() == 200 && z_second.oof.scores.cols() == 3;
  std::ostringstream detail;
  detail << "Z " << z_text.oof.scores.rows() << "x" << z_text.oof.scores.cols() << ", H "
         << h.rows.rows() << "x" << h.rows.cols() << ", Z2 " << z_second.oof.scores.rows() << "x"
         << z_second.oof.scores.cols();
  gate.report(3, "shape contract n=200 J=3 K=5", ok, detail.str());
}

// ---------------------------------------------------------------------------
// 4: no-leakage probe

void criterion_leakage(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  const int n = 500;
  std::mt19937 gen(99);
  std::normal_distribution<double> dist;
  FeatureMatrix x;
  x.view = View::text;
  x.rows = Eigen::MatrixXd(n, 10);
  for (int r = 0; r < n; ++r) {
    x.row_ids.push_back("u" + std::to_string(r));
    for (int c = 0; c < 10; ++c) x.rows(r, c) = dist(gen);
  }
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[std::size_t(i)] = i < n / 2 ? 0 : 1;
  std::shuffle(y.begin(), y.end(), gen);

  StackingConfig cfg;
  cfg.k_folds = 5;
  cfg.seed = 3;
  cfg.base_specs = {LearnerSpec::cart(50)};  // memorizing tree
  const StageResult result = first_stage_oof(x, y, cfg);

  const std::vector<int> train_pred = predict_labels(result.full_models[0], x.rows);
  int train_hits = 0, oof_hits = 0;
  for (int r = 0; r < n; ++r) {
    train_hits += train_pred[std::size_t(r)] == y[std::size_t(r)];
    oof_hits += (result.oof.scores(r, 0) >= 0.5 ? 1 : 0) == y[std::size_t(r)];
  }
  const double train_acc = double(train_hits) / n;
  const double oof_acc = double(oof_hits) / n;
  const double elapsed = seconds_since(start);
  const bool ok = train_acc == 1.0 && oof_acc >= 0.40 && oof_acc <= 0.60 && elapsed < 30.0;
  gate.report(4, "no-leakage probe", ok,
              "train acc " + fmt(train_acc) + ", oof acc " + fmt(oof_acc) + ", " + fmt(elapsed) +
                  " s");
}

// ---------------------------------------------------------------------------
// 5: numerical cores

std::vector<double> jacobi_gram_singular_values(const Eigen::MatrixXd& m) {
  const int n = int(m.cols());
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < m.rows(); ++r) a[std::size_t(i)][std::size_t(j)] += m(r, i) * m(r, j);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q)
        off += a[std::size_t(p)][std::size_t(q)] * a[std::size_t(p)][std::size_t(q)];
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[std::size_t(p)][std::size_t(q)];
        if (std::abs(apq) < 1e-300) continue;
        const double theta =
            0.5 * std::atan2(2.0 * apq, a[std::size_t(p)][std::size_t(p)] - a[std::size_t(q)][std::size_t(q)]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a[std::size_t(k)][std::size_t(p)], akq = a[std::size_t(k)][std::size_t(q)];
          a[std::size_t(k)][std::size_t(p)] = c * akp + s * akq;
          a[std::size_t(k)][std::size_t(q)] = -s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[std::size_t(p)][std::size_t(k)], aqk = a[std::size_t(q)][std::size_t(k)];
          a[std::size_t(p)][std::size_t(k)] = c * apk + s * aqk;
          a[std::size_t(q)][std::size_t(k)] = -s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eig[std::size_t(i)] = std::sqrt(std::max(0.0, a[std::size_t(i)][std::size_t(i)]));
  std::sort(eig.rbegin(), eig.rend());
  return eig;
}

void criterion_numerical_cores(Gate& gate) {
  bool ok = true;
  std::string detail;

  // truncated SVD vs the Gram-matrix Jacobi oracle
  std::mt19937 gen(1717);
  std::normal_distribution<double> dist;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd m(20, 10);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 10; ++c) m(r, c) = dist(gen);
    const Projector p = truncated_svd(m, 4, std::uint64_t(trial));
    const std::vector<double> oracle = jacobi_gram_singular_values(m);
    for (int i = 0; i < 4; ++i) {
      const double rel = std::abs(p.spectrum[i] - oracle[std::size_t(i)]) / oracle[std::size_t(i)];
      worst_rel = std::max(worst_rel, rel);
    }
  }
  if (worst_rel > 1e-6) ok = false;
  detail += "svd rel " + fmt(worst_rel);

  // PCA orthonormality + monotone spectrum
  {
    Eigen::MatrixXd m(60, 12);
    for (int r = 0; r < 60; ++r)
      for (int c = 0; c < 12; ++c) m(r, c) = dist(gen) * double(c + 1);
    const Projector p = pca_fit(m, 6, 5);
    const double ortho =
        (p.components * p.components.transpose() - Eigen::MatrixXd::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff();
    if (ortho > 1e-8) ok = false;
    for (int i = 0; i + 1 < 6; ++i)
      if (p.spectrum[i] < p.spectrum[i + 1]) ok = false;
    detail += ", pca ortho " + fmt(ortho);
  }

  // logistic gradients/hessians vs central differences
  {
    std::uniform_real_distribution<double> margins(-4.0, 4.0);
    const double eps = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double m = margins(gen);
      const int y = int(gen() % 2);
      const auto [g, h] = logistic_grad_hess(m, y);
      const double g_fd = (logistic_loss(m + eps, y) - logistic_loss(m - eps, y)) / (2 * eps);
      const double h_fd =
          (logistic_grad_hess(m + eps, y).first - logistic_grad_hess(m - eps, y).first) / (2 * eps);
      worst = std::max(worst, std::abs(g - g_fd) / std::max(1.0, std::abs(g_fd)));
      worst = std::max(worst, std::abs(h - h_fd) / std::max(1.0, std::abs(h_fd)));
    }
    if (worst > 1e-5) ok = false;
    detail += ", grad/hess rel " + fmt(worst);
  }

  // monotone training log-loss
  {
    Eigen::MatrixXd x(120, 5);
    std::vector<int> y(120);
    for (int r = 0; r < 120; ++r) {
      y[std::size_t(r)] = r % 2;
      for (int c = 0; c < 5; ++c) x(r, c) = dist(gen) + (r % 2 ? 0.4 : -0.4);
    }
    LearnerSpec spec = LearnerSpec::gbt(40, 4, 0.3);
    const LearnerModel m = fit_gradient_boosted_trees(x, y, spec, 7);
    const std::vector<double> losses = gbt_round_log_losses(m, x, y);
    for (std::size_t i = 0; i + 1 < losses.size(); ++i)
      if (losses[i + 1] > losses[i] + 1e-12) ok = false;
    detail += ", gbt descent ok";
  }

  gate.report(5, "numerical cores", ok, detail);
}

// ---------------------------------------------------------------------------
// 6: preprocessing golden suite

void criterion_preprocessing(Gate& gate) {
  const NormalizerConfig norm = NormalizerConfig::defaults();
  bool ok = true;
  int cases = 0;
  std::string first_failure;

  auto expect = [&](const std::string& in, const std::string& want) {
    ++cases;
    const std::string got = preprocess_post(in, norm);
    if (got != want) {
      ok = false;
      if (first_failure.empty())
        first_failure = "'" + in + "' -> '" + got + "' (want '" + want + "')";
    }
    if (preprocess_post(got, norm) != got) {
      ok = false;
      if (first_failure.empty()) first_failure = "not idempotent on '" + in + "'";
    }
  };

  // all 16 codes, mixed casings
  for (int t = 0; t < 16; ++t) {
    const std::string code = type_code_for_index(t);
    expect("I am " + code + " today", "I am <type> today");
  }
  expect("entp here", "<type> here");
  expect("An InTj speaks", "An <type> speaks");
  expect("isfp!", "<type>!");
  // placeholders
  expect("@john see https://t.co/x #mbti", "@USER see HTTPURL HASHTAG");
  expect("ping @a_b9 ok", "ping @USER ok");
  expect("go to www.example.com now", "go to HTTPURL now");
  expect("HTTP://X.COM/path", "HTTPURL");
  expect("#tag1 #tag_2", "HASHTAG HASHTAG");
  expect("meet Jan 3, 2021 at 10:30pm", "meet DATETIME at DATETIME");
  expect("due 12/31/2020 sharp", "due DATETIME sharp");
  expect("party on 2020-01-01", "party on DATETIME");
  expect("at 09:15:30 already", "at DATETIME already");
  // emoji textualization
  expect("party \xF0\x9F\x8E\x89", "party :party_popper:");
  expect("lol \xF0\x9F\x98\x82\xF0\x9F\x98\x82", "lol :face_with_tears_of_joy: :face_with_tears_of_joy:");
  expect("love \xE2\x9D\xA4\xEF\xB8\x8F always", "love :red_heart: always");
  expect("hot \xF0\x9F\x94\xA5 take", "hot :fire: take");
  // non-ASCII removal
  expect("caf\xC3\xA9 gone", "gone");
  expect("na\xC3\xAFve words drop", "words drop");
  expect("\xE6\x97\xA5\xE6\x9C\xAC\xE8\xAA\x9E only ascii", "only ascii");
  // composition
  expect("I'm an ENTP! @ann", "I'm an <type>! @USER");
  expect("ENTP\xF0\x9F\x8E\x89", "<type> :party_popper:");
  expect("CONTENT PLENTY", "CONTENT PLENTY");
  expect("xENTP stays ENTPx stays", "xENTP stays ENTPx stays");
  expect("  collapse   spaces\t", "collapse spaces");
  expect("", "");

  // 10k-post fuzz: no raw code survives
  SynthConfig synth;
  synth.n_users = 500;
  synth.posts_per_user = 10;
  synth.tokens_per_post = 6;
  synth.images_min = 0;
  synth.images_max = 0;
  synth.decoy_rate = 1.0;  // every post carries a decoy
  synth.text_signal = {0.5, 0.5, 0.5, 0.5};
  synth.seed = 123;
  const SynthResult data = generate_corpus(synth);
  long posts = 0, leaked = 0;
  for (const auto& user : data.corpus.users)
    for (const auto& post : user.posts) {
      ++posts;
      const std::string out = preprocess_post(post, norm);
      for (const auto& tok : tokenize(out))
        if (is_mbti_code(tok)) ++leaked;
      if (contains_type_mention(out)) ++leaked;
    }
  if (posts < 5000 || leaked != 0) ok = false;

  gate.report(6, "preprocessing golden suite", ok,
              std::to_string(cases) + " exact cases, " + std::to_string(posts) + " fuzz posts, " +
                  std::to_string(leaked) + " leaks" +
                  (first_failure.empty() ? "" : "; first failure: " + first_failure));
}

// ---------------------------------------------------------------------------
// 7 + 8: synthetic signal recovery and multi-view uplift

PipelineConfig acceptance_pipeline(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.min_posts = 1;
  cfg.split_ratio = 0.85;
  cfg.text_k = 48;
  cfg.image_k = 32;
  cfg.min_df = 2;
  cfg.seed = seed;
  cfg.workers = 2;
  cfg.stacking.k_folds = 5;
  LearnerSpec gbt = LearnerSpec::gbt(40, 4, 0.15);
  gbt.n_bins = 32;
  LearnerSpec goss = LearnerSpec::gbt_goss(40, 4, 0.15);
  goss.n_bins = 32;
  const LearnerSpec forest = LearnerSpec::random_forest(40, 8);
  cfg.stacking.base_specs = {gbt, goss, forest};
  return cfg;
}

SynthConfig acceptance_corpus(int n, const std::array<double, 4>& text_signal,
                              const std::array<double, 4>& image_signal, std::uint64_t seed) {
  SynthConfig synth;
  synth.n_users = n;
  synth.posts_per_user = 10;
  synth.tokens_per_post = 10;
  synth.images_min = 2;
  synth.images_max = 5;
  synth.image_dim = 1000;
  synth.text_signal = text_signal;
  synth.image_signal = image_signal;
  synth.seed = seed;
  return synth;
}

double pipeline_test_f1(const SynthResult& data, const PipelineConfig& base,
                        const std::string& views, Dimension dim) {
  PipelineConfig cfg = base;
  cfg.views = views;
  cfg.dimension = dimension_name(dim);
  const TrainArtifacts artifacts = run_train(data.corpus, &data.store, cfg);
  const EvalReport report = run_evaluate(artifacts, data.corpus, &data.store, cfg);
  return report.rows.at(0).dims.at(dimension_name(dim)).f1;
}

void criterion_signal_recovery(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  const PipelineConfig cfg = acceptance_pipeline(42);

  const SynthResult strong =
      generate_corpus(acceptance_corpus(2000, {0.8, 0, 0, 0}, {0.8, 0, 0, 0}, 1001));
  const double f1_strong = pipeline_test_f1(strong, cfg, "both", Dimension::EI);

  const SynthResult null_case =
      generate_corpus(acceptance_corpus(1000, {0, 0, 0, 0}, {0, 0, 0, 0}, 1002));
  const double f1_null = pipeline_test_f1(null_case, cfg, "both", Dimension::EI);

  const double elapsed = seconds_since(start);
  const bool ok = f1_strong >= 0.90 && f1_null >= 0.40 && f1_null <= 0.60 && elapsed < 300.0;
  gate.report(7, "synthetic signal recovery", ok,
              "strong " + fmt(f1_strong) + ", null " + fmt(f1_null) + ", " + fmt(elapsed) + " s");
}

void criterion_multiview_uplift(Gate& gate) {
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PipelineConfig cfg = acceptance_pipeline(900 + seed);
    const SynthResult data =
        generate_corpus(acceptance_corpus(2000, {0.8, 0, 0, 0}, {0, 0.8, 0, 0}, 2000 + seed));
    // text signals EI only; image signals SN only
    const double fused_ei = pipeline_test_f1(data, cfg, "both", Dimension::EI);
    const double fused_sn = pipeline_test_f1(data, cfg, "both", Dimension::SN);
    const double image_ei = pipeline_test_f1(data, cfg, "image", Dimension::EI);
    const double text_sn = pipeline_test_f1(data, cfg, "text", Dimension::SN);
    const bool win = fused_ei >= image_ei + 0.05 && fused_sn >= text_sn + 0.05;
    wins += win;
    per_seed += (per_seed.empty() ? "" : " ") + std::string(win ? "+" : "-");
  }
  gate.report(8, "multi-view uplift over single views", wins >= 3,
              std::to_string(wins) + "/5 seeds [" + per_seed + "]");
}

// ---------------------------------------------------------------------------
// 9: end-to-end determinism through the CLI at worker counts 1 and 8

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism(Gate& gate) {
  const std::string cli = PERS_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "pers_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);

  {
    std::ofstream cfg(root / "cfg.json");
    cfg << R"({
      "filter": {"min_posts": 1},
      "features": {"text_k": 12, "image_k": 8, "min_df": 2},
      "stacking": {
        "k_folds": 4,
        "base_specs": [
          {"kind":"gbt","depth":3,"n_trees":10,"learning_rate":0.2,"min_leaf":1,"subsample":1.0,
           "colsample":1.0,"lambda":1.0,"goss_enabled":true,"goss_top_rate":0.2,
           "goss_other_rate":0.1,"n_bins":16,"bootstrap":true,"sqrt_features":true,"seed":0},
          {"kind":"random_forest","depth":6,"n_trees":12,"learning_rate":0.1,"min_leaf":1,
           "subsample":1.0,"colsample":1.0,"lambda":1.0,"goss_enabled":false,"goss_top_rate":0.2,
           "goss_other_rate":0.1,"n_bins":64,"bootstrap":true,"sqrt_features":true,"seed":0}
        ]
      }
    })";
  }

  auto shell = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  bool ok = true;
  const std::string synth_args = "synth --out " + (root / "data").string() +
                                 " --n-users 240 --posts-per-user 4 --images-min 1 --images-max 3"
                                 " --image-dim 64 --text-signal 0.7,0.7,0.7,0.7"
                                 " --image-signal 0.4,0.4,0.4,0.4 --seed 77";
  if (shell(synth_args) != 0) ok = false;

  std::array<std::string, 3> runs{"r1", "r2", "r8"};
  std::array<int, 3> workers{1, 1, 8};
  for (std::size_t i = 0; i < runs.size() && ok; ++i) {
    const std::string model = (root / runs[std::size_t(i)]).string();
    if (shell("train --config " + (root / "cfg.json").string() + " --corpus " +
              (root / "data" / "users.jsonl").string() + " --images " +
              (root / "data" / "images.csv").string() + " --out " + model +
              " --seed 9 --workers " + std::to_string(workers[std::size_t(i)])) != 0)
      ok = false;
    if (shell("evaluate --corpus " + (root / "data" / "users.jsonl").string() + " --images " +
              (root / "data" / "images.csv").string() + " --model-dir " + model + " --out " +
              model + "/eval --workers " + std::to_string(workers[std::size_t(i)])) != 0)
      ok = false;
  }

  int mismatches = 0;
  if (ok) {
    const std::array<std::string, 5> artifacts{"model_EI.pers.json", "model_SN.pers.json",
                                               "model_TF.pers.json", "model_JP.pers.json",
                                               "eval/eval_report.json"};
    for (const auto& artifact : artifacts) {
      const std::string a = slurp(root / "r1" / artifact);
      const std::string b = slurp(root / "r2" / artifact);
      const std::string c = slurp(root / "r8" / artifact);
      if (a.empty() || a != b || a != c) ++mismatches;
    }
    if (mismatches != 0) ok = false;
  }
  fs::remove_all(root);
  gate.report(9, "byte-identical reruns at workers 1 and 8", ok,
              ok ? "5/5 artifacts identical" : "artifact mismatch or command failure");
}

// ---------------------------------------------------------------------------
// 10: statistics fidelity

void criterion_stats_fidelity(Gate& gate) {
  SynthConfig synth;
  synth.n_users = 2000;
  synth.posts_per_user = 1;
  synth.tokens_per_post = 2;
  synth.images_min = 0;
  synth.images_max = 0;
  synth.label_distribution = reference_type_distribution(Source::twitter);
  synth.seed = 8;
  const SynthResult data = generate_corpus(synth);
  const StatsReport stats = corpus_stats(data.corpus);
  const double e_pct = stats.pole_pct(Dimension::EI, 0);
  const double i_pct = stats.pole_pct(Dimension::EI, 1);

  Corpus fixture;
  int idx = 0;
  for (const char* code : {"INFP", "INFJ", "ENTP", "ENTP"}) {
    UserRecord u;
    u.user_id = "u" + std::to_string(idx++);
    u.source = Source::synthetic;
    u.label = parse_mbti_code(code);
    u.posts = {"p"};
    fixture.users.push_back(u);
  }
  const StatsReport fr = corpus_stats(fixture);
  const bool fixture_ok =
      fr.pole_counts[0][0] == 2 && fr.pole_counts[0][1] == 2 &&
      fr.type_histogram[std::size_t(parse_mbti_code("INFP").type_index())] == 1 &&
      fr.type_histogram[std::size_t(parse_mbti_code("INFJ").type_index())] == 1 &&
      fr.type_histogram[std::size_t(parse_mbti_code("ENTP").type_index())] == 2 &&
      fr.pole_pct(Dimension::EI, 0) == 50.0;

  const bool ok = std::abs(e_pct - 23.53) <= 2.0 && std::abs(i_pct - 76.47) <= 2.0 && fixture_ok;
  gate.report(10, "statistics fidelity", ok,
              "EI " + fmt(e_pct) + "%/" + fmt(i_pct) + "%, fixture " +
                  (fixture_ok ? "exact" : "wrong"));
}

}  // namespace

int main() {
  Gate gate;
  criterion_metric_oracles(gate);
  criterion_hand_values(gate);
  criterion_shapes(gate);
  criterion_leakage(gate);
  criterion_numerical_cores(gate);
  criterion_preprocessing(gate);
  criterion_signal_recovery(gate);
  criterion_multiview_uplift(gate);
  criterion_determinism(gate);
  criterion_stats_fidelity(gate);

  if (gate.failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", gate.failures);
  return 1;
}
