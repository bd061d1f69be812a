#pragma once

// User-level feature construction. Text: placeholder-aware tokenization,
// TF-IDF (raw tf, smoothed idf, L2-normalized rows), then truncated SVD.
// Image: per-user mean of concept vectors, then PCA fitted on users that
// actually have images.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pers/corpus.hpp"
#include "pers/decomp.hpp"
#include "pers/errors.hpp"
#include "pers/image_store.hpp"
#include "pers/parallel.hpp"
#include "pers/textprep.hpp"

namespace pers {

enum class View : int { text = 0, image = 1, fused = 2 };

inline const char* view_name(View v) {
  switch (v) {
    case View::text: return "text";
    case View::image: return "image";
    case View::fused: return "fused";
  }
  return "?";
}

struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::vector<std::string> row_ids;
  View view = View::text;
  // Image view only: whether the row came from actual data (false = imputed zeros).
  std::vector<std::uint8_t> has_data;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }

  void check_aligned() const {
    if (Eigen::Index(row_ids.size()) != rows.rows())
      throw AlignmentError("row_ids/rows size mismatch in feature matrix");
  }

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "user_id";
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << ",f" << c;
    out << "\n";
    char buf[32];
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      out << row_ids[std::size_t(r)];
      for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", rows(r, c));
        out << ',' << buf;
      }
      out << "\n";
    }
    if (!out) throw IoError("short write to " + path.string());
  }
};

// ---------------------------------------------------------------------------
// Tokenization

// Lowercases and splits on anything outside [a-z0-9_], keeping the
// normalization placeholders ("<type>", "@user", ":emoji_name:") atomic.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; };
  auto is_word = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = lower(text[i]);
    if (c == '<') {
      static constexpr std::string_view kMask = "<type>";
      if (text.size() - i >= kMask.size()) {
        bool match = true;
        for (std::size_t k = 0; k < kMask.size(); ++k)
          if (lower(text[i + k]) != kMask[k]) { match = false; break; }
        if (match) {
          tokens.emplace_back(kMask);
          i += kMask.size();
          continue;
        }
      }
      ++i;
    } else if (c == '@' && i + 1 < text.size() && is_word(lower(text[i + 1]))) {
      std::size_t j = i + 1;
      std::string tok = "@";
      while (j < text.size() && is_word(lower(text[j]))) tok += lower(text[j++]);
      tokens.push_back(std::move(tok));
      i = j;
    } else if (c == ':') {
      std::size_t j = i + 1;
      std::string body;
      while (j < text.size() && is_word(lower(text[j]))) body += lower(text[j++]);
      if (!body.empty() && j < text.size() && text[j] == ':') {
        tokens.push_back(":" + body + ":");
        i = j + 1;
      } else {
        ++i;
      }
    } else if (is_word(c)) {
      std::size_t j = i;
      std::string tok;
      while (j < text.size() && is_word(lower(text[j]))) tok += lower(text[j++]);
      tokens.push_back(std::move(tok));
      i = j;
    } else {
      ++i;
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// User documents

struct Documents {
  std::vector<std::string> ids;
  std::vector<std::string> texts;

  std::size_t size() const { return ids.size(); }
};

// Normalizes every post and joins the (non-empty) results with single spaces,
// preserving post order.
inline Documents build_user_documents(const Corpus& corpus, const NormalizerConfig& cfg,
                                      int workers = 1) {
  Documents docs;
  docs.ids.resize(corpus.users.size());
  docs.texts.resize(corpus.users.size());
  parallel_for(corpus.users.size(), workers, [&](std::size_t u) {
    const UserRecord& user = corpus.users[u];
    docs.ids[u] = user.user_id;
    std::string text;
    for (const auto& post : user.posts) {
      std::string norm = preprocess_post(post, cfg);
      if (norm.empty()) continue;
      if (!text.empty()) text += ' ';
      text += norm;
    }
    docs.texts[u] = std::move(text);
  });
  return docs;
}

// ---------------------------------------------------------------------------
// Text featurizer

struct Vocabulary {
  std::vector<std::string> terms;       // index order
  std::vector<std::int64_t> doc_freq;   // parallel to terms
  std::int64_t n_docs = 0;
  int min_df = 2;
  double max_df_ratio = 0.95;
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return terms.size(); }

  void rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < terms.size(); ++i) index[terms[i]] = int(i);
  }

  // Smoothed idf, floored at 1 for a term present in every document.
  double idf(std::size_t term_index) const {
    return std::log(double(1 + n_docs) / double(1 + doc_freq[term_index])) + 1.0;
  }
};

struct TextFeaturizerConfig {
  Eigen::Index k = 100;
  int min_df = 2;
  double max_df_ratio = 0.95;
};

class TextFeaturizer {
 public:
  Vocabulary vocabulary;
  Projector projector;
  TextFeaturizerConfig config;
  std::uint64_t seed = 0;

  Eigen::Index out_dim() const { return projector.k(); }

  // L2-normalized TF-IDF rows over the fitted vocabulary; OOV terms ignored.
  Eigen::MatrixXd tfidf_rows(const Documents& docs) const {
    const Eigen::Index v = Eigen::Index(vocabulary.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(docs.size()), v);
    for (std::size_t r = 0; r < docs.size(); ++r) {
      for (const auto& tok : tokenize(docs.texts[r])) {
        const auto it = vocabulary.index.find(tok);
        if (it != vocabulary.index.end()) m(Eigen::Index(r), it->second) += 1.0;
      }
      for (Eigen::Index c = 0; c < v; ++c)
        if (m(Eigen::Index(r), c) != 0.0) m(Eigen::Index(r), c) *= vocabulary.idf(std::size_t(c));
      const double norm = m.row(Eigen::Index(r)).norm();
      if (norm > 0.0) m.row(Eigen::Index(r)) /= norm;
    }
    return m;
  }

  FeatureMatrix apply(const Documents& docs) const {
    FeatureMatrix fm;
    fm.view = View::text;
    fm.row_ids = docs.ids;
    fm.rows = project(projector, tfidf_rows(docs));
    return fm;
  }

  std::string serialize() const {
    nlohmann::json header;
    header["format"] = "pers.text_featurizer";
    header["version"] = 1;
    header["config"] = {{"k", config.k}, {"min_df", config.min_df}, {"max_df_ratio", config.max_df_ratio}};
    header["seed"] = seed;
    header["vocabulary"] = {{"terms", vocabulary.terms},
                            {"doc_freq", vocabulary.doc_freq},
                            {"n_docs", vocabulary.n_docs},
                            {"min_df", vocabulary.min_df},
                            {"max_df_ratio", vocabulary.max_df_ratio}};
    std::string out = header.dump();
    out += '\n';
    out += projector.serialize();
    return out;
  }

  static TextFeaturizer deserialize(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) throw IoError("text featurizer payload: missing header");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("text featurizer payload: ") + e.what());
    }
    if (header.value("format", "") != "pers.text_featurizer" || header.value("version", 0) != 1)
      throw IoError("text featurizer payload: unknown format/version");
    TextFeaturizer f;
    f.config.k = header.at("config").at("k").get<Eigen::Index>();
    f.config.min_df = header.at("config").at("min_df").get<int>();
    f.config.max_df_ratio = header.at("config").at("max_df_ratio").get<double>();
    f.seed = header.at("seed").get<std::uint64_t>();
    const auto& v = header.at("vocabulary");
    f.vocabulary.terms = v.at("terms").get<std::vector<std::string>>();
    f.vocabulary.doc_freq = v.at("doc_freq").get<std::vector<std::int64_t>>();
    f.vocabulary.n_docs = v.at("n_docs").get<std::int64_t>();
    f.vocabulary.min_df = v.at("min_df").get<int>();
    f.vocabulary.max_df_ratio = v.at("max_df_ratio").get<double>();
    f.vocabulary.rebuild_index();
    f.projector = Projector::deserialize(bytes.substr(newline + 1));
    return f;
  }
};

inline TextFeaturizer fit_text_featurizer(const Documents& docs, const TextFeaturizerConfig& cfg,
                                          std::uint64_t seed) {
  if (docs.size() < 2) throw DimensionError("text featurizer needs at least 2 documents");

  // Document frequencies over all tokens.
  std::map<std::string, std::int64_t> df;
  for (const auto& text : docs.texts) {
    std::vector<std::string> toks = tokenize(text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) df[t] += 1;
  }

  TextFeaturizer f;
  f.config = cfg;
  f.seed = seed;
  f.vocabulary.n_docs = std::int64_t(docs.size());
  f.vocabulary.min_df = cfg.min_df;
  f.vocabulary.max_df_ratio = cfg.max_df_ratio;
  const double max_df = cfg.max_df_ratio * double(docs.size());
  for (const auto& [term, freq] : df) {
    if (freq < cfg.min_df) continue;
    if (double(freq) > max_df) continue;
    f.vocabulary.terms.push_back(term);
    f.vocabulary.doc_freq.push_back(freq);
  }
  if (f.vocabulary.terms.empty())
    throw EmptyVocabulary("all terms pruned by min_df/max_df thresholds");
  f.vocabulary.rebuild_index();

  if (cfg.k < 1 || cfg.k > std::min<Eigen::Index>(Eigen::Index(docs.size()),
                                                  Eigen::Index(f.vocabulary.size())))
    throw DimensionError("lsa rank " + std::to_string(cfg.k) + " out of range for " +
                         std::to_string(docs.size()) + " docs x " +
                         std::to_string(f.vocabulary.size()) + " terms");

  f.projector = truncated_svd(f.tfidf_rows(docs), cfg.k, derive_seed(seed, "lsa"));
  return f;
}

inline FeatureMatrix apply_text_featurizer(const TextFeaturizer& f, const Documents& docs) {
  return f.apply(docs);
}

// ---------------------------------------------------------------------------
// Image featurizer

// Mean concept vector per user; users without images get zeros and a false flag.
inline FeatureMatrix aggregate_image_concepts(const Corpus& corpus, const ImageConceptStore& store) {
  const Eigen::Index d = store.dim();
  if (d == 0) throw InsufficientData("image store is empty");
  FeatureMatrix fm;
  fm.view = View::image;
  fm.rows = Eigen::MatrixXd::Zero(Eigen::Index(corpus.users.size()), d);
  fm.row_ids.reserve(corpus.users.size());
  fm.has_data.resize(corpus.users.size(), 0);
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    const UserRecord& user = corpus.users[u];
    fm.row_ids.push_back(user.user_id);
    if (user.image_ids.empty()) continue;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (const auto& id : user.image_ids) {
      const Eigen::VectorXd* vec = store.find(id);
      if (!vec)
        throw DanglingImageRef("user '" + user.user_id + "' references unknown image '" + id + "'");
      acc += *vec;
    }
    fm.rows.row(Eigen::Index(u)) = acc.transpose() / double(user.image_ids.size());
    fm.has_data[u] = 1;
  }
  return fm;
}

class ImageFeaturizer {
 public:
  Projector projector;
  Eigen::Index k_config = 200;
  std::uint64_t seed = 0;

  Eigen::Index out_dim() const { return projector.k(); }

  // Projects every row, imputed zero rows included.
  FeatureMatrix apply(const FeatureMatrix& image_matrix) const {
    FeatureMatrix fm;
    fm.view = View::image;
    fm.row_ids = image_matrix.row_ids;
    fm.has_data = image_matrix.has_data;
    fm.rows = project(projector, image_matrix.rows);
    return fm;
  }

  std::string serialize() const {
    nlohmann::json header;
    header["format"] = "pers.image_featurizer";
    header["version"] = 1;
    header["k"] = k_config;
    header["seed"] = seed;
    std::string out = header.dump();
    out += '\n';
    out += projector.serialize();
    return out;
  }

  static ImageFeaturizer deserialize(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) throw IoError("image featurizer payload: missing header");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("image featurizer payload: ") + e.what());
    }
    if (header.value("format", "") != "pers.image_featurizer" || header.value("version", 0) != 1)
      throw IoError("image featurizer payload: unknown format/version");
    ImageFeaturizer f;
    f.k_config = header.at("k").get<Eigen::Index>();
    f.seed = header.at("seed").get<std::uint64_t>();
    f.projector = Projector::deserialize(bytes.substr(newline + 1));
    return f;
  }
};

// PCA fitted on rows with data only; zero rows are imputation artifacts, not
// observations.
inline ImageFeaturizer fit_image_featurizer(const FeatureMatrix& image_matrix, Eigen::Index k,
                                            std::uint64_t seed) {
  image_matrix.check_aligned();
  std::vector<Eigen::Index> flagged;
  for (std::size_t r = 0; r < image_matrix.has_data.size(); ++r)
    if (image_matrix.has_data[r]) flagged.push_back(Eigen::Index(r));
  if (flagged.size() < 2)
    throw InsufficientData("image featurizer needs at least 2 users with images");
  if (k < 1 || k > std::min<Eigen::Index>(Eigen::Index(flagged.size()), image_matrix.dim()))
    throw DimensionError("pca rank " + std::to_string(k) + " out of range for " +
                         std::to_string(flagged.size()) + " flagged rows x " +
                         std::to_string(image_matrix.dim()));
  Eigen::MatrixXd sub(Eigen::Index(flagged.size()), image_matrix.dim());
  for (std::size_t i = 0; i < flagged.size(); ++i) sub.row(Eigen::Index(i)) = image_matrix.rows.row(flagged[i]);
  ImageFeaturizer f;
  f.k_config = k;
  f.seed = seed;
  f.projector = pca_fit(sub, k, derive_seed(seed, "image-pca"));
  return f;
}

// Column-wise concatenation; inputs must agree on row ids and order.
inline FeatureMatrix fuse_features(const FeatureMatrix& a, const FeatureMatrix& b) {
  a.check_aligned();
  b.check_aligned();
  if (a.row_ids != b.row_ids) throw AlignmentError("feature fusion: row ids differ");
  FeatureMatrix fm;
  fm.view = View::fused;
  fm.row_ids = a.row_ids;
  fm.rows.resize(a.n(), a.dim() + b.dim());
  fm.rows << a.rows, b.rows;
  return fm;
}

}  // namespace pers
