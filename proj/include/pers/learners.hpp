#pragma once

// Base classifiers behind one contract: scores in [0, 1], label = score >= 0.5.
// CART on Gini impurity, bootstrap random forest, second-order gradient
// boosted trees under logistic loss (exact or quantile-histogram splits, with
// optional gradient-based one-side sampling), and a linear-kernel SVM trained
// by deterministic full-pass subgradient descent.
//
// Tie-breaking is fixed everywhere: split candidates are scanned in ascending
// (feature, threshold) order and accepted only on strict gain improvement;
// decision values at exactly 0 classify as the positive class.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pers/errors.hpp"
#include "pers/parallel.hpp"
#include "pers/rng.hpp"

namespace pers {

enum class LearnerKind : int { cart = 0, random_forest = 1, gbt = 2 };

inline const char* learner_kind_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::cart: return "cart";
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::gbt: return "gbt";
  }
  return "?";
}

inline LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "cart") return LearnerKind::cart;
  if (name == "random_forest") return LearnerKind::random_forest;
  if (name == "gbt") return LearnerKind::gbt;
  throw ConfigError("unknown learner kind '" + name + "'");
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::cart;
  int depth = 5;
  int n_trees = 1;
  double learning_rate = 0.1;
  int min_leaf = 1;
  double subsample = 1.0;
  double colsample = 1.0;  // per-node feature fraction; 1.0 = all features
  double lambda = 1.0;     // L2 on leaf weights (gbt)
  bool goss_enabled = false;
  double goss_top_rate = 0.2;
  double goss_other_rate = 0.1;
  int n_bins = 64;            // gbt: 0 = exact split enumeration
  bool bootstrap = true;      // forest
  bool sqrt_features = true;  // forest: per-node subset of ceil(sqrt(d))
  std::uint64_t seed = 0;     // mixed with the caller's seed at fit time

  static LearnerSpec cart(int depth = 5, int min_leaf = 1) {
    LearnerSpec s;
    s.kind = LearnerKind::cart;
    s.depth = depth;
    s.min_leaf = min_leaf;
    s.n_trees = 1;
    return s;
  }

  static LearnerSpec random_forest(int n_trees = 200, int depth = 12) {
    LearnerSpec s;
    s.kind = LearnerKind::random_forest;
    s.n_trees = n_trees;
    s.depth = depth;
    return s;
  }

  static LearnerSpec gbt(int n_trees = 200, int depth = 5, double learning_rate = 0.1) {
    LearnerSpec s;
    s.kind = LearnerKind::gbt;
    s.n_trees = n_trees;
    s.depth = depth;
    s.learning_rate = learning_rate;
    return s;
  }

  static LearnerSpec gbt_goss(int n_trees = 200, int depth = 5, double learning_rate = 0.1) {
    LearnerSpec s = gbt(n_trees, depth, learning_rate);
    s.goss_enabled = true;
    return s;
  }

  void validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (depth < 1) throw ConfigError("learner depth must be >= 1");
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
    if (kind == LearnerKind::gbt ? n_trees < 0 : n_trees < 1)
      throw ConfigError("n_trees out of range");
    if (!in_unit(subsample) || !in_unit(colsample)) throw ConfigError("rates must be in (0,1]");
    if (goss_enabled && (!in_unit(goss_top_rate) || !in_unit(goss_other_rate)))
      throw ConfigError("goss rates must be in (0,1]");
    if (kind == LearnerKind::gbt && !(learning_rate > 0.0))
      throw ConfigError("learning_rate must be positive");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (n_bins < 0 || n_bins == 1) throw ConfigError("n_bins must be 0 (exact) or >= 2");
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"kind", learner_kind_name(kind)},
                          {"depth", depth},
                          {"n_trees", n_trees},
                          {"learning_rate", learning_rate},
                          {"min_leaf", min_leaf},
                          {"subsample", subsample},
                          {"colsample", colsample},
                          {"lambda", lambda},
                          {"goss_enabled", goss_enabled},
                          {"goss_top_rate", goss_top_rate},
                          {"goss_other_rate", goss_other_rate},
                          {"n_bins", n_bins},
                          {"bootstrap", bootstrap},
                          {"sqrt_features", sqrt_features},
                          {"seed", seed}};
  }

  static LearnerSpec from_json(const nlohmann::json& j) {
    LearnerSpec s;
    s.kind = learner_kind_from_name(j.at("kind").get<std::string>());
    s.depth = j.at("depth").get<int>();
    s.n_trees = j.at("n_trees").get<int>();
    s.learning_rate = j.at("learning_rate").get<double>();
    s.min_leaf = j.at("min_leaf").get<int>();
    s.subsample = j.at("subsample").get<double>();
    s.colsample = j.at("colsample").get<double>();
    s.lambda = j.at("lambda").get<double>();
    s.goss_enabled = j.at("goss_enabled").get<bool>();
    s.goss_top_rate = j.at("goss_top_rate").get<double>();
    s.goss_other_rate = j.at("goss_other_rate").get<double>();
    s.n_bins = j.at("n_bins").get<int>();
    s.bootstrap = j.at("bootstrap").get<bool>();
    s.sqrt_features = j.at("sqrt_features").get<bool>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  }
};

// ---------------------------------------------------------------------------
// Trees

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::MatrixXd& x, Eigen::Index r) const {
    int cur = 0;
    while (nodes[std::size_t(cur)].feature >= 0) {
      const TreeNode& nd = nodes[std::size_t(cur)];
      cur = x(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[std::size_t(cur)].value;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& nd : nodes)
      arr.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
    return arr;
  }

  static Tree from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& nd : j) {
      TreeNode node;
      node.feature = nd.at(0).get<int>();
      node.threshold = nd.at(1).get<double>();
      node.left = nd.at(2).get<int>();
      node.right = nd.at(3).get<int>();
      node.value = nd.at(4).get<double>();
      t.nodes.push_back(node);
    }
    return t;
  }
};

namespace detail {

inline double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

}  // namespace detail

// Logistic loss at margin m with label y in {0,1}, evaluated stably.
inline double logistic_loss(double margin, int y) {
  const double softplus_neg =
      margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
  const double softplus_pos =
      margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return y ? softplus_neg : softplus_pos;
}

// First and second derivative of the logistic loss w.r.t. the margin.
inline std::pair<double, double> logistic_grad_hess(double margin, int y) {
  const double p = detail::sigmoid(margin);
  return {p - double(y), p * (1.0 - p)};
}

namespace detail {

inline double gini_binary(double pos, double n) {
  if (n <= 0.0) return 0.0;
  const double p = pos / n;
  return 2.0 * p * (1.0 - p);
}

// Candidate feature set for one node, ascending so tie-breaking stays
// "lowest feature index first".
inline std::vector<int> node_features(Eigen::Index d, int subset_size, Rng* rng) {
  if (subset_size <= 0 || subset_size >= int(d) || rng == nullptr) {
    std::vector<int> all(static_cast<std::size_t>(d));
    for (Eigen::Index f = 0; f < d; ++f) all[std::size_t(f)] = int(f);
    return all;
  }
  std::vector<int> sub = rng->sample_without_replacement(int(d), subset_size);
  std::sort(sub.begin(), sub.end());
  return sub;
}

// --- CART (Gini) -----------------------------------------------------------

struct CartParams {
  int max_depth = 5;
  int min_leaf = 1;
  int subset_size = 0;  // 0 = all features
  Rng* rng = nullptr;
};

inline int build_cart_node(Tree& tree, const Eigen::MatrixXd& x, const std::vector<int>& y,
                           std::vector<int>& rows, int depth, const CartParams& params) {
  const int n = int(rows.size());
  long pos = 0;
  for (int r : rows) pos += y[std::size_t(r)];
  const int node_id = int(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[std::size_t(node_id)].value = double(pos) / double(n);

  if (depth >= params.max_depth || n < 2 * params.min_leaf || pos == 0 || pos == n)
    return node_id;

  const double parent = gini_binary(double(pos), double(n));
  int best_feature = -1;
  double best_threshold = 0.0, best_gain = 0.0;
  std::vector<std::pair<double, int>> vals;
  vals.reserve(std::size_t(n));
  for (int f : node_features(x.cols(), params.subset_size, params.rng)) {
    vals.clear();
    for (int r : rows) vals.emplace_back(x(r, f), y[std::size_t(r)]);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    long left_pos = 0;
    for (int i = 0; i + 1 < n; ++i) {
      left_pos += vals[std::size_t(i)].second;
      if (vals[std::size_t(i)].first == vals[std::size_t(i + 1)].first) continue;
      const int left_n = i + 1, right_n = n - left_n;
      if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
      const double child =
          (left_n * gini_binary(double(left_pos), double(left_n)) +
           right_n * gini_binary(double(pos - left_pos), double(right_n))) /
          double(n);
      const double gain = parent - child;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = 0.5 * (vals[std::size_t(i)].first + vals[std::size_t(i + 1)].first);
      }
    }
  }
  if (best_feature < 0) return node_id;

  const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](int r) {
    return x(r, best_feature) <= best_threshold;
  });
  std::vector<int> left_rows(rows.begin(), mid), right_rows(mid, rows.end());
  tree.nodes[std::size_t(node_id)].feature = best_feature;
  tree.nodes[std::size_t(node_id)].threshold = best_threshold;
  const int left_id = build_cart_node(tree, x, y, left_rows, depth + 1, params);
  tree.nodes[std::size_t(node_id)].left = left_id;
  const int right_id = build_cart_node(tree, x, y, right_rows, depth + 1, params);
  tree.nodes[std::size_t(node_id)].right = right_id;
  return node_id;
}

inline Tree build_cart(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<int> rows,
                       const CartParams& params) {
  Tree tree;
  build_cart_node(tree, x, y, rows, 0, params);
  return tree;
}

// --- Gradient boosting -----------------------------------------------------

struct GbtBins {
  // edges[f] ascending; bin(x) = index of first edge >= x (last bin otherwise)
  std::vector<std::vector<double>> edges;
  // bin index per (row, feature), row-major n x d
  std::vector<std::uint16_t> bin_of;
  Eigen::Index n = 0, d = 0;

  std::uint16_t bin(Eigen::Index r, Eigen::Index f) const {
    return bin_of[std::size_t(r) * std::size_t(d) + std::size_t(f)];
  }
};

inline GbtBins compute_bins(const Eigen::MatrixXd& x, int n_bins) {
  GbtBins bins;
  bins.n = x.rows();
  bins.d = x.cols();
  bins.edges.resize(std::size_t(x.cols()));
  bins.bin_of.resize(std::size_t(x.rows()) * std::size_t(x.cols()));
  std::vector<double> sorted(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) sorted[std::size_t(r)] = x(r, f);
    std::sort(sorted.begin(), sorted.end());
    auto& e = bins.edges[std::size_t(f)];
    for (int b = 1; b < n_bins; ++b) {
      const double q = double(b) / double(n_bins);
      const double v = sorted[std::size_t(q * double(x.rows() - 1))];
      if (e.empty() || v > e.back()) e.push_back(v);
    }
    // Drop a top edge equal to the maximum: it would create an empty last bin.
    while (!e.empty() && e.back() >= sorted.back()) e.pop_back();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const auto it = std::lower_bound(e.begin(), e.end(), x(r, f));
      bins.bin_of[std::size_t(r) * std::size_t(x.cols()) + std::size_t(f)] =
          std::uint16_t(it - e.begin());
    }
  }
  return bins;
}

struct GbtParams {
  int max_depth = 5;
  int min_leaf = 1;
  double lambda = 1.0;
  double shrinkage = 0.1;
  int subset_size = 0;  // 0 = all features
  Rng* rng = nullptr;
  const GbtBins* bins = nullptr;  // null = exact splits
};

struct GbtSample {
  int row;
  double w;  // goss rescale weight, 1 otherwise
};

inline double split_score(double g, double h, double lambda) { return g * g / (h + lambda); }

inline int build_gbt_node(Tree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
                          const Eigen::VectorXd& hess, std::vector<GbtSample>& rows, int depth,
                          const GbtParams& params) {
  const int n = int(rows.size());
  double g_sum = 0.0, h_sum = 0.0;
  for (const auto& s : rows) {
    g_sum += s.w * grad[s.row];
    h_sum += s.w * hess[s.row];
  }
  const int node_id = int(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[std::size_t(node_id)].value = params.shrinkage * (-g_sum / (h_sum + params.lambda));

  if (depth >= params.max_depth || n < 2 * params.min_leaf) return node_id;

  const double parent_score = split_score(g_sum, h_sum, params.lambda);
  int best_feature = -1;
  double best_threshold = 0.0, best_gain = 0.0;

  if (params.bins != nullptr) {
    const GbtBins& bins = *params.bins;
    std::vector<double> bg, bh;
    std::vector<int> bc;
    for (int f : node_features(x.cols(), params.subset_size, params.rng)) {
      const auto& edges = bins.edges[std::size_t(f)];
      if (edges.empty()) continue;
      const std::size_t n_bin = edges.size() + 1;
      bg.assign(n_bin, 0.0);
      bh.assign(n_bin, 0.0);
      bc.assign(n_bin, 0);
      for (const auto& s : rows) {
        const std::uint16_t b = bins.bin(s.row, f);
        bg[b] += s.w * grad[s.row];
        bh[b] += s.w * hess[s.row];
        bc[b] += 1;
      }
      double gl = 0.0, hl = 0.0;
      int cl = 0;
      for (std::size_t b = 0; b + 1 < n_bin; ++b) {
        gl += bg[b];
        hl += bh[b];
        cl += bc[b];
        if (cl < params.min_leaf || n - cl < params.min_leaf) continue;
        const double gain = 0.5 * (split_score(gl, hl, params.lambda) +
                                   split_score(g_sum - gl, h_sum - hl, params.lambda) -
                                   parent_score);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = edges[b];
        }
      }
    }
  } else {
    std::vector<std::pair<double, int>> vals;  // (value, sample index in rows)
    vals.reserve(std::size_t(n));
    for (int f : node_features(x.cols(), params.subset_size, params.rng)) {
      vals.clear();
      for (int i = 0; i < n; ++i) vals.emplace_back(x(rows[std::size_t(i)].row, f), i);
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double gl = 0.0, hl = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const auto& s = rows[std::size_t(vals[std::size_t(i)].second)];
        gl += s.w * grad[s.row];
        hl += s.w * hess[s.row];
        if (vals[std::size_t(i)].first == vals[std::size_t(i + 1)].first) continue;
        const int left_n = i + 1;
        if (left_n < params.min_leaf || n - left_n < params.min_leaf) continue;
        const double gain = 0.5 * (split_score(gl, hl, params.lambda) +
                                   split_score(g_sum - gl, h_sum - hl, params.lambda) -
                                   parent_score);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (vals[std::size_t(i)].first + vals[std::size_t(i + 1)].first);
        }
      }
    }
  }
  if (best_feature < 0) return node_id;

  const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](const GbtSample& s) {
    return x(s.row, best_feature) <= best_threshold;
  });
  std::vector<GbtSample> left_rows(rows.begin(), mid), right_rows(mid, rows.end());
  tree.nodes[std::size_t(node_id)].feature = best_feature;
  tree.nodes[std::size_t(node_id)].threshold = best_threshold;
  const int left_id = build_gbt_node(tree, x, grad, hess, left_rows, depth + 1, params);
  tree.nodes[std::size_t(node_id)].left = left_id;
  const int right_id = build_gbt_node(tree, x, grad, hess, right_rows, depth + 1, params);
  tree.nodes[std::size_t(node_id)].right = right_id;
  return node_id;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LearnerModel

struct LearnerModel {
  LearnerSpec spec;
  Eigen::Index dim = 0;
  double base_margin = 0.0;  // gbt
  std::vector<Tree> trees;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "pers.learner";
    j["version"] = 1;
    j["spec"] = spec.to_json();
    j["dim"] = dim;
    j["base_margin"] = base_margin;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    j["trees"] = arr;
    return j;
  }

  static LearnerModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "pers.learner" || j.value("version", 0) != 1)
      throw IoError("learner payload: unknown format/version");
    LearnerModel m;
    m.spec = LearnerSpec::from_json(j.at("spec"));
    m.dim = j.at("dim").get<Eigen::Index>();
    m.base_margin = j.at("base_margin").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(Tree::from_json(t));
    return m;
  }
};

inline Eigen::VectorXd predict_scores(const LearnerModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.dim)
    throw DimensionError("learner expects " + std::to_string(model.dim) + " columns, got " +
                         std::to_string(x.cols()));
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double acc = 0.0;
    for (const auto& t : model.trees) acc += t.predict_row(x, r);
    switch (model.spec.kind) {
      case LearnerKind::cart:
        out[r] = acc;
        break;
      case LearnerKind::random_forest:
        out[r] = acc / double(model.trees.size());
        break;
      case LearnerKind::gbt:
        out[r] = detail::sigmoid(model.base_margin + acc);
        break;
    }
  }
  return out;
}

inline std::vector<int> predict_labels(const LearnerModel& model, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd scores = predict_scores(model, x);
  std::vector<int> labels(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) labels[std::size_t(i)] = scores[i] >= 0.5 ? 1 : 0;
  return labels;
}

namespace detail {

inline void check_training_input(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  if (x.rows() == 0) throw DegenerateInput("empty training set");
  if (Eigen::Index(y.size()) != x.rows())
    throw DimensionError("labels/rows size mismatch: " + std::to_string(y.size()) + " vs " +
                         std::to_string(x.rows()));
  for (int v : y)
    if (v != 0 && v != 1) throw DegenerateInput("labels must be 0/1");
}

inline int forest_subset_size(const LearnerSpec& spec, Eigen::Index d) {
  if (spec.sqrt_features) return int(std::ceil(std::sqrt(double(d))));
  if (spec.colsample < 1.0) return std::max(1, int(std::llround(spec.colsample * double(d))));
  return 0;  // all
}

}  // namespace detail

inline LearnerModel fit_decision_tree(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                      const LearnerSpec& spec, std::uint64_t seed) {
  detail::check_training_input(x, y);
  spec.validate();
  (void)seed;  // exact CART is deterministic; kept for contract uniformity
  LearnerModel model;
  model.spec = spec;
  model.spec.kind = LearnerKind::cart;
  model.dim = x.cols();
  detail::CartParams params;
  params.max_depth = spec.depth;
  params.min_leaf = spec.min_leaf;
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) rows[std::size_t(r)] = int(r);
  model.trees.push_back(detail::build_cart(x, y, std::move(rows), params));
  return model;
}

inline LearnerModel fit_random_forest(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                      const LearnerSpec& spec, std::uint64_t seed,
                                      int workers = 1) {
  detail::check_training_input(x, y);
  spec.validate();
  if (x.rows() < 2) throw DegenerateInput("random forest needs at least 2 rows");
  LearnerModel model;
  model.spec = spec;
  model.spec.kind = LearnerKind::random_forest;
  model.dim = x.cols();
  model.trees.resize(std::size_t(spec.n_trees));
  const int subset = detail::forest_subset_size(spec, x.cols());
  const std::uint64_t base = hash_combine(seed, spec.seed);
  parallel_for(std::size_t(spec.n_trees), workers, [&](std::size_t t) {
    Rng rng(derive_seed(base, "forest-tree", {std::uint64_t(t)}));
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    if (spec.bootstrap) {
      for (auto& r : rows) r = int(rng.uniform_index(std::uint64_t(x.rows())));
    } else {
      for (Eigen::Index r = 0; r < x.rows(); ++r) rows[std::size_t(r)] = int(r);
    }
    detail::CartParams params;
    params.max_depth = spec.depth;
    params.min_leaf = spec.min_leaf;
    params.subset_size = subset;
    params.rng = &rng;
    model.trees[t] = detail::build_cart(x, y, std::move(rows), params);
  });
  return model;
}

inline LearnerModel fit_gradient_boosted_trees(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                               const LearnerSpec& spec, std::uint64_t seed) {
  detail::check_training_input(x, y);
  spec.validate();
  if (x.rows() < 2) throw DegenerateInput("boosting needs at least 2 rows");
  long pos = 0;
  for (int v : y) pos += v;
  if (pos == 0 || pos == long(y.size()))
    throw DegenerateInput("boosting needs both classes present");
  if (!x.allFinite()) throw NonFiniteInput("training matrix contains NaN or infinity");

  LearnerModel model;
  model.spec = spec;
  model.spec.kind = LearnerKind::gbt;
  model.dim = x.cols();
  model.base_margin = std::log(double(pos) / double(long(y.size()) - pos));

  const detail::GbtBins bins = spec.n_bins > 0 ? detail::compute_bins(x, spec.n_bins) : detail::GbtBins{};
  const std::uint64_t base = hash_combine(seed, spec.seed);
  const int n = int(x.rows());

  Eigen::VectorXd margins = Eigen::VectorXd::Constant(x.rows(), model.base_margin);
  Eigen::VectorXd grad(x.rows()), hess(x.rows());

  for (int round = 0; round < spec.n_trees; ++round) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const auto [g, h] = logistic_grad_hess(margins[r], y[std::size_t(r)]);
      grad[r] = g;
      hess[r] = h;
    }

    Rng rng(derive_seed(base, "gbt-round", {std::uint64_t(round)}));
    std::vector<detail::GbtSample> rows;
    if (spec.goss_enabled) {
      std::vector<int> order(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) order[std::size_t(i)] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ga = std::abs(grad[a]), gb = std::abs(grad[b]);
        if (ga != gb) return ga > gb;
        return a < b;
      });
      const int top = int(std::min<long long>(n, std::llround(spec.goss_top_rate * n)));
      const int rest = n - top;
      const int sampled = int(std::min<long long>(rest, std::llround(spec.goss_other_rate * rest)));
      const double rescale = rest > 0 ? (1.0 - spec.goss_top_rate) / spec.goss_other_rate : 1.0;
      std::vector<int> rest_rows(order.begin() + top, order.end());
      std::vector<int> picked = [&] {
        Rng sampler(derive_seed(base, "goss-sample", {std::uint64_t(round)}));
        std::vector<int> idx = sampler.sample_without_replacement(rest, sampled);
        std::vector<int> out;
        out.reserve(idx.size());
        for (int i : idx) out.push_back(rest_rows[std::size_t(i)]);
        return out;
      }();
      rows.reserve(std::size_t(top) + picked.size());
      for (int i = 0; i < top; ++i) rows.push_back({order[std::size_t(i)], 1.0});
      for (int r : picked) rows.push_back({r, rescale});
      std::sort(rows.begin(), rows.end(),
                [](const detail::GbtSample& a, const detail::GbtSample& b) { return a.row < b.row; });
    } else if (spec.subsample < 1.0) {
      const int keep = std::max(1, int(std::llround(spec.subsample * n)));
      std::vector<int> idx = rng.sample_without_replacement(n, keep);
      std::sort(idx.begin(), idx.end());
      rows.reserve(idx.size());
      for (int r : idx) rows.push_back({r, 1.0});
    } else {
      rows.reserve(std::size_t(n));
      for (int i = 0; i < n; ++i) rows.push_back({i, 1.0});
    }

    detail::GbtParams params;
    params.max_depth = spec.depth;
    params.min_leaf = spec.min_leaf;
    params.lambda = spec.lambda;
    params.shrinkage = spec.learning_rate;
    params.subset_size = spec.colsample < 1.0
                             ? std::max(1, int(std::llround(spec.colsample * double(x.cols()))))
                             : 0;
    params.rng = &rng;
    params.bins = spec.n_bins > 0 ? &bins : nullptr;

    Tree tree;
    detail::build_gbt_node(tree, x, grad, hess, rows, 0, params);
    for (Eigen::Index r = 0; r < x.rows(); ++r) margins[r] += tree.predict_row(x, r);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// Dispatch behind the common contract.
inline LearnerModel fit_learner(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                const LearnerSpec& spec, std::uint64_t seed, int workers = 1) {
  switch (spec.kind) {
    case LearnerKind::cart: return fit_decision_tree(x, y, spec, seed);
    case LearnerKind::random_forest: return fit_random_forest(x, y, spec, seed, workers);
    case LearnerKind::gbt: return fit_gradient_boosted_trees(x, y, spec, seed);
  }
  throw ConfigError("unknown learner kind");
}

// Training log-loss of a gbt model after each boosting round; test hook for
// the monotone-descent property.
inline std::vector<double> gbt_round_log_losses(const LearnerModel& model, const Eigen::MatrixXd& x,
                                                const std::vector<int>& y) {
  std::vector<double> losses;
  Eigen::VectorXd margins = Eigen::VectorXd::Constant(x.rows(), model.base_margin);
  auto log_loss = [&] {
    double total = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      total += logistic_loss(margins[r], y[std::size_t(r)]);
    return total / double(x.rows());
  };
  losses.push_back(log_loss());
  for (const auto& tree : model.trees) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) margins[r] += tree.predict_row(x, r);
    losses.push_back(log_loss());
  }
  return losses;
}

// ---------------------------------------------------------------------------
// Linear SVM

struct SvmModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double c = 1.0;

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const {
    if (x.cols() != weights.size())
      throw DimensionError("svm expects " + std::to_string(weights.size()) + " columns, got " +
                           std::to_string(x.cols()));
    return (x * weights).array() + bias;
  }

  // Ties at decision value 0 resolve to the positive class.
  std::vector<int> predict(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd d = decision(x);
    std::vector<int> labels(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) labels[std::size_t(i)] = d[i] >= 0.0 ? 1 : 0;
    return labels;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "pers.svm";
    j["version"] = 1;
    std::vector<double> w(weights.data(), weights.data() + weights.size());
    j["weights"] = w;
    j["bias"] = bias;
    j["c"] = c;
    return j;
  }

  static SvmModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "pers.svm" || j.value("version", 0) != 1)
      throw IoError("svm payload: unknown format/version");
    SvmModel m;
    const auto w = j.at("weights").get<std::vector<double>>();
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), Eigen::Index(w.size()));
    m.bias = j.at("bias").get<double>();
    m.c = j.at("c").get<double>();
    return m;
  }
};

// Primal hinge-loss objective 0.5*||w||^2 + C * sum_i hinge(y_i (w.x_i + b)),
// minimized by full-pass subgradient descent on the 1/(n*C)-scaled objective
// with step schedule 1/(lambda*t) and a norm-ball projection for stability.
// Epoch order is fixed, so training is deterministic.
inline SvmModel fit_linear_svm(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                               std::uint64_t seed, int epochs = 200) {
  detail::check_training_input(x, y);
  if (!(c > 0.0)) throw ConfigError("svm C must be positive");
  long pos = 0;
  for (int v : y) pos += v;
  if (pos == 0 || pos == long(y.size())) throw DegenerateInput("svm needs both classes present");
  (void)seed;  // the batch optimizer draws no randomness

  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd y_pm(n);
  for (Eigen::Index i = 0; i < n; ++i) y_pm[i] = y[std::size_t(i)] ? 1.0 : -1.0;

  const double lambda = 1.0 / (double(n) * c);
  const double radius = 1.0 / std::sqrt(lambda);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd grad_w(d);
  for (int t = 1; t <= epochs; ++t) {
    const double eta = 1.0 / (lambda * double(t));
    grad_w = lambda * w;
    double grad_b = 0.0;
    const Eigen::VectorXd margins = y_pm.array() * ((x * w).array() + b);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (margins[i] < 1.0) {
        grad_w -= (y_pm[i] / double(n)) * x.row(i).transpose();
        grad_b -= y_pm[i] / double(n);
      }
    }
    w -= eta * grad_w;
    b -= eta * grad_b;
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;
  }

  SvmModel model;
  model.weights = std::move(w);
  model.bias = b;
  model.c = c;
  return model;
}

}  // namespace pers
