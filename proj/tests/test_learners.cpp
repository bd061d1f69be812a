#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pers/learners.hpp"

using namespace pers;

namespace {

struct Blobs {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// two Gaussian blobs, optionally overlapping
Blobs make_blobs(int n, int d, double separation, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Blobs b;
  b.x = Eigen::MatrixXd(n, d);
  b.y.resize(std::size_t(n));
  for (int r = 0; r < n; ++r) {
    const int label = r % 2;
    b.y[std::size_t(r)] = label;
    for (int c = 0; c < d; ++c)
      b.x(r, c) = dist(gen) + (label ? separation : -separation);
  }
  return b;
}

double accuracy(const LearnerModel& model, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const std::vector<int> pred = predict_labels(model, x);
  int hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i];
  return double(hit) / double(y.size());
}

// Exhaustive split-enumeration oracle for a depth-1 Gini tree.
struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

BestSplit brute_force_split(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const int n = int(x.rows());
  auto gini = [](double pos, double total) {
    if (total == 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  };
  double total_pos = 0;
  for (int v : y) total_pos += v;
  const double parent = gini(total_pos, n);
  BestSplit best;
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (int r = 0; r < n; ++r) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double thr = 0.5 * (vals[i] + vals[i + 1]);
      double lp = 0, ln = 0, rp = 0, rn = 0;
      for (int r = 0; r < n; ++r) {
        if (x(r, f) <= thr) (y[std::size_t(r)] ? lp : ln) += 1;
        else (y[std::size_t(r)] ? rp : rn) += 1;
      }
      const double child =
          ((lp + ln) * gini(lp, lp + ln) + (rp + rn) * gini(rp, rp + rn)) / double(n);
      if (parent - child > best.gain) {
        best = {f, thr, parent - child};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("cart: single-class labels give a depth-0 tree") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 1, 2, 3, 4, 5;
  const LearnerModel ones = fit_decision_tree(x, {1, 1, 1}, LearnerSpec::cart(4), 0);
  REQUIRE(ones.trees.size() == 1);
  CHECK(ones.trees[0].nodes.size() == 1);
  CHECK(predict_scores(ones, x)[0] == 1.0);
  const LearnerModel zeros = fit_decision_tree(x, {0, 0, 0}, LearnerSpec::cart(4), 0);
  CHECK(predict_scores(zeros, x)[1] == 0.0);
}

TEST_CASE("cart: 1-D staircase splits inside (1,2]") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const std::vector<int> y{0, 0, 1, 1};
  const LearnerModel m = fit_decision_tree(x, y, LearnerSpec::cart(1), 0);
  REQUIRE(m.trees[0].nodes.size() == 3);
  const TreeNode& root = m.trees[0].nodes[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold > 1.0);
  CHECK(root.threshold <= 2.0);
  CHECK(accuracy(m, x, y) == 1.0);

  const BestSplit oracle = brute_force_split(x, y);
  CHECK(root.threshold == Catch::Approx(oracle.threshold));
}

TEST_CASE("cart: chosen split matches the exhaustive oracle on random data") {
  for (unsigned trial = 0; trial < 25; ++trial) {
    const Blobs b = make_blobs(24, 3, 0.4, 100 + trial);
    const LearnerModel m = fit_decision_tree(b.x, b.y, LearnerSpec::cart(1), 0);
    const BestSplit oracle = brute_force_split(b.x, b.y);
    if (oracle.feature < 0) {
      CHECK(m.trees[0].nodes.size() == 1);
      continue;
    }
    REQUIRE(m.trees[0].nodes.size() == 3);
    CHECK(m.trees[0].nodes[0].feature == oracle.feature);
    CHECK(m.trees[0].nodes[0].threshold == Catch::Approx(oracle.threshold));
  }
}

TEST_CASE("cart: conflicting duplicate rows score the label mean") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 1, 1, 1;
  const LearnerModel m = fit_decision_tree(x, {1, 0, 0, 0}, LearnerSpec::cart(6), 0);
  CHECK(predict_scores(m, x)[0] == Catch::Approx(0.25));
}

TEST_CASE("cart errors") {
  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS(fit_decision_tree(empty, {}, LearnerSpec::cart(3), 0), DegenerateInput);
  Eigen::MatrixXd x(2, 2);
  x << 0, 1, 2, 3;
  const LearnerModel m = fit_decision_tree(x, {0, 1}, LearnerSpec::cart(3), 0);
  CHECK_THROWS_AS(predict_scores(m, Eigen::MatrixXd::Zero(1, 5)), DimensionError);
}

TEST_CASE("forest reduces to a single tree when sampling is off") {
  const Blobs b = make_blobs(60, 4, 0.8, 9);
  LearnerSpec spec = LearnerSpec::random_forest(1, 6);
  spec.bootstrap = false;
  spec.sqrt_features = false;
  const LearnerModel forest = fit_random_forest(b.x, b.y, spec, 3);
  const LearnerModel cart = fit_decision_tree(b.x, b.y, LearnerSpec::cart(6), 3);
  CHECK(predict_scores(forest, b.x) == predict_scores(cart, b.x));
}

TEST_CASE("forest is seed-deterministic and worker-independent") {
  const Blobs b = make_blobs(80, 5, 0.5, 11);
  const LearnerSpec spec = LearnerSpec::random_forest(12, 6);
  const LearnerModel m1 = fit_random_forest(b.x, b.y, spec, 21, 1);
  const LearnerModel m2 = fit_random_forest(b.x, b.y, spec, 21, 4);
  CHECK(m1.to_json() == m2.to_json());
  const LearnerModel m3 = fit_random_forest(b.x, b.y, spec, 22, 1);
  CHECK(m1.to_json() != m3.to_json());
}

TEST_CASE("forest separates linearly separable blobs") {
  const Blobs b = make_blobs(200, 4, 2.0, 13);
  const LearnerModel m = fit_random_forest(b.x, b.y, LearnerSpec::random_forest(30, 8), 5);
  CHECK(accuracy(m, b.x, b.y) >= 0.95);
}

TEST_CASE("forest score equals the mean of its trees") {
  const Blobs b = make_blobs(50, 3, 0.7, 15);
  const LearnerModel m = fit_random_forest(b.x, b.y, LearnerSpec::random_forest(7, 5), 8);
  const Eigen::VectorXd scores = predict_scores(m, b.x);
  for (int r = 0; r < 8; ++r) {
    double acc = 0.0;
    for (const auto& t : m.trees) acc += t.predict_row(b.x, r);
    CHECK(std::abs(scores[r] - acc / double(m.trees.size())) <= 1e-12);
  }
}

TEST_CASE("forest averaging generalizes at least as well as the median tree") {
  int wins = 0;
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Blobs train = make_blobs(120, 6, 0.55, 300 + seed);
    const Blobs test = make_blobs(120, 6, 0.55, 400 + seed);
    const LearnerModel forest =
        fit_random_forest(train.x, train.y, LearnerSpec::random_forest(25, 7), seed);
    // individual tree accuracies on held-out data
    std::vector<double> tree_acc;
    for (const auto& t : forest.trees) {
      int hit = 0;
      for (int r = 0; r < test.x.rows(); ++r)
        hit += (t.predict_row(test.x, r) >= 0.5 ? 1 : 0) == test.y[std::size_t(r)];
      tree_acc.push_back(double(hit) / double(test.x.rows()));
    }
    std::nth_element(tree_acc.begin(), tree_acc.begin() + 12, tree_acc.end());
    const double median = tree_acc[12];
    if (accuracy(forest, test.x, test.y) >= median) ++wins;
  }
  CHECK(wins >= 3);  // majority of seeds
}

TEST_CASE("gbt with zero rounds scores the prior") {
  const Blobs b = make_blobs(10, 2, 1.0, 17);
  const LearnerModel m = fit_gradient_boosted_trees(b.x, b.y, LearnerSpec::gbt(0), 0);
  const Eigen::VectorXd scores = predict_scores(m, b.x);
  for (int r = 0; r < 10; ++r) CHECK(scores[r] == Catch::Approx(0.5));  // balanced labels
}

namespace {

// Hand-rolled reference boosting for the 4-point staircase: depth-1 exact
// splits, leaf weight -G/(H+lambda), shrinkage applied, logistic loss.
std::vector<double> reference_gbt_margins_4pt(int rounds, double lr, double lambda) {
  const std::vector<double> xs{0, 1, 2, 3};
  const std::vector<int> ys{0, 0, 1, 1};
  std::vector<double> f(4, 0.0);  // balanced prior log-odds = 0
  for (int round = 0; round < rounds; ++round) {
    std::vector<double> g(4), h(4);
    for (int i = 0; i < 4; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-f[std::size_t(i)]));
      g[std::size_t(i)] = p - ys[std::size_t(i)];
      h[std::size_t(i)] = p * (1.0 - p);
    }
    double g_all = g[0] + g[1] + g[2] + g[3], h_all = h[0] + h[1] + h[2] + h[3];
    auto score = [&](double gs, double hs) { return gs * gs / (hs + lambda); };
    double best_gain = 0.0, best_thr = 0.0;
    bool found = false;
    for (double thr : {0.5, 1.5, 2.5}) {
      double gl = 0, hl = 0;
      for (int i = 0; i < 4; ++i)
        if (xs[std::size_t(i)] <= thr) {
          gl += g[std::size_t(i)];
          hl += h[std::size_t(i)];
        }
      const double gain = 0.5 * (score(gl, hl) + score(g_all - gl, h_all - hl) - score(g_all, h_all));
      if (gain > best_gain) {
        best_gain = gain;
        best_thr = thr;
        found = true;
      }
    }
    if (!found) {
      const double w = lr * (-g_all / (h_all + lambda));
      for (auto& m : f) m += w;
      continue;
    }
    double gl = 0, hl = 0;
    for (int i = 0; i < 4; ++i)
      if (xs[std::size_t(i)] <= best_thr) {
        gl += g[std::size_t(i)];
        hl += h[std::size_t(i)];
      }
    const double wl = lr * (-gl / (hl + lambda));
    const double wr = lr * (-(g_all - gl) / ((h_all - hl) + lambda));
    for (int i = 0; i < 4; ++i) f[std::size_t(i)] += xs[std::size_t(i)] <= best_thr ? wl : wr;
  }
  return f;
}

}  // namespace

TEST_CASE("gbt matches a hand-rolled reference on the 4-point staircase") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const std::vector<int> y{0, 0, 1, 1};
  LearnerSpec spec = LearnerSpec::gbt(20, 1, 0.3);
  spec.n_bins = 0;   // exact splits
  spec.lambda = 0.0; // pure Newton leaves; lambda=1 damps the 4-point fit above 0.1 loss
  const LearnerModel m = fit_gradient_boosted_trees(x, y, spec, 0);

  CHECK(accuracy(m, x, y) == 1.0);
  const std::vector<double> losses = gbt_round_log_losses(m, x, y);
  CHECK(losses.back() < 0.1);

  const std::vector<double> ref = reference_gbt_margins_4pt(20, 0.3, 0.0);
  for (int i = 0; i < 4; ++i) {
    double margin = m.base_margin;
    for (const auto& t : m.trees) margin += t.predict_row(x, i);
    CHECK(margin == Catch::Approx(ref[std::size_t(i)]).epsilon(1e-9));
  }
}

TEST_CASE("goss with top rate 1.0 is identical to plain histogram boosting") {
  const Blobs b = make_blobs(90, 5, 0.6, 23);
  LearnerSpec plain = LearnerSpec::gbt(15, 3);
  plain.n_bins = 16;
  LearnerSpec goss = plain;
  goss.goss_enabled = true;
  goss.goss_top_rate = 1.0;
  goss.goss_other_rate = 0.5;
  const LearnerModel m1 = fit_gradient_boosted_trees(b.x, b.y, plain, 31);
  const LearnerModel m2 = fit_gradient_boosted_trees(b.x, b.y, goss, 31);
  CHECK(m1.base_margin == m2.base_margin);
  // spec fields differ (goss flags), so compare the fitted trees
  REQUIRE(m1.trees.size() == m2.trees.size());
  for (std::size_t t = 0; t < m1.trees.size(); ++t)
    CHECK(m1.trees[t].to_json() == m2.trees[t].to_json());
}

TEST_CASE("goss sampling still learns") {
  const Blobs b = make_blobs(300, 6, 1.2, 25);
  LearnerSpec spec = LearnerSpec::gbt_goss(40, 4);
  spec.n_bins = 32;
  const LearnerModel m = fit_gradient_boosted_trees(b.x, b.y, spec, 1);
  CHECK(accuracy(m, b.x, b.y) >= 0.9);
}

TEST_CASE("logistic gradients and hessians match central differences") {
  std::mt19937 gen(27);
  std::uniform_real_distribution<double> margin_dist(-4.0, 4.0);
  const double eps = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double m = margin_dist(gen);
    const int y = int(gen() % 2);
    const auto [g, h] = logistic_grad_hess(m, y);
    const double g_fd = (logistic_loss(m + eps, y) - logistic_loss(m - eps, y)) / (2 * eps);
    const auto gp = logistic_grad_hess(m + eps, y).first;
    const auto gm = logistic_grad_hess(m - eps, y).first;
    const double h_fd = (gp - gm) / (2 * eps);
    CHECK(std::abs(g - g_fd) <= 1e-5 * std::max(1.0, std::abs(g_fd)));
    CHECK(std::abs(h - h_fd) <= 1e-5 * std::max(1.0, std::abs(h_fd)));
  }
}

TEST_CASE("gbt training log-loss never increases per round") {
  const Blobs b = make_blobs(150, 5, 0.5, 29);
  for (int bins : {0, 16}) {
    LearnerSpec spec = LearnerSpec::gbt(40, 4, 0.3);
    spec.n_bins = bins;
    const LearnerModel m = fit_gradient_boosted_trees(b.x, b.y, spec, 2);
    const std::vector<double> losses = gbt_round_log_losses(m, b.x, b.y);
    REQUIRE(losses.size() == 41);
    for (std::size_t i = 0; i + 1 < losses.size(); ++i)
      CHECK(losses[i + 1] <= losses[i] + 1e-12);
  }
}

TEST_CASE("gbt requires both classes") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 1, 2, 3, 4, 5, 6, 7;
  CHECK_THROWS_AS(fit_gradient_boosted_trees(x, {1, 1, 1, 1}, LearnerSpec::gbt(5), 0),
                  DegenerateInput);
}

TEST_CASE("gbt is seed-deterministic") {
  const Blobs b = make_blobs(70, 4, 0.6, 33);
  LearnerSpec spec = LearnerSpec::gbt_goss(10, 3);
  const LearnerModel m1 = fit_gradient_boosted_trees(b.x, b.y, spec, 77);
  const LearnerModel m2 = fit_gradient_boosted_trees(b.x, b.y, spec, 77);
  CHECK(m1.to_json() == m2.to_json());
}

TEST_CASE("scores are always within [0,1]") {
  const Blobs b = make_blobs(64, 3, 0.4, 35);
  const std::vector<LearnerModel> models{
      fit_decision_tree(b.x, b.y, LearnerSpec::cart(8), 0),
      fit_random_forest(b.x, b.y, LearnerSpec::random_forest(9, 6), 1),
      fit_gradient_boosted_trees(b.x, b.y, LearnerSpec::gbt(25, 3, 0.5), 2)};
  const Eigen::MatrixXd probe = Eigen::MatrixXd::Random(40, 3) * 10.0;
  for (const auto& m : models) {
    const Eigen::VectorXd scores = predict_scores(m, probe);
    for (int r = 0; r < scores.size(); ++r) {
      CHECK(scores[r] >= 0.0);
      CHECK(scores[r] <= 1.0);
      CHECK(std::isfinite(scores[r]));
    }
  }
}

TEST_CASE("learner model JSON round-trips with identical predictions") {
  const Blobs b = make_blobs(48, 4, 0.8, 37);
  const LearnerModel m = fit_gradient_boosted_trees(b.x, b.y, LearnerSpec::gbt(12, 3), 5);
  const LearnerModel back = LearnerModel::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(predict_scores(back, b.x) == predict_scores(m, b.x));
}

TEST_CASE("svm separates the symmetric pair for any C >= 1") {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  const std::vector<int> y{0, 1};
  for (double c : {1.0, 5.0, 50.0}) {
    const SvmModel m = fit_linear_svm(x, y, c, 0);
    const Eigen::VectorXd d = m.decision(x);
    CHECK(d[0] < 0.0);
    CHECK(d[1] > 0.0);
    CHECK(m.predict(x) == y);
  }
}

TEST_CASE("svm labels are stable under feature scaling (separable data)") {
  const Blobs b = make_blobs(60, 3, 2.5, 41);
  const SvmModel m1 = fit_linear_svm(b.x, b.y, 1.0, 0);
  const SvmModel m2 = fit_linear_svm((b.x * 2.0).eval(), b.y, 1.0, 0);
  CHECK(m1.predict(b.x) == m2.predict((b.x * 2.0).eval()));
  CHECK(m1.predict(b.x) == b.y);
}

TEST_CASE("svm labels are stable under dataset duplication") {
  const Blobs b = make_blobs(40, 3, 2.5, 43);
  Eigen::MatrixXd doubled(80, 3);
  doubled << b.x, b.x;
  std::vector<int> y2 = b.y;
  y2.insert(y2.end(), b.y.begin(), b.y.end());
  const SvmModel m1 = fit_linear_svm(b.x, b.y, 1.0, 0);
  const SvmModel m2 = fit_linear_svm(doubled, y2, 1.0, 0);
  CHECK(m1.predict(b.x) == m2.predict(b.x));
}

TEST_CASE("svm rejects single-class input and ties go positive") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  CHECK_THROWS_AS(fit_linear_svm(x, {1, 1, 1}, 1.0, 0), DegenerateInput);

  SvmModel m;
  m.weights = Eigen::VectorXd::Zero(1);
  m.bias = 0.0;
  CHECK(m.predict(x) == std::vector<int>{1, 1, 1});
}

TEST_CASE("svm JSON round-trips") {
  const Blobs b = make_blobs(30, 4, 1.0, 47);
  const SvmModel m = fit_linear_svm(b.x, b.y, 2.0, 0);
  const SvmModel back = SvmModel::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.decision(b.x) == m.decision(b.x));
}

TEST_CASE("learner spec validation") {
  LearnerSpec s = LearnerSpec::gbt();
  s.depth = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = LearnerSpec::gbt();
  s.subsample = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = LearnerSpec::random_forest();
  s.n_trees = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = LearnerSpec::gbt();
  s.n_bins = 1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  // spec JSON round-trip
  const LearnerSpec g = LearnerSpec::gbt_goss(17, 4, 0.2);
  CHECK(LearnerSpec::from_json(g.to_json()).to_json() == g.to_json());
}
