#pragma once

// Seeded synthetic-corpus generator with planted, tunable per-dimension
// signal in both views. Signal is a frequency shift, not a deterministic
// marker: a "signal slot" token (or image bump unit) comes from the user's
// own pole vocabulary with probability (1+s)/2 and from the opposite pole
// with probability (1-s)/2, so s=0 carries no information and s=1 is fully
// polarized. Decoy raw MBTI codes, mentions, URLs, hashtags, dates, emoji
// and non-ASCII words are mixed in to exercise the normalizer.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "pers/corpus.hpp"
#include "pers/errors.hpp"
#include "pers/image_store.hpp"
#include "pers/mbti.hpp"
#include "pers/rng.hpp"

namespace pers {

struct SynthConfig {
  int n_users = 1000;
  int posts_per_user = 10;
  int tokens_per_post = 10;
  int images_min = 2;
  int images_max = 5;
  int signal_vocab_size = 8;  // words per (dimension, pole)
  int noise_vocab_size = 500;
  std::array<double, 4> text_signal{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> image_signal{0.0, 0.0, 0.0, 0.0};
  std::array<double, 16> label_distribution = uniform_distribution();
  int image_dim = 1000;
  double decoy_rate = 0.1;  // per-post probability of one injected decoy token
  std::uint64_t seed = 0;

  static std::array<double, 16> uniform_distribution() {
    std::array<double, 16> d;
    d.fill(1.0 / 16.0);
    return d;
  }

  void validate() const {
    if (n_users < 2) throw ConfigError("synth needs at least 2 users");
    if (posts_per_user < 1 || tokens_per_post < 1)
      throw ConfigError("posts_per_user and tokens_per_post must be >= 1");
    if (images_min < 0 || images_max < images_min) throw ConfigError("bad images_per_user range");
    if (signal_vocab_size < 1 || noise_vocab_size < 1) throw ConfigError("vocab sizes must be >= 1");
    for (double s : text_signal)
      if (s < 0.0 || s > 1.0) throw ConfigError("text signal strengths must be in [0,1]");
    for (double s : image_signal)
      if (s < 0.0 || s > 1.0) throw ConfigError("image signal strengths must be in [0,1]");
    double sum = 0.0;
    for (double p : label_distribution) {
      if (p < 0.0) throw ConfigError("label distribution entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("label distribution must sum to 1");
    if (images_max > 0 && image_dim < 8 * kBumpConcepts)
      throw ConfigError("image_dim too small for the planted concept sets");
    if (decoy_rate < 0.0 || decoy_rate > 1.0) throw ConfigError("decoy_rate must be in [0,1]");
  }

  static constexpr int kBumpConcepts = 8;  // concepts per (dimension, pole) set
};

// Per-type user counts observed in the released multi-source corpora,
// indexed by 4-letter code; used to draw realistic label distributions.
inline std::array<double, 16> reference_type_distribution(Source source) {
  struct Row {
    const char* code;
    double percafe, twitter, facebook;
  };
  static constexpr std::array<Row, 16> counts{{
      {"INFP", 713, 5334, 1665}, {"INFJ", 664, 4177, 1498}, {"INTP", 508, 1121, 814},
      {"INTJ", 487, 3544, 521},  {"ENFP", 353, 3496, 2381}, {"ENTP", 256, 122, 671},
      {"ISFP", 137, 413, 161},   {"ISTP", 127, 508, 131},   {"ENTJ", 113, 389, 412},
      {"ISTJ", 98, 739, 162},    {"ENFJ", 96, 323, 1468},   {"ISFJ", 85, 456, 535},
      {"ESTP", 50, 200, 63},     {"ESFJ", 43, 52, 666},     {"ESFP", 43, 311, 316},
      {"ESTJ", 27, 120, 266},
  }};
  std::array<double, 16> dist{};
  double total = 0.0;
  for (const auto& row : counts) {
    double c = 0.0;
    switch (source) {
      case Source::percafe: c = row.percafe; break;
      case Source::twitter: c = row.twitter; break;
      case Source::facebook: c = row.facebook; break;
      case Source::synthetic: c = 1.0; break;
    }
    dist[std::size_t(parse_mbti_code(row.code).type_index())] = c;
    total += c;
  }
  for (double& p : dist) p /= total;
  return dist;
}

struct SynthReport {
  // Balanced-prior channel estimates of the best achievable accuracy,
  // treating signal slots as directly observable (base noise ignored).
  std::array<double, 4> text_bayes{0.5, 0.5, 0.5, 0.5};
  std::array<double, 4> image_bayes{0.5, 0.5, 0.5, 0.5};
};

struct SynthResult {
  Corpus corpus;
  ImageConceptStore store;
  SynthReport report;
};

namespace detail {

inline std::string signal_word(int dim, int pole, int idx) {
  static constexpr std::array<const char*, 4> dim_tag{"ei", "sn", "tf", "jp"};
  static constexpr std::array<std::array<const char*, 2>, 4> pole_tag{{
      {"e", "i"}, {"s", "n"}, {"t", "f"}, {"j", "p"}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "w_%s_%s_%02d", dim_tag[std::size_t(dim)],
                pole_tag[std::size_t(dim)][std::size_t(pole)], idx);
  return buf;
}

inline std::string noise_word(int idx) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%04d", idx);
  return buf;
}

inline std::string decoy_token(Rng& rng) {
  static const std::array<std::string, 5> emoji{"\xF0\x9F\x8E\x89", "\xF0\x9F\x98\x82",
                                                "\xE2\x9D\xA4\xEF\xB8\x8F", "\xF0\x9F\x94\xA5",
                                                "\xF0\x9F\x91\x8D"};
  static const std::array<std::string, 4> non_ascii{"caf\xC3\xA9", "na\xC3\xAFve",
                                                    "r\xC3\xA9sum\xC3\xA9", "se\xC3\xB1or"};
  switch (rng.uniform_index(7)) {
    case 0: return type_code_for_index(int(rng.uniform_index(16)));
    case 1: return "@user" + std::to_string(1000 + rng.uniform_index(9000));
    case 2: {
      std::string url = "https://t.co/";
      for (int i = 0; i < 6; ++i) url += char('a' + rng.uniform_index(26));
      return url;
    }
    case 3: return "#topic" + std::to_string(rng.uniform_index(100));
    case 4: {
      char buf[16];
      std::snprintf(buf, sizeof buf, "2020-%02d-%02d", int(rng.uniform_index(12)) + 1,
                    int(rng.uniform_index(28)) + 1);
      return buf;
    }
    case 5: return emoji[std::size_t(rng.uniform_index(emoji.size()))];
    default: return non_ascii[std::size_t(rng.uniform_index(non_ascii.size()))];
  }
}

// Accuracy of majority voting over `trials` Bernoulli(q) observations,
// marginalized over a Binomial(total, slot_rate) trial count.
inline double majority_accuracy(int total, double slot_rate, double q) {
  if (total <= 0) return 0.5;
  // pmf over number of signal slots
  std::vector<double> slot_pmf(std::size_t(total) + 1, 0.0);
  if (slot_rate >= 1.0) {
    slot_pmf[std::size_t(total)] = 1.0;
  } else {
    double p = std::pow(1.0 - slot_rate, total);
    for (int m = 0; m <= total; ++m) {
      slot_pmf[std::size_t(m)] = p;
      if (m < total)
        p = p * slot_rate / (1.0 - slot_rate) * double(total - m) / double(m + 1);
    }
  }
  double acc = 0.0;
  for (int m = 0; m <= total; ++m) {
    if (slot_pmf[std::size_t(m)] <= 0.0) continue;
    if (m == 0) {
      acc += slot_pmf[std::size_t(m)] * 0.5;
      continue;
    }
    if (q >= 1.0) {
      acc += slot_pmf[std::size_t(m)];
      continue;
    }
    // P(own-pole draws o) ~ Binomial(m, q); majority correct, ties half right
    double correct = 0.0;
    double pmf = std::pow(1.0 - q, m);
    for (int o = 0; o <= m; ++o) {
      if (2 * o > m) correct += pmf;
      else if (2 * o == m) correct += 0.5 * pmf;
      if (o < m) pmf = pmf * q / (1.0 - q) * double(m - o) / double(o + 1);
    }
    acc += slot_pmf[std::size_t(m)] * correct;
  }
  return acc;
}

}  // namespace detail

inline constexpr double kSynthSlotRate = 0.125;   // per-dimension signal slot rate per token
inline constexpr double kSynthBumpMass = 0.5;     // image mass carried by planted concept sets

inline SynthResult generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthResult result;
  result.corpus.users.reserve(std::size_t(cfg.n_users));

  for (int u = 0; u < cfg.n_users; ++u) {
    Rng rng(derive_seed(cfg.seed, "synth-user", {std::uint64_t(u)}));
    UserRecord user;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "u%06d", u);
    user.user_id = idbuf;
    user.source = Source::synthetic;

    std::vector<double> weights(cfg.label_distribution.begin(), cfg.label_distribution.end());
    user.label = label_from_type_index(int(rng.categorical(weights)));

    for (int p = 0; p < cfg.posts_per_user; ++p) {
      std::vector<std::string> tokens;
      tokens.reserve(std::size_t(cfg.tokens_per_post) + 1);
      for (int t = 0; t < cfg.tokens_per_post; ++t) {
        const double u01 = rng.uniform();
        if (u01 < 4.0 * kSynthSlotRate) {
          const int dim = int(u01 / kSynthSlotRate);
          const double q = 0.5 * (1.0 + cfg.text_signal[std::size_t(dim)]);
          const int own = user.label.bits[std::size_t(dim)];
          const int pole = rng.bernoulli(q) ? own : 1 - own;
          tokens.push_back(
              detail::signal_word(dim, pole, int(rng.uniform_index(std::uint64_t(cfg.signal_vocab_size)))));
        } else {
          tokens.push_back(detail::noise_word(int(rng.uniform_index(std::uint64_t(cfg.noise_vocab_size)))));
        }
      }
      if (rng.bernoulli(cfg.decoy_rate)) {
        const std::size_t at = std::size_t(rng.uniform_index(tokens.size() + 1));
        tokens.insert(tokens.begin() + std::ptrdiff_t(at), detail::decoy_token(rng));
      }
      std::string post;
      for (const auto& tok : tokens) {
        if (!post.empty()) post += ' ';
        post += tok;
      }
      user.posts.push_back(std::move(post));
    }

    const int n_images =
        cfg.images_min +
        int(rng.uniform_index(std::uint64_t(cfg.images_max - cfg.images_min + 1)));
    for (int im = 0; im < n_images; ++im) {
      char imbuf[32];
      std::snprintf(imbuf, sizeof imbuf, "img_%06d_%02d", u, im);
      Eigen::VectorXd vec(cfg.image_dim);
      double base_sum = 0.0;
      for (Eigen::Index c = 0; c < cfg.image_dim; ++c) {
        vec[c] = rng.exponential();
        base_sum += vec[c];
      }
      vec *= (1.0 - kSynthBumpMass) / base_sum;
      const double unit = kSynthBumpMass / (4.0 * double(SynthConfig::kBumpConcepts));
      for (int dim = 0; dim < 4; ++dim) {
        const double q = 0.5 * (1.0 + cfg.image_signal[std::size_t(dim)]);
        const int own = user.label.bits[std::size_t(dim)];
        for (int b = 0; b < SynthConfig::kBumpConcepts; ++b) {
          const int pole = rng.bernoulli(q) ? own : 1 - own;
          const int concept_idx = dim * 2 * SynthConfig::kBumpConcepts +
                                  pole * SynthConfig::kBumpConcepts +
                                  int(rng.uniform_index(SynthConfig::kBumpConcepts));
          vec[concept_idx] += unit;
        }
      }
      vec /= vec.sum();
      result.store.add(imbuf, std::move(vec));
      user.image_ids.push_back(imbuf);
    }

    result.corpus.users.push_back(std::move(user));
  }

  const int tokens_total = cfg.posts_per_user * cfg.tokens_per_post;
  for (int dim = 0; dim < 4; ++dim) {
    result.report.text_bayes[std::size_t(dim)] = detail::majority_accuracy(
        tokens_total, kSynthSlotRate, 0.5 * (1.0 + cfg.text_signal[std::size_t(dim)]));
    // image units: marginalize over the image-count range
    double acc = 0.0;
    for (int n_img = cfg.images_min; n_img <= cfg.images_max; ++n_img)
      acc += detail::majority_accuracy(n_img * SynthConfig::kBumpConcepts, 1.0,
                                       0.5 * (1.0 + cfg.image_signal[std::size_t(dim)]));
    result.report.image_bayes[std::size_t(dim)] =
        acc / double(cfg.images_max - cfg.images_min + 1);
  }
  return result;
}

}  // namespace pers
