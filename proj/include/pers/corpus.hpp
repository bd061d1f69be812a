#pragma once

// Corpus data model: user records with posts, image references and MBTI
// labels, plus ingestion, filtering, stratified splitting and statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pers/errors.hpp"
#include "pers/image_store.hpp"
#include "pers/mbti.hpp"
#include "pers/rng.hpp"

namespace pers {

enum class Source : int { twitter = 0, facebook = 1, percafe = 2, synthetic = 3 };

inline constexpr std::array<Source, 4> kAllSources{Source::twitter, Source::facebook,
                                                   Source::percafe, Source::synthetic};

inline const char* source_name(Source s) {
  switch (s) {
    case Source::twitter: return "twitter";
    case Source::facebook: return "facebook";
    case Source::percafe: return "percafe";
    case Source::synthetic: return "synthetic";
  }
  return "?";
}

inline Source source_from_name(const std::string& name) {
  for (Source s : kAllSources)
    if (name == source_name(s)) return s;
  throw SchemaError("unknown source '" + name + "'");
}

struct UserRecord {
  std::string user_id;
  Source source = Source::synthetic;
  std::vector<std::string> posts;
  std::vector<std::string> image_ids;
  MbtiLabel label;
};

struct Corpus {
  std::vector<UserRecord> users;
  std::optional<std::filesystem::path> image_store_path;

  std::size_t size() const { return users.size(); }
};

// ---------------------------------------------------------------------------
// Ingestion

inline UserRecord parse_user_json(const nlohmann::json& j, std::size_t lineno) {
  auto fail = [lineno](const std::string& msg) -> SchemaError {
    return SchemaError("line " + std::to_string(lineno) + ": " + msg);
  };
  if (!j.is_object()) throw fail("record is not a JSON object");
  UserRecord user;
  if (!j.contains("user_id") || !j["user_id"].is_string() || j["user_id"].get<std::string>().empty())
    throw fail("missing or empty 'user_id'");
  user.user_id = j["user_id"].get<std::string>();
  if (!j.contains("source") || !j["source"].is_string()) throw fail("missing 'source'");
  try {
    user.source = source_from_name(j["source"].get<std::string>());
  } catch (const SchemaError& e) {
    throw fail(e.what());
  }
  if (!j.contains("label") || !j["label"].is_string()) throw fail("missing 'label'");
  try {
    user.label = parse_mbti_code(j["label"].get<std::string>());
  } catch (const InvalidCode& e) {
    throw fail(e.what());
  }
  if (!j.contains("posts") || !j["posts"].is_array() || j["posts"].empty())
    throw fail("'posts' must be a non-empty array");
  for (const auto& p : j["posts"]) {
    if (!p.is_string()) throw fail("'posts' entries must be strings");
    user.posts.push_back(p.get<std::string>());
  }
  if (j.contains("image_ids")) {
    if (!j["image_ids"].is_array()) throw fail("'image_ids' must be an array");
    for (const auto& im : j["image_ids"]) {
      if (!im.is_string()) throw fail("'image_ids' entries must be strings");
      user.image_ids.push_back(im.get<std::string>());
    }
  }
  return user;
}

inline Corpus parse_users_jsonl(const std::filesystem::path& users_path) {
  std::ifstream in(users_path);
  if (!in) throw IoError("cannot open corpus " + users_path.string());
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
    }
    UserRecord user = parse_user_json(j, lineno);
    if (!seen.insert(user.user_id).second)
      throw SchemaError("line " + std::to_string(lineno) + ": duplicate user_id '" + user.user_id + "'");
    corpus.users.push_back(std::move(user));
  }
  return corpus;
}

inline void validate_image_refs(const Corpus& corpus, const ImageConceptStore& store) {
  for (const auto& user : corpus.users)
    for (const auto& id : user.image_ids)
      if (!store.contains(id))
        throw DanglingImageRef("user '" + user.user_id + "' references unknown image '" + id + "'");
}

inline Corpus ingest_corpus(const std::filesystem::path& users_path,
                            const std::optional<std::filesystem::path>& images_path = {}) {
  Corpus corpus = parse_users_jsonl(users_path);
  if (images_path) {
    const ImageConceptStore store = ImageConceptStore::load(*images_path);
    validate_image_refs(corpus, store);
    corpus.image_store_path = *images_path;
  }
  return corpus;
}

inline void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& user : corpus.users) {
    nlohmann::json j;
    j["user_id"] = user.user_id;
    j["source"] = source_name(user.source);
    j["label"] = user.label.format();
    j["posts"] = user.posts;
    j["image_ids"] = user.image_ids;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Filtering

inline Corpus filter_min_posts(const Corpus& corpus, int min_posts = 10) {
  if (min_posts < 1) throw ConfigError("min_posts must be >= 1");
  Corpus out;
  out.image_store_path = corpus.image_store_path;
  for (const auto& user : corpus.users)
    if (int(user.posts.size()) >= min_posts) out.users.push_back(user);
  return out;
}

// ---------------------------------------------------------------------------
// Stratified split

struct SplitAssignment {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double ratio = 0.85;

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"train_ids", train_ids}, {"test_ids", test_ids}, {"seed", seed}, {"ratio", ratio}};
  }

  static SplitAssignment from_json(const nlohmann::json& j) {
    SplitAssignment s;
    s.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    s.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratio = j.at("ratio").get<double>();
    return s;
  }
};

// Splits per 16-type stratum. Per-stratum train counts start from floors of
// ratio*stratum_size; the leftover up to round(ratio*n) is handed out by
// largest fractional remainder (ties: larger stratum, then type order).
// Singleton strata always land in train.
inline SplitAssignment stratified_split(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (corpus.users.empty()) throw EmptyInput("cannot split an empty corpus");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("split ratio must be in (0, 1]");

  const int n = int(corpus.users.size());
  std::array<std::vector<int>, 16> strata;
  for (int i = 0; i < n; ++i)
    strata[std::size_t(corpus.users[std::size_t(i)].label.type_index())].push_back(i);

  const long global_target = std::lround(ratio * n);
  std::array<int, 16> take{};
  long assigned = 0;
  struct Candidate {
    double remainder;
    int stratum_size;
    int type_index;
  };
  std::vector<Candidate> candidates;
  for (int t = 0; t < 16; ++t) {
    const int size = int(strata[std::size_t(t)].size());
    if (size == 0) continue;
    if (size == 1) {
      take[std::size_t(t)] = 1;
      assigned += 1;
      continue;
    }
    const double ideal = ratio * size;
    take[std::size_t(t)] = int(std::floor(ideal));
    assigned += take[std::size_t(t)];
    candidates.push_back({ideal - std::floor(ideal), size, t});
  }

  long deficit = global_target - assigned;
  if (deficit > 0) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.remainder != b.remainder) return a.remainder > b.remainder;
      if (a.stratum_size != b.stratum_size) return a.stratum_size > b.stratum_size;
      return a.type_index < b.type_index;
    });
    while (deficit > 0) {
      bool progressed = false;
      for (const auto& c : candidates) {
        if (deficit == 0) break;
        int& t = take[std::size_t(c.type_index)];
        if (t < c.stratum_size) {
          ++t;
          --deficit;
          progressed = true;
        }
      }
      if (!progressed) break;  // every non-singleton stratum is saturated
    }
  } else if (deficit < 0) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.remainder != b.remainder) return a.remainder < b.remainder;
      if (a.stratum_size != b.stratum_size) return a.stratum_size < b.stratum_size;
      return a.type_index < b.type_index;
    });
    while (deficit < 0) {
      bool progressed = false;
      for (const auto& c : candidates) {
        if (deficit == 0) break;
        int& t = take[std::size_t(c.type_index)];
        if (t > 0) {
          --t;
          ++deficit;
          progressed = true;
        }
      }
      if (!progressed) break;  // only forced singletons remain
    }
  }

  std::vector<char> in_train(std::size_t(n), 0);
  for (int t = 0; t < 16; ++t) {
    auto& members = strata[std::size_t(t)];
    if (members.empty()) continue;
    Rng rng(derive_seed(seed, "stratified-split", {std::uint64_t(t)}));
    rng.shuffle(members);
    for (int i = 0; i < take[std::size_t(t)]; ++i) in_train[std::size_t(members[std::size_t(i)])] = 1;
  }

  SplitAssignment split;
  split.seed = seed;
  split.ratio = ratio;
  for (int i = 0; i < n; ++i) {
    const auto& id = corpus.users[std::size_t(i)].user_id;
    if (in_train[std::size_t(i)]) split.train_ids.push_back(id);
    else split.test_ids.push_back(id);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Statistics

struct SourceCounts {
  std::int64_t users = 0;
  std::int64_t posts = 0;
  std::int64_t images = 0;
};

struct StatsReport {
  std::int64_t total_users = 0;
  std::int64_t total_posts = 0;
  std::int64_t total_images = 0;
  std::map<std::string, SourceCounts> per_source;
  // pole_counts[d][b]: users whose dimension d has pole bit b.
  std::array<std::array<std::int64_t, 2>, 4> pole_counts{};
  std::array<std::int64_t, 16> type_histogram{};

  bool defined() const { return total_users > 0; }

  double pole_pct(Dimension d, int bit) const {
    return 100.0 * double(pole_counts[std::size_t(int(d))][std::size_t(bit)]) / double(total_users);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["total_users"] = total_users;
    j["total_posts"] = total_posts;
    j["total_images"] = total_images;
    nlohmann::json sources = nlohmann::json::object();
    for (const auto& [name, counts] : per_source)
      sources[name] = {{"users", counts.users}, {"posts", counts.posts}, {"images", counts.images}};
    j["per_source"] = sources;
    nlohmann::json dims = nlohmann::json::object();
    for (Dimension d : kAllDimensions) {
      nlohmann::json dim = nlohmann::json::object();
      for (int bit = 0; bit < 2; ++bit) {
        const char letter = kPoleLetters[std::size_t(int(d))][std::size_t(bit)];
        nlohmann::json pole;
        pole["count"] = pole_counts[std::size_t(int(d))][std::size_t(bit)];
        if (defined()) pole["pct"] = pole_pct(d, bit);
        else pole["pct"] = nullptr;
        dim[std::string(1, letter)] = pole;
      }
      dims[dimension_name(d)] = dim;
    }
    j["dimensions"] = dims;
    nlohmann::json hist = nlohmann::json::object();
    for (int t = 0; t < 16; ++t) hist[type_code_for_index(t)] = type_histogram[std::size_t(t)];
    j["type_histogram"] = hist;
    return j;
  }

  std::string render_text() const {
    std::ostringstream os;
    os << std::left << std::setw(10) << "";
    for (Source s : kAllSources) os << std::right << std::setw(11) << source_name(s);
    os << std::right << std::setw(11) << "total" << "\n";
    auto row = [&](const char* name, auto pick, std::int64_t total) {
      os << std::left << std::setw(10) << name;
      for (Source s : kAllSources) {
        const auto it = per_source.find(source_name(s));
        os << std::right << std::setw(11) << (it == per_source.end() ? 0 : pick(it->second));
      }
      os << std::right << std::setw(11) << total << "\n";
    };
    row("users", [](const SourceCounts& c) { return c.users; }, total_users);
    row("posts", [](const SourceCounts& c) { return c.posts; }, total_posts);
    row("images", [](const SourceCounts& c) { return c.images; }, total_images);
    os << "\n" << std::left << std::setw(10) << "dimension" << std::setw(6) << "pole"
       << std::right << std::setw(9) << "count" << std::setw(10) << "pct" << "\n";
    for (Dimension d : kAllDimensions) {
      for (int bit = 0; bit < 2; ++bit) {
        os << std::left << std::setw(10) << dimension_name(d) << std::setw(6)
           << kPoleLetters[std::size_t(int(d))][std::size_t(bit)] << std::right << std::setw(9)
           << pole_counts[std::size_t(int(d))][std::size_t(bit)];
        if (defined()) {
          std::ostringstream pct;
          pct << std::fixed << std::setprecision(2) << pole_pct(d, bit) << "%";
          os << std::setw(10) << pct.str();
        } else {
          os << std::setw(10) << "-";
        }
        os << "\n";
      }
    }
    os << "\n" << std::left << std::setw(6) << "type" << std::right << std::setw(9) << "count" << "\n";
    std::array<int, 16> order;
    for (int t = 0; t < 16; ++t) order[std::size_t(t)] = t;
    std::sort(order.begin(), order.end(), [this](int a, int b) {
      if (type_histogram[std::size_t(a)] != type_histogram[std::size_t(b)])
        return type_histogram[std::size_t(a)] > type_histogram[std::size_t(b)];
      return a < b;
    });
    for (int t : order)
      os << std::left << std::setw(6) << type_code_for_index(t) << std::right << std::setw(9)
         << type_histogram[std::size_t(t)] << "\n";
    return os.str();
  }
};

inline StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport r;
  for (const auto& user : corpus.users) {
    SourceCounts& sc = r.per_source[source_name(user.source)];
    sc.users += 1;
    sc.posts += std::int64_t(user.posts.size());
    sc.images += std::int64_t(user.image_ids.size());
    r.total_users += 1;
    r.total_posts += std::int64_t(user.posts.size());
    r.total_images += std::int64_t(user.image_ids.size());
    for (Dimension d : kAllDimensions)
      r.pole_counts[std::size_t(int(d))][std::size_t(user.label.bit(d))] += 1;
    r.type_histogram[std::size_t(user.label.type_index())] += 1;
  }
  return r;
}

}  // namespace pers
