#pragma once

// Precomputed per-image concept vectors, keyed by image id. Loaded from a CSV
// with header "image_id,c0,...,c999" (or a directory of such shards).

#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pers/errors.hpp"

namespace pers {

class ImageConceptStore {
 public:
  void add(const std::string& image_id, Eigen::VectorXd vec) {
    if (vec.size() == 0) throw SchemaError("image vector for '" + image_id + "' is empty");
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_)
      throw SchemaError("image vector for '" + image_id + "' has dimension " +
                        std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      if (!std::isfinite(vec[i]) || vec[i] < 0.0)
        throw SchemaError("image vector for '" + image_id + "' has a negative or non-finite entry");
    }
    if (!index_.emplace(image_id, vectors_.size()).second)
      throw SchemaError("duplicate image_id '" + image_id + "'");
    ids_.push_back(image_id);
    vectors_.push_back(std::move(vec));
  }

  const Eigen::VectorXd* find(const std::string& image_id) const {
    const auto it = index_.find(image_id);
    return it == index_.end() ? nullptr : &vectors_[it->second];
  }

  bool contains(const std::string& image_id) const { return index_.count(image_id) != 0; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  Eigen::Index dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }

  static ImageConceptStore load(const std::filesystem::path& path) {
    ImageConceptStore store;
    if (std::filesystem::is_directory(path)) {
      std::vector<std::filesystem::path> shards;
      for (const auto& entry : std::filesystem::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") shards.push_back(entry.path());
      std::sort(shards.begin(), shards.end());
      if (shards.empty()) throw IoError("no .csv shards under " + path.string());
      for (const auto& shard : shards) store.load_csv(shard);
    } else {
      store.load_csv(path);
    }
    return store;
  }

  void save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "image_id";
    for (Eigen::Index c = 0; c < dim_; ++c) out << ",c" << c;
    out << "\n";
    char buf[32];
    for (std::size_t r = 0; r < vectors_.size(); ++r) {
      out << ids_[r];
      const Eigen::VectorXd& v = vectors_[r];
      for (Eigen::Index c = 0; c < dim_; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", v[c]);
        out << ',' << buf;
      }
      out << "\n";
    }
    if (!out) throw IoError("short write to " + path.string());
  }

 private:
  void load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open image store " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("image_id,", 0) != 0)
      throw SchemaError(path.string() + ": header must start with 'image_id,'");
    const Eigen::Index cols = Eigen::Index(std::count(line.begin(), line.end(), ',')) ;
    if (cols < 1) throw SchemaError(path.string() + ": no concept columns");
    if (dim_ != 0 && cols != dim_)
      throw SchemaError(path.string() + ": shard dimension mismatch");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto first_comma = line.find(',');
      if (first_comma == std::string::npos)
        throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected csv row");
      Eigen::VectorXd vec(cols);
      std::size_t pos = first_comma + 1;
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::size_t end = line.find(',', pos);
        const bool last = (c + 1 == cols);
        if (!last && end == std::string::npos)
          throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": too few columns");
        if (last && end != std::string::npos)
          throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": too many columns");
        if (end == std::string::npos) end = line.size();
        double value = 0.0;
        const auto res = std::from_chars(line.data() + pos, line.data() + end, value);
        if (res.ec != std::errc() || res.ptr != line.data() + end)
          throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": bad number");
        vec[c] = value;
        pos = end + 1;
      }
      add(line.substr(0, first_comma), std::move(vec));
    }
  }

  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> ids_;
  std::vector<Eigen::VectorXd> vectors_;
  Eigen::Index dim_ = 0;
};

}  // namespace pers
