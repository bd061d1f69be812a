#pragma once

// Evaluation metrics: per-class-macro F1 and the Matthews correlation
// coefficient, with fixed zero-denominator conventions (component -> 0).

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pers/errors.hpp"
#include "pers/mbti.hpp"

namespace pers {

struct ConfusionCounts {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion_counts(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw LengthMismatch("y_true has " + std::to_string(y_true.size()) + " entries, y_pred " +
                         std::to_string(y_pred.size()));
  if (y_true.empty()) throw EmptyInput("no samples to evaluate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i]) y_pred[i] ? ++c.tp : ++c.fn;
    else y_pred[i] ? ++c.fp : ++c.tn;
  }
  return c;
}

// Macro F1 over the two classes: precision/recall components with zero
// denominators contribute 0.
inline double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  const ConfusionCounts c = confusion_counts(y_true, y_pred);
  auto f1_of = [](std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    const double p = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
    const double r = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  };
  const double f1_pos = f1_of(c.tp, c.fp, c.fn);
  const double f1_neg = f1_of(c.tn, c.fn, c.fp);  // class 0 treated as positive
  return 0.5 * (f1_pos + f1_neg);
}

// Matthews correlation; 0 when any denominator factor is 0.
inline double mcc(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  const ConfusionCounts c = confusion_counts(y_true, y_pred);
  const std::int64_t a = c.tp + c.fp, b = c.fn + c.tn, d = c.fp + c.tn, e = c.tp + c.fn;
  if (a == 0 || b == 0 || d == 0 || e == 0) return 0.0;
  const double num = double(c.tp * c.tn - c.fp * c.fn);
  return num / (std::sqrt(double(a)) * std::sqrt(double(b)) * std::sqrt(double(d)) * std::sqrt(double(e)));
}

// ---------------------------------------------------------------------------
// Report assembly

struct DimensionEval {
  double f1 = 0.0;
  double mcor = 0.0;
  ConfusionCounts confusion;
  std::int64_t n = 0;
};

inline DimensionEval evaluate_binary(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  DimensionEval e;
  e.confusion = confusion_counts(y_true, y_pred);
  e.f1 = f1_macro(y_true, y_pred);
  e.mcor = mcc(y_true, y_pred);
  e.n = std::int64_t(y_true.size());
  return e;
}

struct EvalRow {
  std::string model;  // e.g. "PERS", "gbt/text"
  std::map<std::string, DimensionEval> dims;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::string corpus_tag;
  std::string views;
  std::string fingerprint;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["corpus"] = corpus_tag;
    j["views"] = views;
    j["fingerprint"] = fingerprint;
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json r;
      r["model"] = row.model;
      nlohmann::json dims = nlohmann::json::object();
      for (const auto& [name, e] : row.dims) {
        dims[name] = {{"f1_macro", e.f1},
                      {"mcor", e.mcor},
                      {"n", e.n},
                      {"confusion", {{"tp", e.confusion.tp},
                                     {"tn", e.confusion.tn},
                                     {"fp", e.confusion.fp},
                                     {"fn", e.confusion.fn}}}};
      }
      r["dimensions"] = dims;
      rows_json.push_back(r);
    }
    j["rows"] = rows_json;
    return j;
  }

  static EvalReport from_json(const nlohmann::json& j) {
    EvalReport rep;
    rep.corpus_tag = j.at("corpus").get<std::string>();
    rep.views = j.at("views").get<std::string>();
    rep.fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.model = r.at("model").get<std::string>();
      for (const auto& [name, d] : r.at("dimensions").items()) {
        DimensionEval e;
        e.f1 = d.at("f1_macro").get<double>();
        e.mcor = d.at("mcor").get<double>();
        e.n = d.at("n").get<std::int64_t>();
        e.confusion.tp = d.at("confusion").at("tp").get<std::int64_t>();
        e.confusion.tn = d.at("confusion").at("tn").get<std::int64_t>();
        e.confusion.fp = d.at("confusion").at("fp").get<std::int64_t>();
        e.confusion.fn = d.at("confusion").at("fn").get<std::int64_t>();
        row.dims[name] = e;
      }
      rep.rows.push_back(std::move(row));
    }
    return rep;
  }

  // "F1/Mcor" cells at two decimals, one row per model, one column per
  // dimension.
  std::string render_text() const {
    std::ostringstream os;
    os << std::left << std::setw(24) << "model";
    for (Dimension d : kAllDimensions) os << std::right << std::setw(12) << dimension_name(d);
    os << "\n";
    for (const auto& row : rows) {
      os << std::left << std::setw(24) << row.model;
      for (Dimension d : kAllDimensions) {
        const auto it = row.dims.find(dimension_name(d));
        if (it == row.dims.end()) {
          os << std::right << std::setw(12) << "-";
        } else {
          std::ostringstream cell;
          cell << std::fixed << std::setprecision(2) << it->second.f1 << "/" << it->second.mcor;
          os << std::right << std::setw(12) << cell.str();
        }
      }
      os << "\n";
    }
    if (!corpus_tag.empty()) os << "corpus: " << corpus_tag << "\n";
    if (!views.empty()) os << "views: " << views << "\n";
    if (!fingerprint.empty()) os << "fingerprint: " << fingerprint << "\n";
    return os.str();
  }
};

}  // namespace pers
