#pragma once

// Truncated SVD via randomized subspace iteration, and PCA built on top of
// it. Fits are deterministic for a fixed seed: the Gaussian test matrix is
// drawn from an explicit Box-Muller stream and all reductions have a fixed
// order (Eigen runs single-threaded here).

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "pers/bytes.hpp"
#include "pers/errors.hpp"
#include "pers/rng.hpp"

namespace pers {

enum class ProjectorKind : int { svd = 0, pca = 1 };

struct Projector {
  ProjectorKind kind = ProjectorKind::svd;
  Eigen::MatrixXd components;  // k x d, rows orthonormal
  Eigen::VectorXd spectrum;    // singular values (svd) or eigenvalues (pca), non-increasing
  Eigen::VectorXd mean;        // length d for pca, empty for svd

  Eigen::Index k() const { return components.rows(); }
  Eigen::Index d() const { return components.cols(); }

  std::string serialize() const {
    nlohmann::json header;
    header["format"] = "pers.projector";
    header["version"] = 1;
    header["kind"] = kind == ProjectorKind::svd ? "svd" : "pca";
    header["k"] = k();
    header["d"] = d();
    header["has_mean"] = mean.size() > 0;
    std::string out = header.dump();
    out += '\n';
    for (Eigen::Index r = 0; r < components.rows(); ++r)
      for (Eigen::Index c = 0; c < components.cols(); ++c) append_f64(out, components(r, c));
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) append_f64(out, spectrum[i]);
    for (Eigen::Index i = 0; i < mean.size(); ++i) append_f64(out, mean[i]);
    return out;
  }

  static Projector deserialize(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) throw IoError("projector payload: missing header line");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("projector payload: bad header: ") + e.what());
    }
    if (header.value("format", "") != "pers.projector" || header.value("version", 0) != 1)
      throw IoError("projector payload: unknown format/version");
    Projector p;
    p.kind = header.at("kind").get<std::string>() == "pca" ? ProjectorKind::pca : ProjectorKind::svd;
    const Eigen::Index k = header.at("k").get<Eigen::Index>();
    const Eigen::Index d = header.at("d").get<Eigen::Index>();
    const bool has_mean = header.at("has_mean").get<bool>();
    std::size_t pos = newline + 1;
    p.components.resize(k, d);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < d; ++c) p.components(r, c) = read_f64(bytes, pos);
    p.spectrum.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) p.spectrum[i] = read_f64(bytes, pos);
    if (has_mean) {
      p.mean.resize(d);
      for (Eigen::Index i = 0; i < d; ++i) p.mean[i] = read_f64(bytes, pos);
    }
    return p;
  }
};

namespace detail {

inline void check_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NonFiniteInput("matrix contains NaN or infinity");
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

inline Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), std::min(m.rows(), m.cols()));
}

// Largest-magnitude entry of each component made positive, for reproducible
// artifacts regardless of the iteration's sign indeterminacy.
inline void fix_component_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
      const double a = std::abs(components(r, c));
      if (a > best) {
        best = a;
        arg = c;
      }
    }
    if (components(r, arg) < 0.0) components.row(r) = -components.row(r);
  }
}

}  // namespace detail

inline constexpr int kSvdOversample = 10;
inline constexpr int kSvdPowerIterations = 7;

inline Projector truncated_svd(const Eigen::MatrixXd& matrix, Eigen::Index k, std::uint64_t seed) {
  const Eigen::Index n = matrix.rows(), d = matrix.cols();
  if (k < 1 || k > std::min(n, d))
    throw DimensionError("svd rank " + std::to_string(k) + " out of range for " +
                         std::to_string(n) + "x" + std::to_string(d));
  detail::check_finite(matrix);

  const Eigen::Index s = std::min<Eigen::Index>(k + kSvdOversample, std::min(n, d));
  Eigen::MatrixXd omega = detail::gaussian_matrix(d, s, derive_seed(seed, "svd-test-matrix"));
  Eigen::MatrixXd q = detail::thin_q(matrix * omega);
  for (int it = 0; it < kSvdPowerIterations; ++it) {
    const Eigen::MatrixXd z = detail::thin_q(matrix.transpose() * q);
    q = detail::thin_q(matrix * z);
  }

  // B = Q^T A is s x d; the right singular vectors of B approximate those of A.
  const Eigen::MatrixXd b = q.transpose() * matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose(), Eigen::ComputeThinU);

  Projector p;
  p.kind = ProjectorKind::svd;
  p.components = svd.matrixU().leftCols(k).transpose();
  p.spectrum = svd.singularValues().head(k).cwiseMax(0.0);
  detail::fix_component_signs(p.components);
  return p;
}

inline Projector pca_fit(const Eigen::MatrixXd& matrix, Eigen::Index k, std::uint64_t seed) {
  const Eigen::Index n = matrix.rows(), d = matrix.cols();
  if (n < 2) throw DimensionError("pca needs at least 2 rows");
  if (k < 1 || k > std::min(n, d))
    throw DimensionError("pca rank " + std::to_string(k) + " out of range for " +
                         std::to_string(n) + "x" + std::to_string(d));
  detail::check_finite(matrix);

  const Eigen::VectorXd mean = matrix.colwise().mean();
  const Eigen::MatrixXd centered = matrix.rowwise() - mean.transpose();
  Projector p = truncated_svd(centered, k, seed);
  p.kind = ProjectorKind::pca;
  p.mean = mean;
  p.spectrum = (p.spectrum.array().square() / double(n - 1)).matrix().cwiseMax(0.0);
  return p;
}

inline Eigen::MatrixXd project(const Projector& projector, const Eigen::MatrixXd& matrix) {
  if (matrix.cols() != projector.d())
    throw DimensionError("projection expects " + std::to_string(projector.d()) + " columns, got " +
                         std::to_string(matrix.cols()));
  if (projector.kind == ProjectorKind::pca)
    return (matrix.rowwise() - projector.mean.transpose()) * projector.components.transpose();
  return matrix * projector.components.transpose();
}

}  // namespace pers
