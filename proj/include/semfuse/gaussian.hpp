// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semfuse {

struct OpenSetConfig {
  int feature_dim = 512;
  double prior_beta = 1e-3;
  double confidence_threshold = 0.1;
  // lambda = max(W, lambda_floor), 2 nu = max(W, lambda_floor)
  double lambda_floor = 1e-3;
  double temperature = 0.01;

  void validate() const {
    if (feature_dim < 1) throw std::invalid_argument("semantics.feature_dim must be >= 1");
    if (!(prior_beta > 0.0)) throw std::invalid_argument("semantics.prior_beta must be positive");
    if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0)) {
      throw std::invalid_argument("semantics.confidence_threshold must be in (0, 1)");
    }
    if (!(lambda_floor > 0.0)) throw std::invalid_argument("semantics.lambda_floor must be positive");
    if (!(temperature > 0.0)) throw std::invalid_argument("semantics.temperature must be positive");
  }

  [[nodiscard]] double coupled_lambda(double weight) const { return std::max(weight, lambda_floor); }
};

/// Normal-inverse-gamma hyperparameters of one feature element.
struct NigParams {
  double m = 0.0;
  double lambda = 1.0;
  double nu = 1.0;
  double beta = 1.0;
};

/**
 * @brief Conjugate update of per-element NIG posteriors from a batch of
 * feature vectors.
 *
 * For every element i with batch mean zbar and n samples:
 *   m'    = (lambda m + n zbar) / (lambda + n)
 *   beta' = beta + 1/2 sum (z - zbar)^2 + lambda n / (lambda + n) (zbar - m)^2 / 2
 * lambda and nu are not stored; the caller derives them from the TSDF weight.
 * Rows with non-finite entries are dropped; returns how many were dropped.
 */
template <typename T, typename Row>
std::size_t absorb_features(std::span<T> mean, std::span<T> beta, double lambda,
                            std::span<const Row> batch) {
  if (mean.size() != beta.size()) {
    throw std::invalid_argument("mean and beta must have equal length");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("prior lambda must be positive");
  }
  const std::size_t dim = mean.size();
  thread_local std::vector<double> sum;
  thread_local std::vector<double> sq;
  thread_local std::vector<std::size_t> kept;
  sum.assign(dim, 0.0);
  sq.assign(dim, 0.0);
  kept.clear();

  std::size_t dropped = 0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& row = batch[r];
    if (row.size() != dim) {
      throw std::invalid_argument("feature dimension mismatch: expected " + std::to_string(dim) +
                                  ", got " + std::to_string(row.size()));
    }
    const bool finite = std::all_of(row.begin(), row.end(), [](auto x) { return std::isfinite(x); });
    if (!finite) {
      ++dropped;
      continue;
    }
    kept.push_back(r);
    for (std::size_t i = 0; i < dim; ++i) sum[i] += static_cast<double>(row[i]);
  }
  const auto n = static_cast<double>(kept.size());
  if (kept.empty()) {
    return dropped;
  }
  for (std::size_t i = 0; i < dim; ++i) sum[i] /= n;  // now the batch mean
  for (std::size_t r : kept) {
    const auto& row = batch[r];
    for (std::size_t i = 0; i < dim; ++i) {
      const double dev = static_cast<double>(row[i]) - sum[i];
      sq[i] += dev * dev;
    }
  }
  const double lambda_new = lambda + n;
  const double shrink = lambda * n / lambda_new;
  for (std::size_t i = 0; i < dim; ++i) {
    const double m = static_cast<double>(mean[i]);
    const double shift = sum[i] - m;
    mean[i] = static_cast<T>((lambda * m + n * sum[i]) / lambda_new);
    beta[i] = static_cast<T>(static_cast<double>(beta[i]) + 0.5 * sq[i] + 0.5 * shrink * shift * shift);
  }
  return dropped;
}

template <typename T, typename Row>
std::size_t absorb_features(std::span<T> mean, std::span<T> beta, double lambda,
                            const std::vector<Row>& batch) {
  return absorb_features(mean, beta, lambda, std::span<const Row>(batch));
}

/// Student-t posterior predictive of one feature element.
struct StudentT {
  double mean = 0.0;
  double dof = 0.0;
  double scale2 = 0.0;
  std::optional<double> variance;  // defined only for dof > 2
};

/// Per-element predictive with lambda = W and nu = W / 2:
/// dof = W, scale^2 = beta (lambda + 1) / (lambda nu).
template <typename T>
[[nodiscard]] std::vector<StudentT> predictive_params(std::span<const T> mean, std::span<const T> beta,
                                                      double weight) {
  if (!(weight > 0.0)) {
    throw std::domain_error("predictive undefined for a voxel with no observations");
  }
  if (mean.size() != beta.size()) {
    throw std::invalid_argument("mean and beta must have equal length");
  }
  const double lambda = weight;
  const double nu = weight / 2.0;
  std::vector<StudentT> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    StudentT& t = out[i];
    t.mean = static_cast<double>(mean[i]);
    t.dof = 2.0 * nu;
    t.scale2 = static_cast<double>(beta[i]) * (lambda + 1.0) / (lambda * nu);
    if (t.dof > 2.0) {
      t.variance = t.dof / (t.dof - 2.0) * t.scale2;
    }
  }
  return out;
}

/// log[ N(mu | m, sigma2 / lambda) * InvGamma(sigma2 | nu, beta) ].
[[nodiscard]] inline double nig_log_pdf(double mu, double sigma2, const NigParams& p) {
  if (!(sigma2 > 0.0)) throw std::domain_error("sigma2 must be positive");
  if (!(p.lambda > 0.0 && p.nu > 0.0 && p.beta > 0.0)) {
    throw std::domain_error("NIG parameters lambda, nu, beta must be positive");
  }
  const double var_mu = sigma2 / p.lambda;
  const double dev = mu - p.m;
  const double log_normal = -0.5 * std::log(2.0 * std::numbers::pi * var_mu) - dev * dev / (2.0 * var_mu);
  const double log_inv_gamma = p.nu * std::log(p.beta) - std::lgamma(p.nu) -
                               (p.nu + 1.0) * std::log(sigma2) - p.beta / sigma2;
  return log_normal + log_inv_gamma;
}

/// Named label embeddings queried against voxel feature means.
struct EmbeddingSet {
  std::uint32_t dim = 0;
  std::vector<std::string> names;
  std::vector<float> values;  // names.size() x dim, row-major

  [[nodiscard]] std::size_t size() const { return names.size(); }
  [[nodiscard]] std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  void add(std::string name, std::span<const float> v) {
    if (v.size() != dim) throw std::invalid_argument("embedding dimension mismatch");
    names.push_back(std::move(name));
    values.insert(values.end(), v.begin(), v.end());
  }
  [[nodiscard]] std::optional<std::size_t> index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }

  /// Standard basis e_1..e_k named after the given classes.
  [[nodiscard]] static EmbeddingSet standard_basis(const std::vector<std::string>& class_names) {
    EmbeddingSet set;
    set.dim = static_cast<std::uint32_t>(class_names.size());
    std::vector<float> e(set.dim, 0.0f);
    for (std::size_t c = 0; c < class_names.size(); ++c) {
      std::fill(e.begin(), e.end(), 0.0f);
      e[c] = 1.0f;
      set.add(class_names[c], e);
    }
    return set;
  }
};

template <typename T, typename U>
[[nodiscard]] double cosine_similarity(std::span<const T> a, std::span<const U> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine similarity of unequal lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = static_cast<double>(a[i]);
    const auto y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw std::domain_error("cosine similarity of a zero vector");
  return dot / std::sqrt(na * nb);
}

struct ClassQuery {
  std::vector<double> similarity;
  std::vector<double> probability;
  std::size_t best = 0;  // 0-based index into the embedding set
  bool accepted = false;
};

/// Cosine similarity to each label, softmax(s / temperature), accepted when
/// the top probability reaches the confidence threshold.
template <typename T>
[[nodiscard]] ClassQuery query_classes(std::span<const T> mean, double weight, const EmbeddingSet& labels,
                                       const OpenSetConfig& cfg) {
  if (labels.size() == 0) throw std::invalid_argument("query needs at least one label embedding");
  if (labels.dim != mean.size()) {
    throw std::invalid_argument("label embedding dimension " + std::to_string(labels.dim) +
                                " does not match feature dimension " + std::to_string(mean.size()));
  }
  if (!(weight > 0.0)) throw std::domain_error("query on an unobserved voxel");
  const bool zero = std::all_of(mean.begin(), mean.end(), [](T x) { return x == T{0}; });
  if (zero) throw std::domain_error("zero-norm feature mean: voxel carries no semantic evidence");

  ClassQuery q;
  q.similarity.resize(labels.size());
  q.probability.resize(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    q.similarity[c] = cosine_similarity(mean, labels.row(c));
  }
  const double top = *std::max_element(q.similarity.begin(), q.similarity.end());
  double total = 0.0;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    q.probability[c] = std::exp((q.similarity[c] - top) / cfg.temperature);
    total += q.probability[c];
  }
  for (double& p : q.probability) p /= total;
  q.best = static_cast<std::size_t>(std::max_element(q.probability.begin(), q.probability.end()) -
                                    q.probability.begin());
  q.accepted = q.probability[q.best] >= cfg.confidence_threshold;
  return q;
}

}  // namespace semfuse
