// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/labels.hpp"

namespace semfuse {

enum class UpdateRule : std::uint8_t {
  bayesian,
  // non-Bayesian ablation: the latest observation overwrites the voxel
  last_measurement,
};

[[nodiscard]] inline std::string to_string(UpdateRule r) {
  return r == UpdateRule::bayesian ? "bayesian" : "last_measurement";
}

[[nodiscard]] inline UpdateRule parse_update_rule(const std::string& s) {
  if (s == "bayesian") return UpdateRule::bayesian;
  if (s == "last_measurement") return UpdateRule::last_measurement;
  throw std::invalid_argument("unknown update rule '" + s + "'");
}

struct ClosedSetConfig {
  int num_classes = 2;
  double prior_alpha = 0.001;
  UpdateRule update_rule = UpdateRule::bayesian;
  // absorb per-point probability vectors as fractional counts
  bool soft_counts = false;

  void validate() const {
    if (num_classes < 2) throw std::invalid_argument("semantics.num_classes must be >= 2");
    if (num_classes > 65535) throw std::invalid_argument("semantics.num_classes too large");
    if (!(prior_alpha > 0.0)) throw std::invalid_argument("semantics.prior_alpha must be positive");
  }
};

// Voxels store evidence counts n; the concentration is alpha = prior_alpha + n.
// Integer counts keep every absorption order bit-identical.

/// Adds `count` observations of class z (1-based) to a concentration or
/// evidence vector.
template <typename T>
void absorb(std::span<T> alpha, ClassId z, double count = 1.0) {
  if (z < 1 || z > alpha.size()) {
    throw std::out_of_range("class id " + std::to_string(z) + " outside 1.." +
                            std::to_string(alpha.size()));
  }
  if (!(count >= 0.0)) {
    throw std::invalid_argument("observation count must be non-negative");
  }
  alpha[z - 1] += static_cast<T>(count);
}

/// Fractional absorption of a per-class probability vector.
template <typename T, typename U>
void absorb_soft(std::span<T> alpha, std::span<const U> probabilities) {
  if (probabilities.size() != alpha.size()) {
    throw std::invalid_argument("probability vector length does not match class count");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(probabilities[i] >= 0)) throw std::invalid_argument("negative class probability");
    alpha[i] += static_cast<T>(probabilities[i]);
  }
}

/// Replaces the evidence with a single observation of class z.
template <typename T>
void overwrite_last(std::span<T> evidence, ClassId z) {
  if (z < 1 || z > evidence.size()) {
    throw std::out_of_range("class id " + std::to_string(z) + " out of range");
  }
  std::fill(evidence.begin(), evidence.end(), T{0});
  evidence[z - 1] = T{1};
}

/// Posterior predictive p_i = alpha_i / sum_j alpha_j, where
/// alpha = prior_alpha + evidence.
template <typename T>
[[nodiscard]] std::vector<double> predictive(std::span<const T> evidence, double prior_alpha = 0.0) {
  std::vector<double> p(evidence.size());
  double total = 0.0;
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    p[i] = prior_alpha + static_cast<double>(evidence[i]);
    total += p[i];
  }
  if (!(total > 0.0)) {
    throw std::domain_error("Dirichlet concentration must have a positive sum");
  }
  for (double& x : p) x /= total;
  return p;
}

template <typename T>
[[nodiscard]] std::vector<double> predictive(const std::vector<T>& alpha, double prior_alpha = 0.0) {
  return predictive(std::span<const T>(alpha), prior_alpha);
}

/// Most probable class (1-based); ties resolve to the lowest id. A symmetric
/// prior never changes the argmax, so evidence vectors work directly.
template <typename T>
[[nodiscard]] ClassId argmax_class(std::span<const T> alpha) {
  if (alpha.empty()) throw std::invalid_argument("empty concentration vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < alpha.size(); ++i) {
    if (alpha[i] > alpha[best]) best = i;
  }
  return static_cast<ClassId>(best + 1);
}

template <typename T>
[[nodiscard]] ClassId argmax_class(const std::vector<T>& alpha) {
  return argmax_class(std::span<const T>(alpha));
}

/// log Dir(theta | alpha) = log G(sum a) - sum log G(a_j) + sum (a_j - 1) log theta_j.
/// theta must lie on the open simplex (sum within 1e-9 of one).
[[nodiscard]] inline double dirichlet_log_pdf(std::span<const double> theta, std::span<const double> alpha) {
  if (theta.size() != alpha.size() || theta.size() < 2) {
    throw std::invalid_argument("theta and alpha must have the same length >= 2");
  }
  double sum_theta = 0.0;
  for (double t : theta) {
    if (!(t > 0.0)) throw std::domain_error("theta must lie on the open simplex");
    sum_theta += t;
  }
  if (std::abs(sum_theta - 1.0) > 1e-9) {
    throw std::domain_error("theta does not sum to one");
  }
  double sum_alpha = 0.0;
  double log_density = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (!(alpha[j] > 0.0)) throw std::domain_error("alpha must be positive");
    sum_alpha += alpha[j];
    log_density += (alpha[j] - 1.0) * std::log(theta[j]) - std::lgamma(alpha[j]);
  }
  return log_density + std::lgamma(sum_alpha);
}

}  // namespace semfuse
