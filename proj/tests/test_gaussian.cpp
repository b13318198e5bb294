// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semfuse/gaussian.hpp"

using semfuse::NigParams;
using semfuse::OpenSetConfig;

namespace {

using Batch = std::vector<std::vector<double>>;

}  // namespace

TEST(Gaussian, AbsorbHandEvaluation) {
  std::vector<double> m{0.0};
  std::vector<double> b{1.0};
  const Batch batch{{2.0}};
  EXPECT_EQ(semfuse::absorb_features<double>(m, b, 1.0, batch), 0u);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(b[0], 2.0);
}

TEST(Gaussian, EmptyBatchAndPriorMeanBatchLeaveVoxel) {
  std::vector<double> m{0.5, -1.0};
  std::vector<double> b{0.1, 0.2};
  EXPECT_EQ(semfuse::absorb_features<double>(m, b, 3.0, Batch{}), 0u);
  EXPECT_EQ(m, (std::vector<double>{0.5, -1.0}));
  const Batch copies(7, std::vector<double>{0.5, -1.0});
  (void)semfuse::absorb_features<double>(m, b, 3.0, copies);
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  EXPECT_DOUBLE_EQ(m[1], -1.0);
  EXPECT_DOUBLE_EQ(b[0], 0.1);
  EXPECT_DOUBLE_EQ(b[1], 0.2);
}

TEST(Gaussian, AbsorbRejectsDimensionMismatchAndDropsNonFinite) {
  std::vector<float> m(3, 0.0f);
  std::vector<float> b(3, 1.0f);
  EXPECT_THROW((void)semfuse::absorb_features<float>(m, b, 1.0, std::vector<std::vector<float>>{{1, 2}}),
               std::invalid_argument);
  const std::vector<std::vector<float>> batch{{1, 1, 1}, {NAN, 0, 0}, {3, 3, INFINITY}};
  EXPECT_EQ(semfuse::absorb_features<float>(m, b, 1.0, batch), 2u);
  EXPECT_FLOAT_EQ(m[0], 0.5f);
}

TEST(Gaussian, PredictiveParams) {
  const std::vector<double> m{1.0};
  const std::vector<double> b{2.0};
  const auto t = semfuse::predictive_params<double>(m, b, 4.0);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].mean, 1.0);
  EXPECT_DOUBLE_EQ(t[0].dof, 4.0);
  EXPECT_DOUBLE_EQ(t[0].scale2, 1.25);
  ASSERT_TRUE(t[0].variance.has_value());
  EXPECT_DOUBLE_EQ(*t[0].variance, 2.5);
  const auto low = semfuse::predictive_params<double>(m, b, 1.0);
  EXPECT_FALSE(low[0].variance.has_value());
  EXPECT_THROW((void)semfuse::predictive_params<double>(m, b, 0.0), std::domain_error);
}

TEST(Gaussian, RepeatedObservationConcentrates) {
  // weight advances by one per observation, as in fusion
  std::vector<double> m{0.0};
  std::vector<double> b{1e-3};
  const double z = 0.7;
  double weight = 0.0;
  double prev_scale = INFINITY;
  for (int n = 1; n <= 200; ++n) {
    (void)semfuse::absorb_features<double>(m, b, std::max(weight, 1e-3), Batch{{z}});
    weight += 1.0;
    const auto t = semfuse::predictive_params<double>(m, b, weight);
    if (n > 10) {
      EXPECT_LT(t[0].scale2, prev_scale);
      EXPECT_LT(std::abs(t[0].mean - z), 1e-3);
    }
    prev_scale = t[0].scale2;
  }
  EXPECT_NEAR(m[0], z, 1e-5);
  EXPECT_LT(prev_scale, 1e-4);
}

TEST(Gaussian, NigLogPdfSymmetryAndLimit) {
  const NigParams p{0.3, 2.0, 3.0, 1.5};
  for (double d : {0.1, 0.7, 2.0}) {
    EXPECT_NEAR(semfuse::nig_log_pdf(0.3 + d, 0.8, p), semfuse::nig_log_pdf(0.3 - d, 0.8, p), 1e-12);
  }
  NigParams tight = p;
  tight.lambda = 1e6;
  const double ratio_loose = semfuse::nig_log_pdf(0.3, 0.8, p) - semfuse::nig_log_pdf(0.35, 0.8, p);
  const double ratio_tight = semfuse::nig_log_pdf(0.3, 0.8, tight) - semfuse::nig_log_pdf(0.35, 0.8, tight);
  EXPECT_GT(ratio_tight, 1000.0 * ratio_loose);
  EXPECT_THROW((void)semfuse::nig_log_pdf(0.0, 0.0, p), std::domain_error);
}

TEST(Gaussian, NigDensityNormalizes) {
  const NigParams p{0.0, 1.0, 3.0, 1.0};
  const auto q = semfuse::oracle::nig_posterior_mean_quadrature(p, {}, -20.0, 20.0, 1e-6, 40.0, 1200, 4000);
  EXPECT_NEAR(q.mass, 1.0, 1e-2);
}

TEST(Gaussian, ConjugacyMatchesQuadrature) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.7);
  std::uniform_real_distribution<double> center(-2.0, 2.0);
  for (int set = 0; set < 3; ++set) {
    const NigParams prior{center(rng), 1.0 + set, 2.0, 1.0};
    std::vector<double> data(3 + 3 * set);
    const double truth = center(rng);
    for (double& z : data) z = truth + noise(rng);
    std::vector<double> m{prior.m};
    std::vector<double> b{prior.beta};
    Batch batch;
    for (double z : data) batch.push_back({z});
    (void)semfuse::absorb_features<double>(m, b, prior.lambda, batch);
    const auto q = semfuse::oracle::nig_posterior_mean_quadrature(prior, data, m[0] - 8.0, m[0] + 8.0, 1e-5,
                                                                   30.0, 800, 1500);
    EXPECT_NEAR(q.mean_mu, m[0], 1e-2) << "dataset " << set;
  }
}

TEST(Gaussian, BatchMatchesSequentialMean) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t dim = 16;
  Batch batch(9, std::vector<double>(dim));
  for (auto& row : batch)
    for (double& x : row) x = z(rng);
  for (double w0 : {0.0, 2.0, 10.0}) {
    std::vector<double> m_batch(dim, 0.1), b_batch(dim, 1e-3);
    std::vector<double> m_seq(dim, 0.1), b_seq(dim, 1e-3);
    (void)semfuse::absorb_features<double>(m_batch, b_batch, std::max(w0, 1e-3), batch);
    // the floor only matters for the very first sample
    if (w0 == 0.0) continue;
    double w = w0;
    for (const auto& row : batch) {
      (void)semfuse::absorb_features<double>(m_seq, b_seq, w, Batch{row});
      w += 1.0;
    }
    for (std::size_t i = 0; i < dim; ++i) EXPECT_NEAR(m_batch[i], m_seq[i], 1e-6);
  }
}

TEST(Gaussian, MeanIsConvexCombination) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> m{u(rng)};
    std::vector<double> b{1.0};
    Batch batch(1 + trial % 6, std::vector<double>(1));
    double lo = m[0], hi = m[0];
    for (auto& row : batch) {
      row[0] = u(rng);
      lo = std::min(lo, row[0]);
      hi = std::max(hi, row[0]);
    }
    (void)semfuse::absorb_features<double>(m, b, 0.5 + trial % 4, batch);
    EXPECT_GE(m[0], lo - 1e-12);
    EXPECT_LE(m[0], hi + 1e-12);
    EXPECT_GT(b[0], 0.0);
  }
}

TEST(Gaussian, QueryMatchingLabel) {
  OpenSetConfig cfg;
  semfuse::EmbeddingSet labels = semfuse::EmbeddingSet::standard_basis({"chair", "table"});
  const std::vector<float> m{1.0f, 0.0f};
  const auto q = semfuse::query_classes<float>(m, 3.0, labels, cfg);
  EXPECT_EQ(q.best, 0u);
  EXPECT_GT(q.probability[0], 0.99);
  EXPECT_TRUE(q.accepted);
  EXPECT_DOUBLE_EQ(q.similarity[0], 1.0);
}

TEST(Gaussian, QueryOrthogonalIsUniform) {
  OpenSetConfig cfg;
  std::vector<std::string> names;
  for (int c = 0; c < 10; ++c) names.push_back("c" + std::to_string(c));
  auto basis = semfuse::EmbeddingSet::standard_basis(names);
  semfuse::EmbeddingSet labels;
  labels.dim = 11;
  for (int c = 0; c < 10; ++c) {
    std::vector<float> e(11, 0.0f);
    e[c] = 1.0f;
    labels.add(names[c], e);
  }
  std::vector<float> m(11, 0.0f);
  m[10] = 2.0f;
  const auto q = semfuse::query_classes<float>(m, 1.0, labels, cfg);
  for (double p : q.probability) EXPECT_NEAR(p, 0.1, 1e-12);
  EXPECT_TRUE(q.accepted);
  EXPECT_EQ(basis.size(), 10u);
}

TEST(Gaussian, QuerySingleLabelAndErrors) {
  OpenSetConfig cfg;
  semfuse::EmbeddingSet one;
  one.dim = 3;
  one.add("sit", std::vector<float>{0.0f, 1.0f, 0.0f});
  const std::vector<float> m{0.2f, -0.4f, 0.9f};
  const auto q = semfuse::query_classes<float>(m, 2.0, one, cfg);
  EXPECT_DOUBLE_EQ(q.probability[0], 1.0);
  EXPECT_TRUE(q.accepted);
  EXPECT_THROW((void)semfuse::query_classes<float>(std::vector<float>(3, 0.0f), 2.0, one, cfg), std::domain_error);
  EXPECT_THROW((void)semfuse::query_classes<float>(std::vector<float>(2, 1.0f), 2.0, one, cfg),
               std::invalid_argument);
}

TEST(Gaussian, ConfigValidation) {
  OpenSetConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.confidence_threshold = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = OpenSetConfig{};
  cfg.feature_dim = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_DOUBLE_EQ(OpenSetConfig{}.coupled_lambda(0.0), 1e-3);
  EXPECT_DOUBLE_EQ(OpenSetConfig{}.coupled_lambda(5.0), 5.0);
}
