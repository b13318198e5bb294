// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semfuse/dirichlet.hpp"

using semfuse::ClassId;

TEST(Dirichlet, AbsorbAddsCounts) {
  std::vector<double> a{1, 1, 1};
  semfuse::absorb<double>(a, 1);
  semfuse::absorb<double>(a, 1);
  semfuse::absorb<double>(a, 3);
  EXPECT_EQ(a, (std::vector<double>{3, 1, 2}));
  std::vector<double> b{2, 5};
  semfuse::absorb<double>(b, 2, 3);
  EXPECT_EQ(b, (std::vector<double>{2, 8}));
  std::vector<float> prior(4, 0.001f);
  const auto copy = prior;
  EXPECT_EQ(prior, copy);
}

TEST(Dirichlet, AbsorbRejectsOutOfRangeClass) {
  std::vector<float> a(3, 0.0f);
  EXPECT_THROW(semfuse::absorb<float>(a, 0), std::out_of_range);
  EXPECT_THROW(semfuse::absorb<float>(a, 4), std::out_of_range);
}

TEST(Dirichlet, PredictiveArithmetic) {
  const auto p = semfuse::predictive(std::vector<double>{3, 1, 2});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(p[2], 1.0 / 3.0);
  const auto u = semfuse::predictive(std::vector<double>{4, 4, 4, 4});
  for (double x : u) EXPECT_DOUBLE_EQ(x, 0.25);
  const auto big = semfuse::predictive(std::vector<double>{1e6, 1});
  EXPECT_EQ(semfuse::argmax_class(std::vector<double>{1e6, 1}), 1);
  EXPECT_GE(big[0], 0.999998);
  // evidence plus prior form
  const auto q = semfuse::predictive(std::vector<float>{2, 0, 1}, 1.0);
  EXPECT_DOUBLE_EQ(q[0], 0.5);
}

TEST(Dirichlet, PredictiveSumsToOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(1e-3, 1e4);
  for (int n = 0; n < 1000; ++n) {
    std::vector<double> alpha(2 + n % 20);
    for (double& x : alpha) x = a(rng);
    const auto p = semfuse::predictive(alpha);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Dirichlet, ArgmaxTieBreaksLow) {
  EXPECT_EQ(semfuse::argmax_class(std::vector<double>{2, 2}), 1);
  EXPECT_EQ(semfuse::argmax_class(std::vector<double>{1, 3, 3}), 2);
}

TEST(Dirichlet, LastMeasurementOverwrites) {
  std::vector<float> e{5, 0, 2};
  semfuse::overwrite_last<float>(e, 2);
  EXPECT_EQ(e, (std::vector<float>{0, 1, 0}));
}

TEST(Dirichlet, SoftAbsorption) {
  std::vector<double> e{0, 0};
  semfuse::absorb_soft<double, double>(e, std::vector<double>{0.25, 0.75});
  semfuse::absorb_soft<double, double>(e, std::vector<double>{0.5, 0.5});
  EXPECT_DOUBLE_EQ(e[0], 0.75);
  EXPECT_DOUBLE_EQ(e[1], 1.25);
  const std::vector<double> short_p{1.0};
  EXPECT_THROW((semfuse::absorb_soft<double, double>(e, short_p)), std::invalid_argument);
}

TEST(Dirichlet, LogPdfKnownValues) {
  EXPECT_NEAR(semfuse::dirichlet_log_pdf(std::vector<double>{0.3, 0.7}, std::vector<double>{1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(semfuse::dirichlet_log_pdf(std::vector<double>{0.5, 0.5}, std::vector<double>{2, 1}), 0.0, 1e-12);
  // Dir(1,1,1) is uniform with density 2
  EXPECT_NEAR(semfuse::dirichlet_log_pdf(std::vector<double>{0.2, 0.3, 0.5}, std::vector<double>{1, 1, 1}),
              std::log(2.0), 1e-12);
}

TEST(Dirichlet, LogPdfRejectsOffSimplex) {
  EXPECT_THROW((void)semfuse::dirichlet_log_pdf(std::vector<double>{0.3, 0.8}, std::vector<double>{1, 1}),
               std::domain_error);
  EXPECT_THROW((void)semfuse::dirichlet_log_pdf(std::vector<double>{0.0, 1.0}, std::vector<double>{1, 1}),
               std::domain_error);
  EXPECT_NO_THROW((void)semfuse::dirichlet_log_pdf(std::vector<double>{0.3, 0.7 + 5e-10}, std::vector<double>{1, 1}));
}

TEST(Dirichlet, DensityNormalizes) {
  for (const auto& alpha : std::vector<std::vector<double>>{{1, 1}, {2, 5}, {1.5, 2.5}, {1, 1, 1}, {2, 3, 1.5}}) {
    EXPECT_NEAR(semfuse::oracle::dirichlet_integral(alpha, 1e-3), 1.0, 1e-3);
  }
}

TEST(Dirichlet, ConjugacyMatchesQuadrature) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> prior_d(1.0, 3.0);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t k = 2 + trial % 2;
    std::vector<double> prior(k);
    for (double& a : prior) a = prior_d(rng);
    std::uniform_int_distribution<int> cls(1, static_cast<int>(k));
    std::vector<ClassId> obs(5 + trial * 3);
    for (auto& z : obs) z = static_cast<ClassId>(cls(rng));
    std::vector<double> post = prior;
    for (ClassId z : obs) semfuse::absorb<double>(post, z);
    const auto closed_form = semfuse::predictive(post);
    const auto quad = semfuse::oracle::dirichlet_posterior_mean_quadrature(prior, obs, 1e-3);
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(closed_form[j], quad[j], 2e-3);
  }
}

TEST(Dirichlet, BatchEqualsStreamAndOrderInvariant) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cls(1, 5);
  std::vector<ClassId> obs(1000);
  for (auto& z : obs) z = static_cast<ClassId>(cls(rng));
  std::vector<float> stream(5, 0.001f);
  for (ClassId z : obs) semfuse::absorb<float>(stream, z);
  std::vector<float> batch(5, 0.001f);
  std::vector<int> counts(5, 0);
  for (ClassId z : obs) ++counts[z - 1];
  // integer evidence stored separately keeps float sums exact
  std::vector<float> evidence(5, 0.0f);
  for (int c = 0; c < 5; ++c) semfuse::absorb<float>(evidence, static_cast<ClassId>(c + 1), counts[c]);
  std::vector<float> evidence_stream(5, 0.0f);
  for (ClassId z : obs) semfuse::absorb<float>(evidence_stream, z);
  EXPECT_EQ(evidence, evidence_stream);
  std::shuffle(obs.begin(), obs.end(), rng);
  std::vector<float> evidence_shuffled(5, 0.0f);
  for (ClassId z : obs) semfuse::absorb<float>(evidence_shuffled, z);
  EXPECT_EQ(evidence, evidence_shuffled);
}

TEST(Dirichlet, FlickerRobustness) {
  std::mt19937_64 rng(2024);
  const int k = 5;
  int correct = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, k - 1);
  std::uniform_int_distribution<int> truth_d(1, k);
  for (int trial = 0; trial < 1000; ++trial) {
    const int truth = truth_d(rng);
    std::vector<float> e(k, 0.0f);
    for (int n = 0; n < 50; ++n) {
      int z = truth;
      if (u(rng) >= 0.8) {
        z = other(rng);
        if (z >= truth) ++z;
      }
      semfuse::absorb<float>(e, static_cast<ClassId>(z));
    }
    if (semfuse::argmax_class<float>(e) == truth) ++correct;
  }
  EXPECT_GE(correct, 990);
}
