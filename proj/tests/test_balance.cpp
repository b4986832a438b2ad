#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "porcelain/balance.hpp"
#include "porcelain/errors.hpp"
#include "porcelain/kernels.hpp"

using namespace porcelain;

namespace {

CountDistribution dist(std::vector<std::uint64_t> c) {
  CountDistribution d;
  for (std::size_t i = 0; i < c.size(); ++i) d.labels.push_back("c" + std::to_string(i));
  d.counts = std::move(c);
  return d;
}

long double pairwise_gini(const std::vector<std::uint64_t>& c) {
  long double num = 0, sum = 0;
  for (auto a : c) {
    sum += a;
    for (auto b : c) num += std::fabs(static_cast<long double>(a) - static_cast<long double>(b));
  }
  const long double k = c.size();
  return num / (2 * k * k * (sum / k));
}

CountDistribution random_dist(std::mt19937_64& gen, std::size_t max_k) {
  std::uniform_int_distribution<std::size_t> kd(1, max_k);
  std::lognormal_distribution<double> ln(3.0, 1.5);
  std::vector<std::uint64_t> c(kd(gen));
  for (auto& v : c) v = static_cast<std::uint64_t>(ln(gen));
  c[0] += 1;
  return dist(c);
}

}  // namespace

TEST(Balance, ImbalanceRatioExamples) {
  EXPECT_NEAR(imbalance_ratio(dist({100, 900, 5662})), 56.62, 1e-12);
  EXPECT_NEAR(imbalance_ratio(dist({200, 900, 5662})), 28.31, 1e-12);
  EXPECT_DOUBLE_EQ(imbalance_ratio(dist({7, 7, 7})), 1.0);
  EXPECT_DOUBLE_EQ(imbalance_ratio(dist({0, 4, 8})), 2.0);
  EXPECT_THROW(imbalance_ratio(dist({0, 0})), AllZero);
}

TEST(Balance, GiniExamples) {
  EXPECT_DOUBLE_EQ(gini(dist({5, 5, 5, 5})), 0.0);
  EXPECT_DOUBLE_EQ(gini(dist({1, 3})), 0.25);
  EXPECT_DOUBLE_EQ(gini(dist({42})), 0.0);
  EXPECT_THROW(gini(dist({0, 0, 0})), AllZero);
}

TEST(Balance, GiniMatchesPairwiseOracle) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = random_dist(gen, 400);
    EXPECT_NEAR(gini(d), static_cast<double>(pairwise_gini(d.counts)), 1e-12);
  }
}

TEST(Balance, EntropyExamples) {
  EXPECT_NEAR(normalized_entropy(dist({3, 3, 3})), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(normalized_entropy(dist({0, 9, 0})), 0.0);
  const double oracle = -(2 * 0.25 * std::log(0.25) + 0.5 * std::log(0.5)) / std::log(3.0);
  EXPECT_NEAR(normalized_entropy(dist({2, 2, 4})), oracle, 1e-15);
  EXPECT_NEAR(normalized_entropy(dist({2, 2, 4})), 0.9463946303571862, 1e-15);
  EXPECT_THROW(normalized_entropy(dist({5})), DomainError);
}

TEST(Balance, EntropyPermutationInvariantAndMaximalAtUniform) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 30; ++rep) {
    auto d = random_dist(gen, 50);
    if (d.counts.size() < 2) continue;
    const double h = normalized_entropy(d);
    std::shuffle(d.counts.begin(), d.counts.end(), gen);
    EXPECT_NEAR(normalized_entropy(d), h, 1e-12);
    const bool uniform = std::all_of(d.counts.begin(), d.counts.end(), [&](auto v) { return v == d.counts[0]; });
    if (!uniform) {
      EXPECT_LT(h, 1.0);
    }
  }
}

TEST(Balance, LorenzPoints) {
  const auto pts = lorenz_points(dist({3, 1}));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0], (std::pair<double, double>{0.0, 0.0}));
  EXPECT_EQ(pts[1], (std::pair<double, double>{0.5, 0.25}));
  EXPECT_EQ(pts[2], (std::pair<double, double>{1.0, 1.0}));
  for (const auto& [x, y] : lorenz_points(dist({4, 4, 4, 4}))) EXPECT_NEAR(x, y, 1e-15);
}

TEST(Balance, LorenzBelowDiagonalAndGiniAgrees) {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = random_dist(gen, 1000);
    const auto pts = lorenz_points(d);
    EXPECT_EQ(pts.back(), (std::pair<double, double>{1.0, 1.0}));
    for (const auto& [x, y] : pts) EXPECT_LE(y, x + 1e-12);
    EXPECT_NEAR(gini_from_lorenz(pts), gini(d), 1e-9);
  }
}

TEST(Balance, GiniScaleInvariant) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = random_dist(gen, 200);
    const double g = gini(d);
    for (auto& v : d.counts) v *= 7;
    EXPECT_NEAR(gini(d), g, 1e-12);
  }
}

TEST(Balance, ReportChanges) {
  const auto before = dist({100, 900, 5662});
  const auto after = dist({200, 900, 5662});
  const auto r = balance_report(before, after);
  EXPECT_NEAR(*r.change("imbalance_ratio").change_percent, -50.0, 1e-9);
  EXPECT_NEAR(*r.change("min_samples").change_percent, 100.0, 1e-12);
  const auto same = balance_report(before, before);
  for (const auto& c : same.changes) EXPECT_EQ(c.change_percent, 0.0) << c.metric;
  EXPECT_THROW(r.change("nope"), DomainError);
}

TEST(Balance, ZeroClassesFlaggedAndBothMinimaReported) {
  const auto r = balance_report(dist({0, 0, 100, 400}));
  EXPECT_EQ(r.zero_classes, 2u);
  EXPECT_EQ(r.min, 0.0);
  EXPECT_EQ(r.min_positive, 100.0);
  EXPECT_DOUBLE_EQ(r.mean, 125.0);
  EXPECT_EQ(r.imbalance_ratio, 4.0);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Balance, PopulationStdAndCv) {
  const auto r = balance_report(dist({1, 2, 3, 4}));
  EXPECT_NEAR(r.std_dev, std::sqrt(1.25), 1e-15);
  EXPECT_NEAR(r.coefficient_of_variation, std::sqrt(1.25) / 2.5, 1e-15);
  EXPECT_NEAR(351.1 / 89.5, 3.925, 3.925 * 1e-3);
}

TEST(Balance, CsvRoundTrip) {
  const auto d = dist({3, 0, 9});
  EXPECT_EQ(CountDistribution::from_csv(d.to_csv()).counts, d.counts);
  EXPECT_EQ(CountDistribution::from_csv("a,1\nb,2\n").labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(CountDistribution::from_csv("label,count\na,x\n"), porcelain::FormatError);
  EXPECT_THROW(CountDistribution::from_csv("a,-1\n"), porcelain::FormatError);
}

TEST(Kernels, AbsDiffSerialEqualsParallel) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 1000);
  for (std::size_t n : {0u, 1u, 7u, 2047u, 2048u, 2049u, 5000u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = std::floor(u(gen));
    EXPECT_EQ(kernels::serial::abs_diff_sum(x), kernels::parallel::abs_diff_sum(x)) << n;
  }
}
