#include <gtest/gtest.h>

#include <omp.h>

#include <random>

#include "porcelain/kernels.hpp"

using namespace porcelain::kernels;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> nd(1.0, 3.0);
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
  return x;
}

class ThreadCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

}  // namespace

TEST_P(ThreadCount, ParallelIsBitIdenticalToSingleThread) {
  std::mt19937_64 gen(77);
  const MatrixXd x = random_matrix(gen, 9000, 7);
  std::vector<double> v(7000);
  for (auto& e : v) e = std::uniform_real_distribution<double>(0, 100)(gen);
  std::vector<double> probs(5000 * 4, 0.25);
  std::vector<int> labels(5000), preds(5000);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<int>(gen() % 4);
    preds[i] = static_cast<int>(gen() % 4);
  }
  const std::vector<double> w{1.0, 0.5, 2.0, 3.0};

  const auto mean = parallel::column_means(x);
  const auto scatter = parallel::scatter(x, mean);
  const double diffs = parallel::abs_diff_sum(v);
  const double nll = parallel::weighted_nll_sum(probs, 4, labels, w, 1e-12);
  const auto tally = parallel::confusion_tally(labels, preds, 4);

  omp_set_num_threads(1);
  EXPECT_EQ(parallel::column_means(x), mean);
  EXPECT_EQ(parallel::scatter(x, mean), scatter);
  EXPECT_EQ(parallel::abs_diff_sum(v), diffs);
  EXPECT_EQ(parallel::weighted_nll_sum(probs, 4, labels, w, 1e-12), nll);
  EXPECT_EQ(parallel::confusion_tally(labels, preds, 4), tally);
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCount, ::testing::Values(1, 2, 3, 4, 8));

TEST(Kernels, ParallelAgreesWithSerialReference) {
  std::mt19937_64 gen(78);
  for (Eigen::Index n : {1, 5, 2047, 2048, 2049, 6001}) {
    const MatrixXd x = random_matrix(gen, n, 5);
    const auto ms = serial::column_means(x);
    const auto mp = parallel::column_means(x);
    EXPECT_LT((ms - mp).cwiseAbs().maxCoeff(), 1e-12) << n;
    const auto ss = serial::scatter(x, ms);
    const auto sp = parallel::scatter(x, ms);
    EXPECT_LT((ss - sp).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, ss.cwiseAbs().maxCoeff())) << n;
    EXPECT_EQ(sp, sp.transpose());
  }
}

TEST(Kernels, AbsDiffSumSmallCases) {
  EXPECT_EQ(serial::abs_diff_sum(std::vector<double>{}), 0.0);
  EXPECT_EQ(parallel::abs_diff_sum(std::vector<double>{1.0, 3.0}), 4.0);
  EXPECT_EQ(parallel::abs_diff_sum(std::vector<double>{5.0, 1.0, 3.0}), 16.0);
}
