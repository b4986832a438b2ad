#pragma once

// Data-parallel inner loops used by the analytics modules.
//
// Every kernel exists twice: `serial::` is the straightforward reference kept
// for tests and benchmarks, `parallel::` is the OpenMP version the modules
// call. Parallel floating-point reductions split the input into fixed-size
// chunks (independent of the thread count), reduce each chunk serially, then
// add the chunk partials left to right. Results are therefore bit-identical
// for any OMP_NUM_THREADS, and agree with the serial reference to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace porcelain::kernels {

inline constexpr std::size_t kChunkRows = 2048;

namespace serial {

/// Row-major C x C tally of (truth, pred) pairs. Inputs must be in [0, C).
std::vector<std::uint64_t> confusion_tally(std::span<const int> truth, std::span<const int> pred,
                                           std::size_t num_classes);

/// Sum over rows of w[label] * -ln(max(p[row, label], clamp)), p row-major N x C.
double weighted_nll_sum(std::span<const double> probs, std::size_t num_classes,
                        std::span<const int> labels, std::span<const double> class_weights,
                        double clamp);

/// Sum over all ordered pairs of |x_i - x_j|.
double abs_diff_sum(std::span<const double> x);

/// Column means of an N x D matrix.
Eigen::VectorXd column_means(const Eigen::MatrixXd& x);

/// Centered scatter matrix sum_i (x_i - mean)(x_i - mean)^T.
Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean);

}  // namespace serial

namespace parallel {

std::vector<std::uint64_t> confusion_tally(std::span<const int> truth, std::span<const int> pred,
                                           std::size_t num_classes);

double weighted_nll_sum(std::span<const double> probs, std::size_t num_classes,
                        std::span<const int> labels, std::span<const double> class_weights,
                        double clamp);

double abs_diff_sum(std::span<const double> x);

Eigen::VectorXd column_means(const Eigen::MatrixXd& x);

Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean);

}  // namespace parallel

}  // namespace porcelain::kernels
