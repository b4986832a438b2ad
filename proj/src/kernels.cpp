#include "porcelain/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace porcelain::kernels {

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kChunkRows - 1) / kChunkRows; }

double nll_range(std::span<const double> probs, std::size_t c, std::span<const int> labels,
                 std::span<const double> w, double clamp, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const double p = std::max(probs[i * c + y], clamp);
    acc += w[y] * -std::log(p);
  }
  return acc;
}

double abs_diff_rows(std::span<const double> x, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    double row = 0.0;
    for (double xj : x) row += std::abs(x[i] - xj);
    acc += row;
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace serial {

std::vector<std::uint64_t> confusion_tally(std::span<const int> truth, std::span<const int> pred,
                                           std::size_t num_classes) {
  std::vector<std::uint64_t> cells(num_classes * num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++cells[static_cast<std::size_t>(truth[i]) * num_classes + static_cast<std::size_t>(pred[i])];
  }
  return cells;
}

double weighted_nll_sum(std::span<const double> probs, std::size_t num_classes,
                        std::span<const int> labels, std::span<const double> class_weights,
                        double clamp) {
  return nll_range(probs, num_classes, labels, class_weights, clamp, 0, labels.size());
}

double abs_diff_sum(std::span<const double> x) { return abs_diff_rows(x, 0, x.size()); }

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += x.row(i).transpose();
  return sum / static_cast<double>(x.rows());
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean) {
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd c = x.row(i).transpose() - mean;
    s.noalias() += c * c.transpose();
  }
  return s;
}

}  // namespace serial

// ---------------------------------------------------------------------------

namespace parallel {

std::vector<std::uint64_t> confusion_tally(std::span<const int> truth, std::span<const int> pred,
                                           std::size_t num_classes) {
  const std::size_t n = truth.size();
  const std::size_t cc = num_classes * num_classes;
  std::vector<std::uint64_t> cells(cc, 0);
  // Integer counts: merge order does not matter.
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(cc, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      ++local[static_cast<std::size_t>(truth[i]) * num_classes + static_cast<std::size_t>(pred[i])];
    }
#pragma omp critical(porcelain_confusion_merge)
    for (std::size_t k = 0; k < cc; ++k) cells[k] += local[k];
  }
  return cells;
}

double weighted_nll_sum(std::span<const double> probs, std::size_t num_classes,
                        std::span<const int> labels, std::span<const double> class_weights,
                        double clamp) {
  const std::size_t n = labels.size();
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(chunks); ++k) {
    const std::size_t b = static_cast<std::size_t>(k) * kChunkRows;
    partial[k] = nll_range(probs, num_classes, labels, class_weights, clamp, b,
                           std::min(n, b + kChunkRows));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double abs_diff_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  // Each outer row costs O(n); small chunks keep the threads balanced.
  constexpr std::size_t kRowsPerChunk = 64;
  const std::size_t chunks = (n + kRowsPerChunk - 1) / kRowsPerChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(chunks); ++k) {
    const std::size_t b = static_cast<std::size_t>(k) * kRowsPerChunk;
    partial[k] = abs_diff_rows(x, b, std::min(n, b + kRowsPerChunk));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t chunks = chunk_count(n);
  std::vector<Eigen::VectorXd> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(chunks); ++k) {
    const auto b = static_cast<Eigen::Index>(static_cast<std::size_t>(k) * kChunkRows);
    const auto e = std::min<Eigen::Index>(x.rows(), b + static_cast<Eigen::Index>(kChunkRows));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index i = b; i < e; ++i) s += x.row(i).transpose();
    partial[k] = std::move(s);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.cols());
  for (const auto& p : partial) sum += p;
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const Eigen::Index d = x.cols();
  const std::size_t chunks = chunk_count(n);
  std::vector<Eigen::MatrixXd> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(chunks); ++k) {
    const auto b = static_cast<Eigen::Index>(static_cast<std::size_t>(k) * kChunkRows);
    const auto rows = std::min<Eigen::Index>(x.rows() - b, static_cast<Eigen::Index>(kChunkRows));
    const Eigen::MatrixXd centered = x.middleRows(b, rows).rowwise() - mean.transpose();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    partial[k] = s.selfadjointView<Eigen::Lower>();
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace parallel

}  // namespace porcelain::kernels
