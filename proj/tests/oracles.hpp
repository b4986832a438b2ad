#pragma once

// Brute-force reference computations shared by the unit tests and the
// acceptance binary. They work from raw samples rather than from the
// library's intermediate structures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace porcelain::oracle {

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t support = 0;
};

inline std::vector<std::uint64_t> tally(const std::vector<int>& preds, const std::vector<int>& truth,
                                        std::size_t c) {
  std::vector<std::uint64_t> cells(c * c, 0);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t s = 0; s < truth.size(); ++s)
        if (truth[s] == static_cast<int>(i) && preds[s] == static_cast<int>(j)) ++cells[i * c + j];
  return cells;
}

inline std::vector<Prf> prf(const std::vector<int>& preds, const std::vector<int>& truth, std::size_t c) {
  std::vector<Prf> out(c);
  for (std::size_t k = 0; k < c; ++k) {
    const int label = static_cast<int>(k);
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < truth.size(); ++s) {
      if (preds[s] == label && truth[s] == label) ++tp;
      if (preds[s] == label && truth[s] != label) ++fp;
      if (preds[s] != label && truth[s] == label) ++fn;
    }
    auto& r = out[k];
    r.support = tp + fn;
    r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  }
  return out;
}

inline double macro(const std::vector<Prf>& p) {
  double s = 0;
  for (const auto& r : p) s += r.f1;
  return s / static_cast<double>(p.size());
}

inline double weighted(const std::vector<Prf>& p) {
  double s = 0, n = 0;
  for (const auto& r : p) {
    s += static_cast<double>(r.support) * r.f1;
    n += static_cast<double>(r.support);
  }
  return n > 0 ? s / n : 0.0;
}

/// Sorts class indices by score descending, index ascending, and checks the
/// first k for the true label.
inline double topk(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t c,
                   std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    std::vector<std::size_t> idx(c);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const double sa = scores[s * c + a], sb = scores[s * c + b];
      return sa != sb ? sa > sb : a < b;
    });
    if (std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), labels[s]) !=
        idx.begin() + static_cast<std::ptrdiff_t>(k)) {
      ++hits;
    }
  }
  return labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(labels.size());
}

/// sum_{i,j} |x_i - x_j| / (2 k^2 mean), in long double.
inline double pairwise_gini(const std::vector<std::uint64_t>& c) {
  long double num = 0, sum = 0;
  for (auto a : c) {
    sum += a;
    for (auto b : c) num += std::fabs(static_cast<long double>(a) - static_cast<long double>(b));
  }
  const long double k = static_cast<long double>(c.size());
  return static_cast<double>(num / (2 * k * sum));
}

/// 1 + beta + ... + beta^(n-1) in long double.
inline long double series_effective_number(std::uint64_t n, long double beta) {
  long double sum = 0, term = 1;
  for (std::uint64_t i = 0; i < n; ++i) {
    sum += term;
    term *= beta;
  }
  return sum;
}

}  // namespace porcelain::oracle
