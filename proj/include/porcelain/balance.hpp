#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "porcelain/catalog.hpp"

namespace porcelain {

/// Per-class sample counts with optional labels (labels empty or same length).
struct CountDistribution {
  std::vector<std::uint64_t> counts;
  std::vector<std::string> labels;

  std::size_t size() const { return counts.size(); }
  std::uint64_t total() const;
  std::vector<double> as_double() const;

  /// Two-column CSV "label,count". A first line whose count does not parse is
  /// treated as a header.
  static CountDistribution from_csv(std::string_view text);
  static CountDistribution load(const std::filesystem::path& path);
  static CountDistribution from_histogram(const ComboHistogram& hist);
  std::string to_csv() const;
};

/// max / min over strictly positive counts. Throws AllZero.
double imbalance_ratio(const CountDistribution& d);

/// Pairwise mean absolute difference over 2 k^2 mean, all k classes included.
/// Throws AllZero.
double gini(const CountDistribution& d);

/// Shannon entropy of the count proportions divided by ln k, with 0 ln 0 = 0.
/// Throws DomainError if k < 2, AllZero if the total is 0.
double normalized_entropy(const CountDistribution& d);

/// (0,0) followed by cumulative (class share, sample share) with classes sorted
/// ascending by count. Throws AllZero.
std::vector<std::pair<double, double>> lorenz_points(const CountDistribution& d);

/// Gini from the area under a Lorenz curve: 1 - sum (x_i - x_{i-1})(y_i + y_{i-1}).
double gini_from_lorenz(const std::vector<std::pair<double, double>>& points);

struct BalanceReport {
  std::size_t n_classes = 0;
  std::size_t zero_classes = 0;
  std::uint64_t total = 0;
  double min = 0;           // over all classes, zeros included
  double min_positive = 0;  // over strictly positive classes; the ratio's denominator
  double max = 0;
  double mean = 0;
  double std_dev = 0;  // population (divide by k)
  double imbalance_ratio = 0;
  double coefficient_of_variation = 0;
  double gini = 0;
  std::optional<double> normalized_entropy;  // absent when k < 2
  std::vector<std::pair<double, double>> lorenz;
  std::vector<std::string> notes;
};

BalanceReport balance_report(const CountDistribution& d);

struct MetricChange {
  std::string metric;
  double before = 0;
  double after = 0;
  std::optional<double> change_percent;  // absent when before == 0 and after != 0
};

struct PairedBalanceReport {
  BalanceReport before;
  BalanceReport after;
  std::vector<MetricChange> changes;  // table order

  const MetricChange& change(std::string_view metric) const;
  std::string to_table() const;
};

/// Both reports plus (after - before) / before in percent for each metric.
PairedBalanceReport balance_report(const CountDistribution& before, const CountDistribution& after);

/// Single-report table.
std::string to_table(const BalanceReport& r);

void to_json(nlohmann::json& j, const BalanceReport& r);
void to_json(nlohmann::json& j, const PairedBalanceReport& r);

}  // namespace porcelain
