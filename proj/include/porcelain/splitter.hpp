#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "porcelain/catalog.hpp"

namespace porcelain {

/// Combination size classes driving the split rule.
///   Singleton  n == 1      all to train
///   Doublet    n == 2      one val, one test
///   Small      3 <= n < 10 70/15/15 with at least one val and one test
///   Standard   n >= 10     70/20/10
enum class SizeCategory { Singleton, Doublet, Small, Standard };

std::string_view category_name(SizeCategory c);

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);

struct SplitCounts {
  std::int64_t train = 0;
  std::int64_t val = 0;
  std::int64_t test = 0;

  std::int64_t total() const { return train + val + test; }
  bool operator==(const SplitCounts&) const = default;
};

struct SplitRatios {
  double train;
  double val;
  double test;
};

inline constexpr SplitRatios kSmallRatios{0.70, 0.15, 0.15};
inline constexpr SplitRatios kStandardRatios{0.70, 0.20, 0.10};

/// Throws DomainError if n < 1.
SizeCategory classify_combo(std::int64_t n);

/// n_val = max(1, round(r_val n)), n_test = max(1, round(r_test n)),
/// n_train = n - n_val - n_test. If n_train would go negative, n_val and then
/// n_test are lowered toward their floor of 1. Rounding is half away from zero.
SplitCounts split_sizes(std::int64_t n, SizeCategory category);
inline SplitCounts split_sizes(std::int64_t n) { return split_sizes(n, classify_combo(n)); }

struct ComboSplit {
  SplitCounts counts;
  SizeCategory category = SizeCategory::Singleton;
};

struct SplitManifest {
  /// Assignment order: combos in canonical order, records in shuffled order.
  std::vector<std::pair<std::string, Split>> assignments;
  std::map<ComboKey, ComboSplit> per_combo;
  std::int64_t seed = 0;
  SplitCounts counts;

  /// Number of combos in each size category.
  std::map<SizeCategory, std::size_t> category_counts() const;
  /// Record ids of one split, sorted.
  std::vector<std::string> ids(Split which) const;

  std::string to_json_string() const;
  static SplitManifest from_json_string(std::string_view text);

  /// Writes train.txt, val.txt, test.txt (one id per line) into `dir`.
  void export_id_lists(const std::filesystem::path& dir) const;
};

/// Shuffles each combo's records (ordered by id first) with a generator seeded
/// from (seed, canonical combo string), then assigns the first n_train to
/// train, the next n_val to val and the rest to test. Combos are processed in
/// parallel and merged in canonical order. Throws DomainError on an empty
/// catalog.
SplitManifest split_catalog(const Catalog& catalog, std::int64_t seed);

void to_json(nlohmann::json& j, const SplitManifest& m);

}  // namespace porcelain
