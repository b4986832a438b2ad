#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "porcelain/catalog.hpp"

namespace porcelain {

// ---------------------------------------------------------------------------
// Traditional (transform-based) augmentation plan
// ---------------------------------------------------------------------------

struct TransformParams {
  double flip_probability = 0.5;
  double rotation_degrees = 30.0;  // uniform in [-r, r]
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  double hue = 0.05;
  double crop_scale_min = 0.8;
  double crop_scale_max = 1.0;
};

struct TraditionalAugPlan {
  std::int64_t threshold = 50;
  std::int64_t target_per_combo = 100;
  /// Only combos below the threshold appear; everything else needs 0 copies.
  std::map<ComboKey, std::int64_t> per_combo;
  TransformParams transform_params;

  std::int64_t copies(const ComboKey& key) const;
  std::int64_t total_copies() const;
  /// Histogram after adding every planned copy.
  ComboHistogram apply(const ComboHistogram& hist) const;
};

/// Combos with n < threshold get target - n copies. Throws DomainError if
/// threshold > target or either is negative.
TraditionalAugPlan traditional_aug_plan(const ComboHistogram& hist, std::int64_t threshold = 50,
                                        std::int64_t target = 100);

// ---------------------------------------------------------------------------
// Tiered synthetic allocation
// ---------------------------------------------------------------------------

/// Four-axis pattern; a missing axis ("*" in text form) matches anything.
struct ComboPattern {
  std::array<std::optional<std::string>, 4> axes;

  bool matches(const ComboKey& key) const;
  bool is_full() const;
  ComboKey key() const;  // requires is_full()
  std::string str() const;

  /// "Yuan|Jun|MoonWhite|Vase" or "*|*|White|Bowl".
  static ComboPattern parse(std::string_view text);
};

enum class QuotaDistribution { Even, Proportional };

/// One selector line of a tier: a single pattern, or a confusion pair of two.
struct AllocationItem {
  std::vector<ComboPattern> sides;
  std::optional<std::int64_t> quota;  // overrides the tier's per-item quota
  QuotaDistribution distribute = QuotaDistribution::Even;
  std::optional<std::size_t> top;  // keep only the N most frequent matches
  std::optional<std::uint64_t> min_count;
  std::optional<std::uint64_t> max_count;
  std::string note;

  bool is_pair() const { return sides.size() == 2; }
};

struct AllocationTierSpec {
  int priority = 0;
  std::string name;
  std::string selector;                       // human-readable criterion
  std::optional<std::int64_t> per_item_quota;  // nullopt: variable
  bool per_side = false;  // pair items: quota applies to each side rather than the pair
  bool fill = false;      // absorbs declared_total minus every other tier
  std::vector<AllocationItem> items;
};

struct AllocationSpec {
  std::string name;
  std::optional<std::int64_t> declared_total;
  std::vector<AllocationTierSpec> tiers;

  static AllocationSpec from_json(const nlohmann::json& j);
  static AllocationSpec load(const std::filesystem::path& path);
};

struct AllocationTier {
  int priority = 0;
  std::string name;
  std::string selector;
  std::optional<std::int64_t> per_item_quota;  // nullopt prints as "variable"
  std::int64_t tier_total = 0;
  std::map<ComboKey, std::int64_t> contributions;
};

struct AllocationPlan {
  std::string name;
  std::vector<AllocationTier> tiers;
  std::map<ComboKey, std::int64_t> per_combo_quota;  // zero quotas are not stored
  std::int64_t declared_total = 0;
  std::optional<std::int64_t> reconciled_from;  // pre-reconciliation total

  std::int64_t total() const;

  std::string to_json_string() const;
  static AllocationPlan from_json(const nlohmann::json& j);
  static AllocationPlan load(const std::filesystem::path& path);
};

/// Resolves selectors against `hist` and assigns quotas tier by tier; quotas
/// from several tiers add per combo. Full-key selectors do not need to appear
/// in the histogram; partial patterns must match at least one combo.
/// Throws InfeasibleSpec when fixed tiers exceed the declared total, a
/// selector matches nothing, or a variable item has no quota. Throws
/// DomainError when tiers are not in strictly increasing priority order.
AllocationPlan build_allocation(const AllocationSpec& spec, const ComboHistogram& hist);

/// Scales quotas proportionally to `declared_total` with largest-remainder
/// rounding (ties by canonical combo order). Every nonzero quota keeps at
/// least 1. Throws DomainError if the plan is empty or declared_total is below
/// the number of nonzero combos.
AllocationPlan reconcile(const AllocationPlan& plan, std::int64_t declared_total);

// ---------------------------------------------------------------------------
// Real/synthetic mix
// ---------------------------------------------------------------------------

struct MixManifest {
  std::vector<std::string> real_ids;
  std::vector<std::string> synthetic_ids;
  std::size_t real_count = 0;
  std::size_t synthetic_count = 0;
  double synthetic_fraction = 0.0;

  std::size_t total() const { return real_count + synthetic_count; }
};

/// Throws OverlapError if any id repeats within or across the lists.
MixManifest compose_mix(const std::vector<std::string>& real_ids,
                        const std::vector<std::string>& synthetic_ids);

void to_json(nlohmann::json& j, const TraditionalAugPlan& p);
void to_json(nlohmann::json& j, const MixManifest& m);

}  // namespace porcelain
