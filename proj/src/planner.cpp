#include "porcelain/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"

namespace porcelain {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Traditional plan
// ---------------------------------------------------------------------------

std::int64_t TraditionalAugPlan::copies(const ComboKey& key) const {
  auto it = per_combo.find(key);
  return it == per_combo.end() ? 0 : it->second;
}

std::int64_t TraditionalAugPlan::total_copies() const {
  std::int64_t t = 0;
  for (const auto& [k, n] : per_combo) t += n;
  return t;
}

ComboHistogram TraditionalAugPlan::apply(const ComboHistogram& hist) const {
  ComboHistogram out = hist;
  for (const auto& [k, n] : per_combo) out.add(k, static_cast<std::uint64_t>(n));
  return out;
}

TraditionalAugPlan traditional_aug_plan(const ComboHistogram& hist, std::int64_t threshold,
                                        std::int64_t target) {
  if (threshold < 0 || target < 0) throw DomainError("threshold and target must be non-negative");
  if (threshold > target) {
    throw DomainError("threshold (" + std::to_string(threshold) + ") exceeds target (" +
                      std::to_string(target) + ")");
  }
  TraditionalAugPlan plan;
  plan.threshold = threshold;
  plan.target_per_combo = target;
  for (const auto& [k, n] : hist.entries()) {
    const auto count = static_cast<std::int64_t>(n);
    if (count < threshold) plan.per_combo.emplace(k, target - count);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

bool ComboPattern::matches(const ComboKey& key) const {
  for (Axis a : kAxes) {
    const auto& want = axes[static_cast<std::size_t>(a)];
    if (want && !io::iequals(*want, key[a])) return false;
  }
  return true;
}

bool ComboPattern::is_full() const {
  return std::all_of(axes.begin(), axes.end(), [](const auto& a) { return a.has_value(); });
}

ComboKey ComboPattern::key() const {
  if (!is_full()) throw DomainError("pattern " + str() + " is not a full combination");
  return {*axes[0], *axes[1], *axes[2], *axes[3]};
}

std::string ComboPattern::str() const {
  std::string s;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (i) s += '|';
    s += axes[i] ? *axes[i] : "*";
  }
  return s;
}

ComboPattern ComboPattern::parse(std::string_view text) {
  ComboPattern p;
  std::size_t start = 0;
  std::size_t i = 0;
  while (true) {
    auto bar = text.find('|', start);
    if (i >= 4) throw FormatError("pattern has more than four parts: " + std::string(text));
    auto part = io::trim(text.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (part.empty()) throw FormatError("pattern has an empty part: " + std::string(text));
    if (part != "*") p.axes[i] = part;
    ++i;
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (i != 4) throw FormatError("pattern needs four '|' separated parts: " + std::string(text));
  return p;
}

// ---------------------------------------------------------------------------
// Apportionment
// ---------------------------------------------------------------------------

namespace {

/// Largest-remainder split of `total` proportional to `weights`; ties go to the
/// lower index. Weights must be non-negative with a positive sum.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::int64_t> out(weights.size(), 0);
  std::vector<double> rem(weights.size(), 0.0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::int64_t>(std::floor(share));
    rem[i] = share - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

std::vector<std::pair<ComboKey, std::uint64_t>> resolve_side(const ComboPattern& pattern,
                                                             const AllocationItem& item,
                                                             const ComboHistogram& hist) {
  std::vector<std::pair<ComboKey, std::uint64_t>> matches;
  if (pattern.is_full()) {
    const auto key = pattern.key();
    matches.emplace_back(key, hist.count(key));
    return matches;
  }
  for (const auto& [k, n] : hist.entries()) {
    if (!pattern.matches(k)) continue;
    if (item.min_count && n < *item.min_count) continue;
    if (item.max_count && n > *item.max_count) continue;
    matches.emplace_back(k, n);
  }
  if (item.top && matches.size() > *item.top) {
    std::stable_sort(matches.begin(), matches.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    matches.resize(*item.top);
    std::sort(matches.begin(), matches.end());
  }
  if (matches.empty()) {
    throw InfeasibleSpec("selector " + pattern.str() + " matches no combination in the histogram");
  }
  return matches;
}

void distribute(std::int64_t quota, const ComboPattern& side, const AllocationItem& item,
                const ComboHistogram& hist, std::map<ComboKey, std::int64_t>& into) {
  if (quota <= 0) return;
  const auto matches = resolve_side(side, item, hist);
  std::vector<double> w;
  w.reserve(matches.size());
  const bool proportional = item.distribute == QuotaDistribution::Proportional &&
                            std::any_of(matches.begin(), matches.end(),
                                        [](const auto& m) { return m.second > 0; });
  for (const auto& m : matches) w.push_back(proportional ? static_cast<double>(m.second) : 1.0);
  const auto shares = apportion(quota, w);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (shares[i] > 0) into[matches[i].first] += shares[i];
  }
}

void allocate_item(std::int64_t quota, bool per_side, const AllocationItem& item,
                   const ComboHistogram& hist, std::map<ComboKey, std::int64_t>& into) {
  if (item.sides.empty() || item.sides.size() > 2) {
    throw InfeasibleSpec("allocation item needs one pattern or a pair of patterns");
  }
  if (per_side || item.sides.size() == 1) {
    for (const auto& s : item.sides) distribute(quota, s, item, hist, into);
    return;
  }
  const auto halves = apportion(quota, {1.0, 1.0});
  distribute(halves[0], item.sides[0], item, hist, into);
  distribute(halves[1], item.sides[1], item, hist, into);
}

std::int64_t item_quota(const AllocationTierSpec& tier, const AllocationItem& item) {
  if (item.quota) return *item.quota;
  if (tier.per_item_quota) return *tier.per_item_quota;
  throw InfeasibleSpec("tier '" + tier.name + "' is variable but an item has no quota");
}

std::int64_t tier_fixed_total(const AllocationTierSpec& tier) {
  std::int64_t t = 0;
  for (const auto& item : tier.items) {
    const auto q = item_quota(tier, item);
    if (q < 0) throw InfeasibleSpec("negative quota in tier '" + tier.name + "'");
    t += (item.is_pair() && tier.per_side) ? 2 * q : q;
  }
  return t;
}

}  // namespace

AllocationPlan build_allocation(const AllocationSpec& spec, const ComboHistogram& hist) {
  AllocationPlan plan;
  plan.name = spec.name;

  const AllocationTierSpec* fill_tier = nullptr;
  std::int64_t fixed = 0;
  for (std::size_t t = 0; t < spec.tiers.size(); ++t) {
    const auto& tier = spec.tiers[t];
    if (t > 0 && tier.priority <= spec.tiers[t - 1].priority) {
      throw DomainError("tiers must be listed in strictly increasing priority order");
    }
    if (tier.fill) {
      if (fill_tier) throw InfeasibleSpec("only one fill tier is allowed");
      fill_tier = &tier;
      continue;
    }
    fixed += tier_fixed_total(tier);
  }

  const std::int64_t declared = spec.declared_total.value_or(fixed);
  if (fixed > declared) {
    throw InfeasibleSpec("fixed tiers total " + std::to_string(fixed) +
                         " which exceeds the declared total " + std::to_string(declared));
  }
  if (fill_tier && fill_tier->items.empty()) {
    throw InfeasibleSpec("fill tier '" + fill_tier->name + "' has no selector");
  }
  plan.declared_total = declared;

  for (const auto& tier : spec.tiers) {
    AllocationTier out;
    out.priority = tier.priority;
    out.name = tier.name;
    out.selector = tier.selector;
    out.per_item_quota = tier.fill ? std::nullopt : tier.per_item_quota;
    if (tier.fill) {
      const std::int64_t remaining = declared - fixed;
      std::vector<double> even(tier.items.size(), 1.0);
      const auto per_item = apportion(remaining, even);
      for (std::size_t i = 0; i < tier.items.size(); ++i) {
        allocate_item(per_item[i], tier.per_side, tier.items[i], hist, out.contributions);
      }
    } else {
      for (const auto& item : tier.items) {
        allocate_item(item_quota(tier, item), tier.per_side, item, hist, out.contributions);
      }
    }
    for (const auto& [k, q] : out.contributions) {
      out.tier_total += q;
      plan.per_combo_quota[k] += q;
    }
    plan.tiers.push_back(std::move(out));
  }
  return plan;
}

std::int64_t AllocationPlan::total() const {
  std::int64_t t = 0;
  for (const auto& [k, q] : per_combo_quota) t += q;
  return t;
}

AllocationPlan reconcile(const AllocationPlan& plan, std::int64_t declared_total) {
  const std::int64_t current = plan.total();
  if (current <= 0) throw DomainError("cannot reconcile an empty plan");
  if (current == declared_total) {
    AllocationPlan same = plan;
    same.declared_total = declared_total;
    return same;
  }
  const auto nonzero = static_cast<std::int64_t>(plan.per_combo_quota.size());
  if (declared_total < nonzero) {
    throw DomainError("declared total " + std::to_string(declared_total) + " cannot give each of " +
                      std::to_string(nonzero) + " combinations at least one item");
  }

  std::vector<ComboKey> keys;
  std::vector<double> w;
  for (const auto& [k, q] : plan.per_combo_quota) {
    keys.push_back(k);
    w.push_back(static_cast<double>(q));
  }
  auto shares = apportion(declared_total, w);

  // Lift any share that rounded to zero, taking the unit from the currently
  // largest share (first in canonical order on ties).
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (shares[i] > 0) continue;
    auto donor = std::max_element(shares.begin(), shares.end()) - shares.begin();
    --shares[static_cast<std::size_t>(donor)];
    shares[i] = 1;
  }

  AllocationPlan out;
  out.name = plan.name;
  out.tiers = plan.tiers;
  out.declared_total = declared_total;
  out.reconciled_from = plan.reconciled_from.value_or(current);
  for (std::size_t i = 0; i < keys.size(); ++i) out.per_combo_quota.emplace(keys[i], shares[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Mix
// ---------------------------------------------------------------------------

MixManifest compose_mix(const std::vector<std::string>& real_ids,
                        const std::vector<std::string>& synthetic_ids) {
  std::unordered_set<std::string> seen;
  seen.reserve(real_ids.size() + synthetic_ids.size());
  for (const auto* list : {&real_ids, &synthetic_ids}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) throw OverlapError("id " + id + " appears more than once");
    }
  }
  MixManifest m;
  m.real_ids = real_ids;
  m.synthetic_ids = synthetic_ids;
  m.real_count = real_ids.size();
  m.synthetic_count = synthetic_ids.size();
  m.synthetic_fraction = m.total() == 0 ? 0.0
                                        : static_cast<double>(m.synthetic_count) /
                                              static_cast<double>(m.total());
  return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

AllocationItem parse_item(const json& j) {
  AllocationItem item;
  if (j.is_string()) {
    item.sides.push_back(ComboPattern::parse(j.get<std::string>()));
    return item;
  }
  if (j.contains("combo")) item.sides.push_back(ComboPattern::parse(j.at("combo").get<std::string>()));
  if (j.contains("match")) item.sides.push_back(ComboPattern::parse(j.at("match").get<std::string>()));
  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    if (!p.is_array() || p.size() != 2) throw FormatError("'pair' needs exactly two patterns");
    item.sides.push_back(ComboPattern::parse(p.at(0).get<std::string>()));
    item.sides.push_back(ComboPattern::parse(p.at(1).get<std::string>()));
  }
  if (item.sides.empty() || item.sides.size() > 2) {
    throw FormatError("allocation item needs exactly one of 'combo', 'match' or 'pair'");
  }
  if (j.contains("quota")) item.quota = j.at("quota").get<std::int64_t>();
  if (j.contains("distribute")) {
    const auto d = j.at("distribute").get<std::string>();
    if (d == "even") item.distribute = QuotaDistribution::Even;
    else if (d == "proportional") item.distribute = QuotaDistribution::Proportional;
    else throw FormatError("unknown distribution '" + d + "'");
  }
  if (j.contains("top")) item.top = j.at("top").get<std::size_t>();
  if (j.contains("min_count")) item.min_count = j.at("min_count").get<std::uint64_t>();
  if (j.contains("max_count")) item.max_count = j.at("max_count").get<std::uint64_t>();
  if (j.contains("note")) item.note = j.at("note").get<std::string>();
  return item;
}

json quota_json(const std::optional<std::int64_t>& q) {
  return q ? json(*q) : json("variable");
}

}  // namespace

AllocationSpec AllocationSpec::from_json(const json& j) {
  AllocationSpec spec;
  try {
    spec.name = j.value("name", std::string("allocation"));
    if (j.contains("declared_total")) spec.declared_total = j.at("declared_total").get<std::int64_t>();
    for (const auto& t : j.at("tiers")) {
      AllocationTierSpec tier;
      tier.priority = t.at("priority").get<int>();
      tier.name = t.value("name", std::string());
      tier.selector = t.value("selector", std::string());
      if (t.contains("per_item_quota") && t.at("per_item_quota").is_number_integer()) {
        tier.per_item_quota = t.at("per_item_quota").get<std::int64_t>();
      }
      tier.per_side = t.value("per_side", false);
      tier.fill = t.value("fill", false);
      for (const auto& it : t.at("items")) tier.items.push_back(parse_item(it));
      spec.tiers.push_back(std::move(tier));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("allocation spec: ") + e.what());
  }
  return spec;
}

AllocationSpec AllocationSpec::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(io::read_file(path)));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string AllocationPlan::to_json_string() const {
  nlohmann::ordered_json out;
  out["name"] = name;
  out["declared_total"] = declared_total;
  out["total"] = total();
  out["reconciled_from"] = reconciled_from ? nlohmann::ordered_json(*reconciled_from)
                                           : nlohmann::ordered_json();
  auto tiers_json = nlohmann::ordered_json::array();
  for (const auto& t : tiers) {
    nlohmann::ordered_json tj;
    tj["priority"] = t.priority;
    tj["name"] = t.name;
    tj["selector"] = t.selector;
    tj["per_item_quota"] = quota_json(t.per_item_quota);
    tj["tier_total"] = t.tier_total;
    auto contrib = nlohmann::ordered_json::object();
    for (const auto& [k, q] : t.contributions) contrib[k.str()] = q;
    tj["contributions"] = contrib;
    tiers_json.push_back(tj);
  }
  out["tiers"] = tiers_json;
  auto per = nlohmann::ordered_json::object();
  for (const auto& [k, q] : per_combo_quota) per[k.str()] = q;
  out["per_combo"] = per;
  return out.dump(2) + "\n";
}

AllocationPlan AllocationPlan::from_json(const json& j) {
  AllocationPlan p;
  try {
    p.name = j.value("name", std::string());
    p.declared_total = j.at("declared_total").get<std::int64_t>();
    if (j.contains("reconciled_from") && !j.at("reconciled_from").is_null()) {
      p.reconciled_from = j.at("reconciled_from").get<std::int64_t>();
    }
    if (j.contains("tiers")) {
      for (const auto& tj : j.at("tiers")) {
        AllocationTier t;
        t.priority = tj.at("priority").get<int>();
        t.name = tj.value("name", std::string());
        t.selector = tj.value("selector", std::string());
        if (tj.contains("per_item_quota") && tj.at("per_item_quota").is_number_integer()) {
          t.per_item_quota = tj.at("per_item_quota").get<std::int64_t>();
        }
        t.tier_total = tj.value("tier_total", std::int64_t{0});
        if (tj.contains("contributions")) {
          for (const auto& [k, q] : tj.at("contributions").items()) {
            t.contributions.emplace(ComboKey::parse(k), q.get<std::int64_t>());
          }
        }
        p.tiers.push_back(std::move(t));
      }
    }
    for (const auto& [k, q] : j.at("per_combo").items()) {
      const auto n = q.get<std::int64_t>();
      if (n < 0) throw FormatError("negative quota for " + k);
      if (n > 0) p.per_combo_quota.emplace(ComboKey::parse(k), n);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("allocation plan: ") + e.what());
  }
  return p;
}

AllocationPlan AllocationPlan::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(io::read_file(path)));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void to_json(json& j, const TraditionalAugPlan& p) {
  json per = json::object();
  for (const auto& [k, n] : p.per_combo) per[k.str()] = n;
  const auto& t = p.transform_params;
  j = json{{"threshold", p.threshold},
           {"target_per_combo", p.target_per_combo},
           {"total_copies", p.total_copies()},
           {"per_combo", per},
           {"transform_params",
            {{"horizontal_flip_p", t.flip_probability},
             {"rotation_degrees", t.rotation_degrees},
             {"color_jitter",
              {{"brightness", t.brightness},
               {"contrast", t.contrast},
               {"saturation", t.saturation},
               {"hue", t.hue}}},
             {"random_resized_crop_scale", {t.crop_scale_min, t.crop_scale_max}}}}};
}

void to_json(json& j, const MixManifest& m) {
  j = json{{"real_count", m.real_count},
           {"synthetic_count", m.synthetic_count},
           {"total", m.total()},
           {"synthetic_fraction", m.synthetic_fraction},
           {"real_ids", m.real_ids},
           {"synthetic_ids", m.synthetic_ids}};
}

}  // namespace porcelain
