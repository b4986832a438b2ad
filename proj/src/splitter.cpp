#include "porcelain/splitter.hpp"

#include <algorithm>
#include <cmath>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/rng.hpp"

namespace porcelain {

std::string_view category_name(SizeCategory c) {
  switch (c) {
    case SizeCategory::Singleton: return "singleton";
    case SizeCategory::Doublet: return "doublet";
    case SizeCategory::Small: return "small";
    case SizeCategory::Standard: return "standard";
  }
  return "?";
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

SizeCategory classify_combo(std::int64_t n) {
  if (n < 1) throw DomainError("combination size must be >= 1, got " + std::to_string(n));
  if (n == 1) return SizeCategory::Singleton;
  if (n == 2) return SizeCategory::Doublet;
  if (n < 10) return SizeCategory::Small;
  return SizeCategory::Standard;
}

SplitCounts split_sizes(std::int64_t n, SizeCategory category) {
  switch (category) {
    case SizeCategory::Singleton: return {n, 0, 0};
    case SizeCategory::Doublet: return {n - 2, 1, 1};
    case SizeCategory::Small:
    case SizeCategory::Standard: break;
  }
  const SplitRatios r = category == SizeCategory::Small ? kSmallRatios : kStandardRatios;
  const double dn = static_cast<double>(n);
  std::int64_t val = std::max<std::int64_t>(1, std::llround(r.val * dn));
  std::int64_t test = std::max<std::int64_t>(1, std::llround(r.test * dn));
  while (n - val - test < 0 && val > 1) --val;
  while (n - val - test < 0 && test > 1) --test;
  return {std::max<std::int64_t>(0, n - val - test), val, test};
}

std::map<SizeCategory, std::size_t> SplitManifest::category_counts() const {
  std::map<SizeCategory, std::size_t> out;
  for (const auto& [k, cs] : per_combo) ++out[cs.category];
  return out;
}

std::vector<std::string> SplitManifest::ids(Split which) const {
  std::vector<std::string> out;
  for (const auto& [id, s] : assignments) {
    if (s == which) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void SplitManifest::export_id_lists(const std::filesystem::path& dir) const {
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    std::string body;
    for (const auto& id : ids(s)) {
      body += id;
      body += '\n';
    }
    io::write_file_atomic(dir / (std::string(split_name(s)) + ".txt"), body);
  }
}

SplitManifest split_catalog(const Catalog& catalog, std::int64_t seed) {
  if (catalog.empty()) throw DomainError("cannot split an empty catalog");

  std::map<ComboKey, std::vector<std::string>> groups;
  for (const auto& r : catalog.records) groups[r.combo()].push_back(r.record_id);

  struct Work {
    const ComboKey* key;
    std::vector<std::string>* ids;
    ComboSplit split;
  };
  std::vector<Work> work;
  work.reserve(groups.size());
  for (auto& [key, ids] : groups) work.push_back({&key, &ids, {}});

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(work.size()); ++w) {
    auto& item = work[w];
    auto& ids = *item.ids;
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 gen(rng::derive_seed(seed, item.key->str()));
    rng::shuffle(ids, gen);
    const auto n = static_cast<std::int64_t>(ids.size());
    item.split.category = classify_combo(n);
    item.split.counts = split_sizes(n, item.split.category);
  }

  SplitManifest m;
  m.seed = seed;
  m.assignments.reserve(catalog.size());
  for (const auto& item : work) {
    const auto& c = item.split.counts;
    std::size_t i = 0;
    for (; i < static_cast<std::size_t>(c.train); ++i) m.assignments.emplace_back((*item.ids)[i], Split::Train);
    for (; i < static_cast<std::size_t>(c.train + c.val); ++i) m.assignments.emplace_back((*item.ids)[i], Split::Val);
    for (; i < item.ids->size(); ++i) m.assignments.emplace_back((*item.ids)[i], Split::Test);
    m.per_combo.emplace(*item.key, item.split);
    m.counts.train += c.train;
    m.counts.val += c.val;
    m.counts.test += c.test;
  }
  return m;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const SplitManifest& m) {
  j = nlohmann::json::parse(m.to_json_string());
}

std::string SplitManifest::to_json_string() const {
  // ordered_json keeps assignment order and field order stable in the file.
  nlohmann::ordered_json out;
  out["seed"] = seed;
  out["counts"] = {{"train", counts.train}, {"val", counts.val}, {"test", counts.test}};
  auto cc = category_counts();
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (auto c : {SizeCategory::Singleton, SizeCategory::Doublet, SizeCategory::Small,
                 SizeCategory::Standard}) {
    cats[std::string(category_name(c))] = cc.count(c) ? cc.at(c) : 0;
  }
  out["category_counts"] = cats;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [k, cs] : per_combo) {
    per[k.str()] = {{"category", category_name(cs.category)},
                    {"train", cs.counts.train},
                    {"val", cs.counts.val},
                    {"test", cs.counts.test}};
  }
  out["per_combo"] = per;
  nlohmann::ordered_json assign = nlohmann::ordered_json::array();
  for (const auto& [id, s] : assignments) assign.push_back({id, split_name(s)});
  out["assignments"] = assign;
  return out.dump(1) + "\n";
}

SplitManifest SplitManifest::from_json_string(std::string_view text) {
  SplitManifest m;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest is not valid JSON: ") + e.what());
  }
  try {
    m.seed = j.at("seed").get<std::int64_t>();
    for (const auto& a : j.at("assignments")) {
      const auto id = a.at(0).get<std::string>();
      const auto s = a.at(1).get<std::string>();
      Split split;
      if (s == "train") split = Split::Train;
      else if (s == "val") split = Split::Val;
      else if (s == "test") split = Split::Test;
      else throw FormatError("unknown split '" + s + "' for record " + id);
      m.assignments.emplace_back(id, split);
      if (split == Split::Train) ++m.counts.train;
      else if (split == Split::Val) ++m.counts.val;
      else ++m.counts.test;
    }
    for (const auto& [k, v] : j.at("per_combo").items()) {
      ComboSplit cs;
      cs.counts = {v.at("train").get<std::int64_t>(), v.at("val").get<std::int64_t>(),
                   v.at("test").get<std::int64_t>()};
      cs.category = classify_combo(cs.counts.total());
      m.per_combo.emplace(ComboKey::parse(k), cs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest is missing fields: ") + e.what());
  }
  return m;
}

}  // namespace porcelain
