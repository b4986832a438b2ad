#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/splitter.hpp"
#include "support.hpp"

using namespace porcelain;

namespace {

// Integer-only oracle: round(p * n / 100) half away from zero, floored at 1.
std::int64_t pct(std::int64_t n, std::int64_t p) { return std::max<std::int64_t>(1, (n * p + 50) / 100); }

SplitCounts oracle(std::int64_t n) {
  if (n == 1) return {1, 0, 0};
  if (n == 2) return {0, 1, 1};
  std::int64_t v = n < 10 ? pct(n, 15) : pct(n, 20);
  std::int64_t t = n < 10 ? pct(n, 15) : pct(n, 10);
  return {n - v - t, v, t};
}

Catalog random_catalog(std::size_t n, std::uint32_t seed) {
  const auto& v = test::bundled_vocab();
  std::mt19937 gen(seed);
  // Skewed combo choice over a limited pool gives every size category.
  std::vector<ComboKey> pool;
  for (int i = 0; i < 300; ++i) {
    pool.push_back({v.dynasty.entries()[gen() % 2].token, v.kiln.entries()[gen() % 17].token,
                    v.glaze.entries()[gen() % 16].token, v.type.entries()[gen() % 20].token});
  }
  std::geometric_distribution<int> geo(0.02);
  Catalog c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& k = pool[static_cast<std::size_t>(std::min(geo(gen), 299))];
    c.records.push_back({"R" + std::to_string(i), "img/" + std::to_string(i) + ".jpg", k.dynasty, k.kiln, k.glaze,
                         k.vessel_type, Source::PMTP, 0});
  }
  return c;
}

}  // namespace

TEST(Splitter, CategoryBoundaries) {
  EXPECT_EQ(classify_combo(1), SizeCategory::Singleton);
  EXPECT_EQ(classify_combo(2), SizeCategory::Doublet);
  EXPECT_EQ(classify_combo(3), SizeCategory::Small);
  EXPECT_EQ(classify_combo(9), SizeCategory::Small);
  EXPECT_EQ(classify_combo(10), SizeCategory::Standard);
  EXPECT_THROW(classify_combo(0), DomainError);
}

TEST(Splitter, ExamplesFromTheRules) {
  EXPECT_EQ(split_sizes(1), (SplitCounts{1, 0, 0}));
  EXPECT_EQ(split_sizes(2), (SplitCounts{0, 1, 1}));
  EXPECT_EQ(split_sizes(3), (SplitCounts{1, 1, 1}));
  EXPECT_EQ(split_sizes(10), (SplitCounts{7, 2, 1}));
  EXPECT_EQ(split_sizes(100), (SplitCounts{70, 20, 10}));
}

TEST(Splitter, ExhaustiveAgainstIntegerOracle) {
  for (std::int64_t n = 1; n <= 2000; ++n) {
    const auto s = split_sizes(n);
    EXPECT_EQ(s, oracle(n)) << "n=" << n;
    EXPECT_EQ(s.total(), n);
    EXPECT_GE(s.train, 0);
    if (n >= 2) {
      EXPECT_GE(s.val + s.test, 1);
    }
    if (n >= 3) {
      EXPECT_GE(s.val, 1);
      EXPECT_GE(s.test, 1);
    }
  }
}

TEST(Splitter, EmptyCatalogIsDomainError) {
  EXPECT_THROW(split_catalog(Catalog{}, 1), DomainError);
}

TEST(Splitter, ManifestHonoursPerComboCounts) {
  const auto c = random_catalog(5000, 3);
  const auto m = split_catalog(c, 42);
  EXPECT_EQ(m.assignments.size(), c.size());
  std::map<std::string, ComboKey> combo_of;
  for (const auto& r : c.records) combo_of.emplace(r.record_id, r.combo());
  std::map<ComboKey, SplitCounts> seen;
  std::set<std::string> ids;
  for (const auto& [id, s] : m.assignments) {
    EXPECT_TRUE(ids.insert(id).second) << "id assigned twice: " << id;
    auto& cnt = seen[combo_of.at(id)];
    (s == Split::Train ? cnt.train : s == Split::Val ? cnt.val : cnt.test)++;
  }
  std::map<SizeCategory, std::size_t> cats;
  for (const auto& [k, cs] : m.per_combo) {
    EXPECT_EQ(seen[k], cs.counts) << k.str();
    EXPECT_EQ(cs.counts, split_sizes(cs.counts.total()));
    ++cats[cs.category];
  }
  EXPECT_EQ(cats, m.category_counts());
  EXPECT_EQ(m.counts.total(), static_cast<std::int64_t>(c.size()));
}

TEST(Splitter, DeterministicAndSeedSensitive) {
  const auto c = random_catalog(10000, 11);
  const auto a = split_catalog(c, 42).to_json_string();
  const auto b = split_catalog(c, 42).to_json_string();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, split_catalog(c, 43).to_json_string());
}

TEST(Splitter, IndependentOfRecordOrder) {
  auto c = random_catalog(2000, 5);
  const auto a = split_catalog(c, 9);
  std::reverse(c.records.begin(), c.records.end());
  const auto b = split_catalog(c, 9);
  EXPECT_EQ(a.ids(Split::Train), b.ids(Split::Train));
  EXPECT_EQ(a.ids(Split::Test), b.ids(Split::Test));
}

TEST(Splitter, JsonRoundTripAndExport) {
  const auto c = random_catalog(500, 8);
  const auto m = split_catalog(c, 1);
  const auto back = SplitManifest::from_json_string(m.to_json_string());
  EXPECT_EQ(back.to_json_string(), m.to_json_string());
  const auto dir = test::scratch_dir("split_export");
  m.export_id_lists(dir);
  EXPECT_EQ(io::read_lines(dir / "train.txt"), m.ids(Split::Train));
  EXPECT_EQ(io::read_lines(dir / "val.txt"), m.ids(Split::Val));
  EXPECT_EQ(io::read_lines(dir / "test.txt"), m.ids(Split::Test));
}
