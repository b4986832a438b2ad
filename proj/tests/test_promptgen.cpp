#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "porcelain/errors.hpp"
#include "porcelain/promptgen.hpp"
#include "support.hpp"

using namespace porcelain;

namespace {

const PromptLexicon& lexicon() {
  static const PromptLexicon lex = PromptLexicon::load(test::data_dir() / "lexicon.json");
  return lex;
}

const ComboKey kVase{"Yuan", "Jun", "MoonWhite", "Vase"};

const char* kFullExample =
    "Yuan dynasty, Jun kiln produced, Chinese porcelain, vase for display only, no spout or handle, "
    "decorative vessel, with moon white glaze with pale blue lighter than bluish green, thick opaque "
    "glaze <lora:glazetype:0.4>";

AllocationPlan dataset_a() {
  const auto hist = ComboHistogram::load(test::data_dir() / "demo" / "histogram.csv");
  return reconcile(build_allocation(AllocationSpec::load(test::data_dir() / "specs" / "dataset_a.json"), hist),
                   570);
}

}  // namespace

TEST(Prompt, ByteExactExample) {
  EXPECT_EQ(build_prompt(kVase, lexicon(), 0.4), kFullExample);
  const std::string full = kFullExample;
  EXPECT_EQ(build_prompt(kVase, lexicon()), full.substr(0, full.size() - std::string(" <lora:glazetype:0.4>").size()));
}

TEST(Prompt, WeightFormatting) {
  EXPECT_NE(build_prompt(kVase, lexicon(), 1.0).find("<lora:glazetype:1.0>"), std::string::npos);
  EXPECT_NE(build_prompt(kVase, lexicon(), 0.75, PromptForm::Generation, "other").find("<lora:other:0.8>"),
            std::string::npos);
}

TEST(Prompt, CaptionForm) {
  EXPECT_EQ(build_prompt(kVase, lexicon(), std::nullopt, PromptForm::Caption),
            "Yuan dynasty, Jun kiln produced, Chinese porcelain, vase, moon white glaze with pale blue "
            "lighter than bluish green, thick opaque glaze");
}

TEST(Prompt, MissingLexiconEntryNamesAxisAndToken) {
  PromptLexicon lex = lexicon();
  lex.glaze.erase("MoonWhite");
  try {
    build_prompt(kVase, lex);
    FAIL() << "expected MissingLexiconEntry";
  } catch (const MissingLexiconEntry& e) {
    EXPECT_STREQ(e.what(), "glaze: MoonWhite");
  }
  EXPECT_THROW(build_prompt({"Ming", "Jun", "MoonWhite", "Vase"}, lexicon()), MissingLexiconEntry);
}

TEST(Prompt, ParseRoundTrip) {
  const auto p = parse_prompt(kFullExample);
  EXPECT_EQ(p.dynasty, "Yuan");
  EXPECT_EQ(p.kiln, "Jun");
  EXPECT_EQ(p.vessel, lexicon().vessel.at("Vase").phrase);
  EXPECT_EQ(p.glaze_name, "moon white");
  EXPECT_EQ(p.glaze_details, "pale blue lighter than bluish green, thick opaque glaze");
  EXPECT_EQ(p.adapter_name, "glazetype");
  EXPECT_EQ(p.adapter_weight, 0.4);
  EXPECT_FALSE(parse_prompt(build_prompt(kVase, lexicon())).adapter_weight.has_value());
  EXPECT_THROW(parse_prompt("Yuan dynasty, something else"), FormatError);
}

TEST(Prompt, InjectiveOverEveryVocabularyCombination) {
  const auto& v = test::bundled_vocab();
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const auto& d : v.dynasty.entries())
    for (const auto& k : v.kiln.entries())
      for (const auto& g : v.glaze.entries())
        for (const auto& t : v.type.entries()) {
          const ComboKey c{d.token, k.token, g.token, t.token};
          const auto prompt = build_prompt(c, lexicon(), 0.4);
          seen.insert(prompt);
          ++n;
          const auto parsed = parse_prompt(prompt);
          ASSERT_EQ(parsed.dynasty, lexicon().dynasty_phrase(d.token));
          ASSERT_EQ(parsed.kiln, lexicon().kiln_phrase(k.token));
          ASSERT_EQ(parsed.vessel, lexicon().vessel_phrase(t.token).phrase);
          ASSERT_EQ(parsed.glaze_name, lexicon().glaze_phrase(g.token).name);
        }
  EXPECT_EQ(n, v.theoretical_combinations());
  EXPECT_EQ(seen.size(), n);
}

TEST(Params, DefaultsAndOverrides) {
  const GenerationParams d;
  EXPECT_EQ(d.steps, 20);
  EXPECT_EQ(d.guidance, 7.0);
  EXPECT_EQ(d.sampler, "DPM++ 2M Karras");
  EXPECT_EQ(d.width, 512);
  EXPECT_EQ(d.height, 512);
  EXPECT_EQ(d.clip_skip, 2);
  EXPECT_EQ(d.adapter_weight, 0.4);
  EXPECT_EQ(d.negative_prompt, "low quality, blurry, modern, damaged, cracked");
  const auto o = GenerationParams::from_json(nlohmann::json{{"steps", 30}, {"negative_prompt", "x"}});
  EXPECT_EQ(o.steps, 30);
  EXPECT_EQ(o.negative_prompt, "x");
  EXPECT_EQ(o.guidance, 7.0);
}

TEST(Manifest, OneJobPerQuotaUnit) {
  const auto plan = dataset_a();
  const auto m = build_manifest(plan, lexicon(), {}, 42);
  ASSERT_EQ(m.jobs.size(), 570u);
  std::map<ComboKey, std::int64_t> per_combo;
  std::set<std::uint64_t> seeds;
  std::set<std::string> ids;
  for (const auto& j : m.jobs) {
    ++per_combo[j.combo];
    seeds.insert(j.seed);
    ids.insert(j.id);
    EXPECT_EQ(j.prompt, build_prompt(j.combo, lexicon(), 0.4));
  }
  EXPECT_EQ(per_combo, plan.per_combo_quota);
  EXPECT_EQ(seeds.size(), 570u);
  EXPECT_EQ(ids.size(), 570u);
  EXPECT_EQ(m.jobs.front().id, "job-000001");
  EXPECT_EQ(m.jobs.back().id, "job-000570");
}

TEST(Manifest, DeterministicAndSeedSensitive) {
  const auto plan = dataset_a();
  const auto a = build_manifest(plan, lexicon(), {}, 42);
  const auto b = build_manifest(plan, lexicon(), {}, 42);
  EXPECT_EQ(a.to_jsonl(), b.to_jsonl());
  EXPECT_EQ(a.to_json_string(), b.to_json_string());
  const auto c = build_manifest(plan, lexicon(), {}, 43);
  EXPECT_NE(a.jobs[0].seed, c.jobs[0].seed);

  std::istringstream lines(a.to_jsonl());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("negative_prompt"), "low quality, blurry, modern, damaged, cracked");
    ++n;
  }
  EXPECT_EQ(n, 570u);
}

TEST(Manifest, Errors) {
  EXPECT_THROW(build_manifest(AllocationPlan{}, lexicon(), {}, 1), EmptyPlan);
  auto plan = dataset_a();
  plan.declared_total = 600;
  EXPECT_THROW(build_manifest(plan, lexicon(), {}, 1), DomainError);
  PromptLexicon lex = lexicon();
  lex.vessel.erase("Vase");
  EXPECT_THROW(build_manifest(dataset_a(), lex, {}, 1), MissingLexiconEntry);
}

TEST(Lexicon, RejectsAmbiguousVesselPhrase) {
  auto j = nlohmann::json::parse(R"({"dynasty":{}, "kiln":{}, "glaze":{},
    "type": {"Vase": {"name": "vase", "phrase": "vase, with a lid"}}})");
  EXPECT_THROW(PromptLexicon::from_json(j), FormatError);
}
