#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "porcelain/catalog.hpp"
#include "porcelain/planner.hpp"

namespace porcelain {

struct VesselPhrase {
  std::string name;    // "vase"
  std::string phrase;  // "vase for display only, no spout or handle, decorative vessel"
};

struct GlazePhrase {
  std::string name;     // "moon white"
  std::string details;  // "pale blue lighter than bluish green, thick opaque glaze"
};

/// Token -> phrase tables. Dynasty and kiln entries are the words printed
/// before "dynasty" and "kiln produced".
struct PromptLexicon {
  std::map<std::string, std::string> dynasty;
  std::map<std::string, std::string> kiln;
  std::map<std::string, VesselPhrase> vessel;
  std::map<std::string, GlazePhrase> glaze;

  /// Throws MissingLexiconEntry("<axis>: <token>") for an absent token.
  const std::string& dynasty_phrase(const std::string& token) const;
  const std::string& kiln_phrase(const std::string& token) const;
  const VesselPhrase& vessel_phrase(const std::string& token) const;
  const GlazePhrase& glaze_phrase(const std::string& token) const;

  /// {"dynasty": {tok: str}, "kiln": {tok: str},
  ///  "type": {tok: {"name", "phrase"}}, "glaze": {tok: {"name", "details"}}}
  static PromptLexicon from_json(const nlohmann::json& j);
  static PromptLexicon load(const std::filesystem::path& path);
};

struct GenerationParams {
  int steps = 20;
  double guidance = 7.0;
  std::string sampler = "DPM++ 2M Karras";
  int width = 512;
  int height = 512;
  int clip_skip = 2;
  double adapter_weight = 0.4;
  std::string adapter_name = "glazetype";
  std::string negative_prompt = "low quality, blurry, modern, damaged, cracked";

  static GenerationParams from_json(const nlohmann::json& j);  // missing keys keep defaults
};

nlohmann::ordered_json to_ordered_json(const GenerationParams& p);

enum class PromptForm {
  /// "<D> dynasty, <K> kiln produced, Chinese porcelain, <vessel phrase>, with <glaze> glaze with <details>"
  Generation,
  /// "<D> dynasty, <K> kiln produced, Chinese porcelain, <type>, <glaze> glaze with <details>"
  Caption,
};

/// Appends " <lora:NAME:W>" with W printed to one decimal when a weight is given.
std::string build_prompt(const ComboKey& combo, const PromptLexicon& lex,
                         std::optional<double> adapter_weight = std::nullopt,
                         PromptForm form = PromptForm::Generation,
                         std::string_view adapter_name = "glazetype");

/// The four axis phrases recovered from a generation-form prompt.
struct ParsedPrompt {
  std::string dynasty;
  std::string kiln;
  std::string vessel;
  std::string glaze_name;
  std::string glaze_details;
  std::optional<std::string> adapter_name;
  std::optional<double> adapter_weight;
};

/// Reference grammar for generation-form prompts. Vessel phrases must not
/// contain ", with ". Throws FormatError on anything else.
ParsedPrompt parse_prompt(std::string_view prompt);

struct GenerationJob {
  std::string id;
  ComboKey combo;
  std::uint64_t seed = 0;
  std::string prompt;
};

struct JobManifest {
  GenerationParams params;
  std::vector<GenerationJob> jobs;
  std::string plan_name;
  std::int64_t plan_total = 0;
  std::uint64_t plan_digest = 0;  // FNV-1a of the plan document
  std::int64_t seed = 0;

  /// One job per line: id, combo, seed, params, negative_prompt, prompt.
  std::string to_jsonl() const;
  std::string to_json_string() const;
};

/// One job per unit of quota, combos in canonical order. Job seeds come from
/// (seed, combo, index) and are unique within the manifest.
/// Throws EmptyPlan, MissingLexiconEntry, DomainError if the plan total differs
/// from its declared total.
JobManifest build_manifest(const AllocationPlan& plan, const PromptLexicon& lex,
                           const GenerationParams& params, std::int64_t seed);

}  // namespace porcelain
