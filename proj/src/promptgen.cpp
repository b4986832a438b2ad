#include "porcelain/promptgen.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/rng.hpp"

namespace porcelain {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename Map>
const typename Map::mapped_type& lookup(const Map& m, std::string_view axis, const std::string& token) {
  auto it = m.find(token);
  if (it == m.end()) {
    throw MissingLexiconEntry(std::string(axis) + ": " + token);
  }
  return it->second;
}

std::string one_decimal(double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", w);
  return buf;
}

constexpr std::string_view kBase = " kiln produced, Chinese porcelain, ";
constexpr std::string_view kDynasty = " dynasty, ";
constexpr std::string_view kWith = ", with ";
constexpr std::string_view kGlazeWith = " glaze with ";

}  // namespace

const std::string& PromptLexicon::dynasty_phrase(const std::string& t) const {
  return lookup(dynasty, "dynasty", t);
}
const std::string& PromptLexicon::kiln_phrase(const std::string& t) const {
  return lookup(kiln, "kiln", t);
}
const VesselPhrase& PromptLexicon::vessel_phrase(const std::string& t) const {
  return lookup(vessel, "type", t);
}
const GlazePhrase& PromptLexicon::glaze_phrase(const std::string& t) const {
  return lookup(glaze, "glaze", t);
}

PromptLexicon PromptLexicon::from_json(const json& j) {
  PromptLexicon lex;
  try {
    for (const auto& [k, v] : j.at("dynasty").items()) lex.dynasty[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("kiln").items()) lex.kiln[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("type").items()) {
      lex.vessel[k] = {v.at("name").get<std::string>(), v.at("phrase").get<std::string>()};
      if (lex.vessel[k].phrase.find(kWith) != std::string::npos) {
        throw FormatError("type phrase for " + k + " must not contain ', with '");
      }
    }
    for (const auto& [k, v] : j.at("glaze").items()) {
      lex.glaze[k] = {v.at("name").get<std::string>(), v.at("details").get<std::string>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("lexicon: ") + e.what());
  }
  return lex;
}

PromptLexicon PromptLexicon::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(io::read_file(path)));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

GenerationParams GenerationParams::from_json(const json& j) {
  GenerationParams p;
  try {
    p.steps = j.value("steps", p.steps);
    p.guidance = j.value("guidance", p.guidance);
    p.sampler = j.value("sampler", p.sampler);
    p.width = j.value("width", p.width);
    p.height = j.value("height", p.height);
    p.clip_skip = j.value("clip_skip", p.clip_skip);
    p.adapter_weight = j.value("adapter_weight", p.adapter_weight);
    p.adapter_name = j.value("adapter_name", p.adapter_name);
    p.negative_prompt = j.value("negative_prompt", p.negative_prompt);
  } catch (const json::exception& e) {
    throw FormatError(std::string("generation params: ") + e.what());
  }
  return p;
}

ordered_json to_ordered_json(const GenerationParams& p) {
  ordered_json j;
  j["steps"] = p.steps;
  j["guidance"] = p.guidance;
  j["sampler"] = p.sampler;
  j["width"] = p.width;
  j["height"] = p.height;
  j["clip_skip"] = p.clip_skip;
  j["adapter_weight"] = p.adapter_weight;
  j["adapter_name"] = p.adapter_name;
  return j;
}

std::string build_prompt(const ComboKey& combo, const PromptLexicon& lex,
                         std::optional<double> adapter_weight, PromptForm form,
                         std::string_view adapter_name) {
  const auto& dy = lex.dynasty_phrase(combo.dynasty);
  const auto& kl = lex.kiln_phrase(combo.kiln);
  const auto& gl = lex.glaze_phrase(combo.glaze);
  const auto& tp = lex.vessel_phrase(combo.vessel_type);

  std::string s;
  s += dy;
  s += kDynasty;
  s += kl;
  s += kBase;
  if (form == PromptForm::Generation) {
    s += tp.phrase;
    s += kWith;
  } else {
    s += tp.name;
    s += ", ";
  }
  s += gl.name;
  s += kGlazeWith;
  s += gl.details;
  if (adapter_weight) {
    if (!std::isfinite(*adapter_weight)) throw DomainError("adapter weight must be finite");
    s += " <lora:";
    s += adapter_name;
    s += ':';
    s += one_decimal(*adapter_weight);
    s += '>';
  }
  return s;
}

ParsedPrompt parse_prompt(std::string_view p) {
  ParsedPrompt out;
  auto fail = [&](const char* why) {
    return FormatError(std::string("prompt does not match the grammar (") + why + "): " +
                       std::string(p));
  };

  if (!p.empty() && p.back() == '>') {
    const auto open = p.rfind(" <lora:");
    if (open == std::string_view::npos) throw fail("unbalanced adapter tag");
    auto tag = p.substr(open + 7, p.size() - open - 8);
    const auto colon = tag.rfind(':');
    if (colon == std::string_view::npos) throw fail("adapter tag needs name:weight");
    double w;
    if (!io::parse_double(tag.substr(colon + 1), w)) throw fail("bad adapter weight");
    out.adapter_name = std::string(tag.substr(0, colon));
    out.adapter_weight = w;
    p = p.substr(0, open);
  }

  const auto d = p.find(kDynasty);
  if (d == std::string_view::npos) throw fail("missing dynasty clause");
  out.dynasty = std::string(p.substr(0, d));
  p = p.substr(d + kDynasty.size());

  const auto k = p.find(kBase);
  if (k == std::string_view::npos) throw fail("missing kiln clause");
  out.kiln = std::string(p.substr(0, k));
  p = p.substr(k + kBase.size());

  const auto w = p.find(kWith);
  if (w == std::string_view::npos) throw fail("missing glaze clause");
  out.vessel = std::string(p.substr(0, w));
  p = p.substr(w + kWith.size());

  const auto g = p.find(kGlazeWith);
  if (g == std::string_view::npos) throw fail("glaze clause needs '<name> glaze with <details>'");
  out.glaze_name = std::string(p.substr(0, g));
  out.glaze_details = std::string(p.substr(g + kGlazeWith.size()));

  if (out.dynasty.empty() || out.kiln.empty() || out.vessel.empty() || out.glaze_name.empty()) {
    throw fail("empty component");
  }
  return out;
}

// ---------------------------------------------------------------------------

JobManifest build_manifest(const AllocationPlan& plan, const PromptLexicon& lex,
                           const GenerationParams& params, std::int64_t seed) {
  const auto total = plan.total();
  if (total <= 0) throw EmptyPlan("allocation plan has no quota");
  if (total != plan.declared_total) {
    throw DomainError("plan total " + std::to_string(total) + " differs from its declared total " +
                      std::to_string(plan.declared_total) + "; reconcile it first");
  }

  JobManifest m;
  m.params = params;
  m.plan_name = plan.name;
  m.plan_total = total;
  m.plan_digest = rng::fnv1a64(plan.to_json_string());
  m.seed = seed;
  m.jobs.reserve(static_cast<std::size_t>(total));

  std::unordered_set<std::uint64_t> used;
  used.reserve(static_cast<std::size_t>(total));
  std::size_t serial = 0;
  for (const auto& [combo, quota] : plan.per_combo_quota) {
    const auto prompt = build_prompt(combo, lex, params.adapter_weight, PromptForm::Generation,
                                     params.adapter_name);
    const auto label = combo.str();
    for (std::int64_t i = 0; i < quota; ++i) {
      std::uint64_t s = rng::derive_seed(seed, label + "#" + std::to_string(i));
      // Collisions are vanishingly rare; walk the splitmix sequence until free.
      while (!used.insert(s).second) s = rng::splitmix64(s);
      char id[32];
      std::snprintf(id, sizeof id, "job-%06zu", ++serial);
      m.jobs.push_back({id, combo, s, prompt});
    }
  }
  return m;
}

std::string JobManifest::to_jsonl() const {
  const auto p = to_ordered_json(params);
  std::string out;
  for (const auto& job : jobs) {
    ordered_json j;
    j["id"] = job.id;
    j["combo"] = job.combo.str();
    j["seed"] = job.seed;
    j["params"] = p;
    j["negative_prompt"] = params.negative_prompt;
    j["prompt"] = job.prompt;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string JobManifest::to_json_string() const {
  ordered_json j;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(plan_digest));
  j["plan"] = {{"name", plan_name}, {"total", plan_total}, {"digest", digest}};
  j["seed"] = seed;
  j["params"] = to_ordered_json(params);
  j["negative_prompt"] = params.negative_prompt;
  j["job_count"] = jobs.size();
  auto arr = ordered_json::array();
  for (const auto& job : jobs) {
    ordered_json r;
    r["id"] = job.id;
    r["combo"] = job.combo.str();
    r["seed"] = job.seed;
    r["prompt"] = job.prompt;
    arr.push_back(std::move(r));
  }
  j["jobs"] = std::move(arr);
  return j.dump(1) + "\n";
}

}  // namespace porcelain
