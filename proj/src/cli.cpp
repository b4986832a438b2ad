#include "porcelain/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "porcelain/balance.hpp"
#include "porcelain/catalog.hpp"
#include "porcelain/errors.hpp"
#include "porcelain/evalkit.hpp"
#include "porcelain/io.hpp"
#include "porcelain/planner.hpp"
#include "porcelain/promptgen.hpp"
#include "porcelain/splitter.hpp"

#ifndef PORCELAIN_VERSION
#define PORCELAIN_VERSION "0.0.0"
#endif
#ifndef PORCELAIN_DATA_DIR
#define PORCELAIN_DATA_DIR "data"
#endif

namespace porcelain::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Pipeline config
// ---------------------------------------------------------------------------

namespace {

fs::path resolve(const fs::path& base, const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
  PipelineConfig c;
  try {
    c.catalog = resolve(base, j, "catalog");
    c.vocab_dir = resolve(base, j, "vocab_dir");
    c.lexicon = resolve(base, j, "lexicon");
    c.allocation_spec = resolve(base, j, "allocation_spec");
    c.gate_metadata = resolve(base, j, "gate_metadata");
    c.out_dir = resolve(base, j, "out_dir");
    c.seed = j.value("seed", c.seed);
    c.weighting.beta = j.value("beta", c.weighting.beta);
    c.weighting.weight_cap = j.value("cap", c.weighting.weight_cap);
    if (j.contains("normalization")) {
      c.weighting.normalization = parse_normalization(j.at("normalization").get<std::string>());
    }
    c.aug_threshold = j.value("aug_threshold", c.aug_threshold);
    c.aug_target = j.value("aug_target", c.aug_target);
    if (j.contains("synthetic_total") && !j.at("synthetic_total").is_null()) {
      c.synthetic_total = j.at("synthetic_total").get<std::int64_t>();
    }
    if (j.contains("gate")) c.gate = GateConfig::from_json(j.at("gate"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("pipeline config: ") + e.what());
  }
  if (c.catalog.empty()) throw FormatError("pipeline config needs 'catalog'");
  if (c.vocab_dir.empty()) throw FormatError("pipeline config needs 'vocab_dir'");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

json PipelineConfig::to_json() const {
  auto str = [](const fs::path& p) { return p.empty() ? json() : json(p.generic_string()); };
  return json{{"catalog", str(catalog)},
              {"vocab_dir", str(vocab_dir)},
              {"lexicon", str(lexicon)},
              {"allocation_spec", str(allocation_spec)},
              {"gate_metadata", str(gate_metadata)},
              {"out_dir", str(out_dir)},
              {"seed", seed},
              {"beta", weighting.beta},
              {"cap", weighting.weight_cap},
              {"normalization", std::string(normalization_name(weighting.normalization))},
              {"aug_threshold", aug_threshold},
              {"aug_target", aug_target},
              {"synthetic_total", synthetic_total ? json(*synthetic_total) : json()},
              {"gate", porcelain::to_json(gate)}};
}


// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

class Io {
 public:
  Io(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void log(const std::string& msg) { err_ << msg << "\n"; }

  /// Explicit --out wins, then $PORCELAIN_OUT_DIR/<default_name>, then stdout.
  void emit(const std::string& out_opt, std::string_view default_name, const std::string& content) {
    fs::path target;
    if (!out_opt.empty()) {
      target = out_opt;
    } else if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) {
      target = fs::path(dir) / std::string(default_name);
    }
    if (target.empty()) {
      out_ << content;
      out_.flush();
      return;
    }
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    io::write_file_atomic(target, content);
    log("wrote " + target.generic_string());
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path default_vocab_dir() {
  if (const char* v = std::getenv("PORCELAIN_VOCAB_DIR"); v && *v) return v;
  return fs::path(PORCELAIN_DATA_DIR) / "vocab";
}

json parse_json_file(const fs::path& p) {
  try {
    return json::parse(io::read_file(p));
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

/// Ids from a plain list (one per line) or JSON lines carrying an "id" field.
std::vector<std::string> read_id_list(const fs::path& p) {
  std::vector<std::string> ids;
  for (auto& line : io::read_lines(p)) {
    if (line.front() == '{') {
      try {
        ids.push_back(json::parse(line).at("id").get<std::string>());
      } catch (const json::exception& e) {
        throw FormatError(p.string() + ": " + e.what());
      }
    } else {
      ids.push_back(std::move(line));
    }
  }
  return ids;
}

// validate -------------------------------------------------------------------

struct ValidateOpts {
  std::string catalog, vocab, out, histogram_out;
  bool strict = false;
};

int cmd_validate(const ValidateOpts& o, Io& io_) {
  const auto vocab = VocabularySet::load(o.vocab.empty() ? default_vocab_dir() : fs::path(o.vocab));
  const auto catalog = parse_catalog(o.catalog, vocab);
  const auto report = validate(catalog, vocab);
  for (const auto& f : report.findings) io_.log(f.to_string());
  io_.emit(o.out, "validation.json", dump(report));
  if (!o.histogram_out.empty()) io_.emit(o.histogram_out, "histogram.csv", combo_histogram(catalog).to_csv());
  if (o.strict && !report.clean()) {
    io_.log(std::to_string(report.findings.size()) + " finding(s) in strict mode");
    return kExitDataError;
  }
  return kExitOk;
}

// split ----------------------------------------------------------------------

struct SplitOpts {
  std::string catalog, vocab, out, export_dir;
  std::int64_t seed = 42;
};

int cmd_split(const SplitOpts& o, Io& io_) {
  const auto vocab = VocabularySet::load(o.vocab.empty() ? default_vocab_dir() : fs::path(o.vocab));
  const auto catalog = parse_catalog(o.catalog, vocab);
  for (const auto& d : catalog.diagnostics) io_.log(d.to_string());
  const auto m = split_catalog(catalog, o.seed);
  io_.emit(o.out, "split.json", m.to_json_string());
  if (!o.export_dir.empty()) m.export_id_lists(o.export_dir);
  io_.log("split " + std::to_string(m.counts.total()) + " records: train " + std::to_string(m.counts.train) +
          ", val " + std::to_string(m.counts.val) + ", test " + std::to_string(m.counts.test));
  return kExitOk;
}

// analyze --------------------------------------------------------------------

struct AnalyzeOpts {
  std::string counts, baseline, out, format = "json";
};

int cmd_analyze(const AnalyzeOpts& o, Io& io_) {
  const auto after = CountDistribution::load(o.counts);
  std::string content;
  if (o.baseline.empty()) {
    const auto r = balance_report(after);
    content = o.format == "table" ? to_table(r) : dump(r);
  } else {
    const auto r = balance_report(CountDistribution::load(o.baseline), after);
    content = o.format == "table" ? r.to_table() : dump(r);
  }
  io_.emit(o.out, o.format == "table" ? "balance.txt" : "balance.json", content);
  return kExitOk;
}

// weights --------------------------------------------------------------------

struct WeightsOpts {
  std::string counts, out, normalization = "mean_one";
  double beta = 0.999;
  double cap = 10.0;
};

int cmd_weights(const WeightsOpts& o, Io& io_) {
  const auto counts = CountDistribution::load(o.counts);
  WeightingConfig cfg{o.beta, o.cap, parse_normalization(o.normalization)};
  const auto w = effective_number_weights(counts, cfg);
  json j = w;
  j["beta"] = cfg.beta;
  j["cap"] = cfg.weight_cap;
  j["normalization"] = std::string(normalization_name(cfg.normalization));
  const auto probs = inv_sqrt_sampling_probs(counts);
  json sp = json::object();
  for (std::size_t i = 0; i < probs.size(); ++i) sp[counts.labels[i]] = probs[i];
  j["sampling_probs"] = sp;
  if (w.capped) io_.log(std::to_string(w.capped) + " weight(s) clipped at the cap");
  io_.emit(o.out, "weights.json", dump(j));
  return kExitOk;
}

// plan -----------------------------------------------------------------------

struct PlanOpts {
  std::string spec, histogram, out, split, synthetic;
  std::optional<std::int64_t> total;
  std::int64_t threshold = 50;
  std::int64_t target = 100;
};

int cmd_plan_traditional(const PlanOpts& o, Io& io_) {
  const auto plan = traditional_aug_plan(ComboHistogram::load(o.histogram), o.threshold, o.target);
  io_.log(std::to_string(plan.per_combo.size()) + " combination(s) need " +
          std::to_string(plan.total_copies()) + " augmented copies");
  io_.emit(o.out, "traditional_plan.json", dump(plan));
  return kExitOk;
}

AllocationPlan make_synthetic_plan(const fs::path& spec_path, const ComboHistogram& hist,
                                   std::optional<std::int64_t> total, Io& io_) {
  const auto spec = AllocationSpec::load(spec_path);
  auto plan = build_allocation(spec, hist);
  const auto target = total ? *total : plan.declared_total;
  if (plan.total() != target) {
    io_.log("reconciling plan total " + std::to_string(plan.total()) + " to " + std::to_string(target));
    plan = reconcile(plan, target);
  }
  return plan;
}

int cmd_plan_synthetic(const PlanOpts& o, Io& io_) {
  const auto hist = o.histogram.empty() ? ComboHistogram{} : ComboHistogram::load(o.histogram);
  const auto plan = make_synthetic_plan(o.spec, hist, o.total, io_);
  for (const auto& t : plan.tiers) {
    io_.log("tier " + std::to_string(t.priority) + " " + t.name + ": " + std::to_string(t.tier_total));
  }
  io_.log("total " + std::to_string(plan.total()));
  io_.emit(o.out, "synthetic_plan.json", plan.to_json_string());
  return kExitOk;
}

int cmd_plan_mix(const PlanOpts& o, Io& io_) {
  const auto manifest = SplitManifest::from_json_string(io::read_file(o.split));
  const auto mix = compose_mix(manifest.ids(Split::Train),
                               o.synthetic.empty() ? std::vector<std::string>{} : read_id_list(o.synthetic));
  io_.log("mix of " + std::to_string(mix.total()) + " items, synthetic fraction " +
          std::to_string(mix.synthetic_fraction));
  io_.emit(o.out, "mix.json", dump(mix));
  return kExitOk;
}

// prompts --------------------------------------------------------------------

struct PromptOpts {
  std::string plan, lexicon, params, out, format = "jsonl";
  std::int64_t seed = 42;
};

int cmd_prompts(const PromptOpts& o, Io& io_) {
  const auto plan = AllocationPlan::load(o.plan);
  const auto lex = PromptLexicon::load(o.lexicon);
  const auto params = o.params.empty() ? GenerationParams{} : GenerationParams::from_json(parse_json_file(o.params));
  const auto m = build_manifest(plan, lex, params, o.seed);
  io_.log(std::to_string(m.jobs.size()) + " generation job(s)");
  if (o.format == "json") {
    io_.emit(o.out, "jobs.json", m.to_json_string());
  } else {
    io_.emit(o.out, "jobs.jsonl", m.to_jsonl());
  }
  return kExitOk;
}

// gate -----------------------------------------------------------------------

struct GateOpts {
  std::string embeddings, real, synthetic, metadata, config, decisions, out;
};

int cmd_gate_stats(const GateOpts& o, Io& io_) {
  auto e = EmbeddingSet::read(o.embeddings);
  io_.emit(o.out, "stats.json", dump(to_json_summary(gaussian_stats(e))));
  return kExitOk;
}

int cmd_gate_fid(const GateOpts& o, Io& io_) {
  const auto a = gaussian_stats(EmbeddingSet::read(o.real));
  const auto b = gaussian_stats(EmbeddingSet::read(o.synthetic));
  const double fid = frechet_distance(a, b);
  io_.log("FID " + std::to_string(fid));
  io_.emit(o.out, "fid.json",
           dump(json{{"fid", fid}, {"real", to_json_summary(a)}, {"synthetic", to_json_summary(b)}}));
  return kExitOk;
}

int cmd_gate_check(const GateOpts& o, Io& io_) {
  const auto cfg = o.config.empty() ? GateConfig{} : GateConfig::from_json(parse_json_file(o.config));
  const auto items = read_metadata_csv(io::read_file(o.metadata));
  std::vector<GateDecision> decisions;
  decisions.reserve(items.size());
  for (const auto& m : items) decisions.push_back(auto_check(m, cfg));
  json j{{"config", porcelain::to_json(cfg)}, {"decisions", decisions}};
  if (!decisions.empty()) j["summary"] = gate_report(decisions);
  io_.emit(o.out, "gate_decisions.json", dump(j));
  return kExitOk;
}

int cmd_gate_report(const GateOpts& o, Io& io_) {
  const auto j = parse_json_file(o.decisions);
  std::vector<GateDecision> decisions;
  try {
    decisions = (j.is_array() ? j : j.at("decisions")).get<std::vector<GateDecision>>();
  } catch (const json::exception& e) {
    throw FormatError(o.decisions + ": " + e.what());
  }
  const auto s = gate_report(decisions);
  io_.log("pass rate " + std::to_string(s.pass_rate_percent) + "%");
  io_.emit(o.out, "gate_report.json", dump(s));
  return kExitOk;
}

// evaluate / compare / aggregate ---------------------------------------------

struct EvalOpts {
  std::string preds, truth, task, labels, out, format = "json";
  std::vector<std::size_t> topk{1, 5};
};

int cmd_evaluate(const EvalOpts& o, Io& io_) {
  const Task task = parse_task(o.task);
  std::vector<std::string> labels;
  if (!o.labels.empty()) labels = io::read_lines(o.labels);

  const auto text = io::read_file(o.preds);
  const auto rows = io::parse_csv(text);
  if (rows.empty()) throw EmptyInput(o.preds + " has no predictions");
  const std::size_t width = rows.front().fields.size();
  auto all_int = [&](std::size_t cols) {
    return std::all_of(rows.begin(), rows.end(), [&](const io::CsvRow& r) {
      if (r.fields.size() != cols) return false;
      long long v;
      return std::all_of(r.fields.begin(), r.fields.end(), [&](const std::string& f) { return io::parse_int(f, v); });
    });
  };

  EvalReport report;
  const std::string name(task_name(task));
  auto class_count = [&](const std::vector<int>& a, const std::vector<int>& b) {
    if (!labels.empty()) return labels.size();
    int mx = 0;
    for (const auto* v : {&a, &b}) {
      for (int x : *v) mx = std::max(mx, x);
    }
    return static_cast<std::size_t>(mx) + 1;
  };

  if (!o.truth.empty()) {
    const auto truth = read_label_file(io::read_file(o.truth));
    if (width == 1 && all_int(1)) {
      const auto preds = read_label_file(text);
      auto cm = confusion(preds, truth, class_count(preds, truth));
      cm.labels = labels;
      report = evaluate(name, cm);
    } else {
      ScoreMatrix s;
      s.num_classes = width;
      for (const auto& r : rows) {
        if (r.fields.size() != width) throw ShapeMismatch("line " + std::to_string(r.line) + ": ragged score row");
        for (const auto& f : r.fields) {
          double v;
          if (!io::parse_double(f, v)) throw FormatError("line " + std::to_string(r.line) + ": bad score '" + f + "'");
          s.scores.push_back(v);
        }
      }
      s.labels = truth;
      if (s.labels.size() != rows.size()) {
        throw RangeError("predictions and truth differ in length (" + std::to_string(rows.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
      }
      std::vector<std::size_t> ks;
      for (auto k : o.topk) if (k <= s.num_classes) ks.push_back(k);
      report = evaluate(name, s, ks, labels);
    }
  } else if (width == 2 && all_int(2)) {
    const auto [preds, truth] = read_label_pairs(text);
    auto cm = confusion(preds, truth, class_count(preds, truth));
    cm.labels = labels;
    report = evaluate(name, cm);
  } else {
    const auto s = read_score_file(text);
    std::vector<std::size_t> ks;
    for (auto k : o.topk) if (k <= s.num_classes) ks.push_back(k);
    report = evaluate(name, s, ks, labels);
  }
  if (!labels.empty() && report.confusion.labels.size() != report.confusion.num_classes) {
    throw ShapeMismatch("label file has " + std::to_string(labels.size()) + " entries for " +
                        std::to_string(report.confusion.num_classes) + " classes");
  }
  io_.emit(o.out, o.format == "table" ? "eval.txt" : "eval.json",
           o.format == "table" ? report.to_table() : dump(report));
  return kExitOk;
}

struct CompareOpts {
  std::string before, after, pairs, supports, out, format = "json";
  std::uint64_t threshold = 1000;
};

int cmd_compare(const CompareOpts& o, Io& io_) {
  const auto before = eval_report_from_json(parse_json_file(o.before));
  const auto after = eval_report_from_json(parse_json_file(o.after));
  const auto& cb = before.confusion;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (!o.pairs.empty()) {
    const auto rows = io::parse_csv(io::read_file(o.pairs));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& f = rows[i].fields;
      if (f.size() != 2) throw FormatError(o.pairs + " line " + std::to_string(rows[i].line) + ": expected 'truth,pred'");
      const auto t = cb.find(f[0]);
      const auto p = cb.find(f[1]);
      if (!t || !p) {
        if (i == 0) continue;  // header
        throw RangeError(o.pairs + " line " + std::to_string(rows[i].line) + ": unknown class");
      }
      pairs.emplace_back(*t, *p);
    }
  }
  const auto deltas = confusion_pair_delta(cb, after.confusion, pairs);

  json j;
  j["task"] = after.task.empty() ? before.task : after.task;
  j["f1_macro"] = {{"before", before.f1_macro}, {"after", after.f1_macro}, {"delta", after.f1_macro - before.f1_macro}};
  j["accuracy"] = {{"before", before.accuracy}, {"after", after.accuracy}, {"delta", after.accuracy - before.accuracy}};
  j["pairs"] = deltas;
  if (!o.supports.empty()) {
    const auto sup = CountDistribution::load(o.supports);
    j["groups"] = {{"before", minority_majority_breakdown(cb, sup, o.threshold)},
                   {"after", minority_majority_breakdown(after.confusion, sup, o.threshold)}};
  }

  std::string content;
  if (o.format == "table") {
    std::ostringstream os;
    os << "f1_macro  " << before.f1_macro << " -> " << after.f1_macro << "\n";
    for (const auto& d : deltas) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s->%s  %.1f%% -> %.1f%%  %+.1f pts\n", d.truth_label.c_str(),
                    d.pred_label.c_str(), d.rate_before * 100.0, d.rate_after * 100.0, d.delta_points);
      os << buf;
    }
    content = os.str();
  } else {
    content = dump(j);
  }
  io_.emit(o.out, o.format == "table" ? "compare.txt" : "compare.json", content);
  return kExitOk;
}

struct AggregateOpts {
  std::vector<std::string> reports;
  std::string out, format = "json";
};

int cmd_aggregate(const AggregateOpts& o, Io& io_) {
  std::map<Task, EvalReport> by_task;
  for (const auto& p : o.reports) {
    auto r = eval_report_from_json(parse_json_file(p));
    const Task t = parse_task(r.task);
    if (!by_task.emplace(t, std::move(r)).second) {
      throw MissingTask("task " + std::string(task_name(t)) + " appears in more than one report");
    }
  }
  const auto m = multitask_f1_avg(by_task);
  io_.emit(o.out, o.format == "table" ? "aggregate.txt" : "aggregate.json",
           o.format == "table" ? m.to_table() : dump(m));
  return kExitOk;
}

// pipeline -------------------------------------------------------------------

int cmd_pipeline(const std::string& config_path, const std::string& out_override, Io& io_) {
  auto cfg = PipelineConfig::load(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    if (!env || !*env) throw FormatError("pipeline needs 'out_dir' in the config, --out, or $PORCELAIN_OUT_DIR");
    cfg.out_dir = env;
  }
  fs::create_directories(cfg.out_dir);
  auto put = [&](const char* name, const std::string& content) {
    io_.emit((cfg.out_dir / name).string(), name, content);
  };
  put("config.resolved.json", dump(cfg.to_json()));

  const auto vocab = VocabularySet::load(cfg.vocab_dir);
  const auto catalog = parse_catalog(cfg.catalog, vocab);
  const auto report = validate(catalog, vocab);
  put("validation.json", dump(report));

  const auto manifest = split_catalog(catalog, cfg.seed);
  put("split.json", manifest.to_json_string());

  const auto hist = combo_histogram(catalog);
  put("histogram.csv", hist.to_csv());

  const auto trad = traditional_aug_plan(hist, cfg.aug_threshold, cfg.aug_target);
  put("traditional_plan.json", dump(trad));

  const auto before = CountDistribution::from_histogram(hist);
  const auto after = CountDistribution::from_histogram(trad.apply(hist));
  put("balance.json", dump(balance_report(before, after)));
  put("balance.txt", balance_report(before, after).to_table());
  put("weights.json", dump(json(effective_number_weights(before, cfg.weighting))));

  if (!cfg.allocation_spec.empty()) {
    const auto plan = make_synthetic_plan(cfg.allocation_spec, hist, cfg.synthetic_total, io_);
    put("synthetic_plan.json", plan.to_json_string());
    if (!cfg.lexicon.empty()) {
      const auto m = build_manifest(plan, PromptLexicon::load(cfg.lexicon), GenerationParams{}, cfg.seed);
      put("jobs.jsonl", m.to_jsonl());
      std::vector<std::string> synth;
      synth.reserve(m.jobs.size());
      for (const auto& job : m.jobs) synth.push_back(job.id);
      put("mix.json", dump(compose_mix(manifest.ids(Split::Train), synth)));
    }
  }
  if (!cfg.gate_metadata.empty()) {
    std::vector<GateDecision> decisions;
    for (const auto& m : read_metadata_csv(io::read_file(cfg.gate_metadata))) {
      decisions.push_back(auto_check(m, cfg.gate));
    }
    put("gate_decisions.json", dump(json{{"config", porcelain::to_json(cfg.gate)}, {"decisions", decisions}}));
    put("gate_report.json", dump(gate_report(decisions)));
  }
  io_.log("pipeline finished: " + cfg.out_dir.generic_string());
  return kExitOk;
}

// ---------------------------------------------------------------------------

CLI::App* add_sub(CLI::App& parent, const std::string& name, const std::string& desc) {
  auto* sub = parent.add_subcommand(name, desc);
  sub->set_version_flag("--version", PORCELAIN_VERSION);
  return sub;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset engineering and evaluation toolkit for four-axis porcelain labels", "porcelain"};
  app.set_version_flag("--version", PORCELAIN_VERSION);
  app.require_subcommand(1);

  Io io_(out, err);
  std::function<int()> action;

  ValidateOpts vo;
  auto* validate_cmd = add_sub(app, "validate", "Check a catalog against the vocabularies");
  validate_cmd->add_option("--catalog", vo.catalog, "Catalog CSV")->required();
  validate_cmd->add_option("--vocab", vo.vocab, "Vocabulary directory");
  validate_cmd->add_option("--out", vo.out, "Report path");
  validate_cmd->add_option("--histogram-out", vo.histogram_out, "Also write the combo histogram");
  validate_cmd->add_flag("--strict", vo.strict, "Exit 1 when there are findings");
  validate_cmd->callback([&] { action = [&] { return cmd_validate(vo, io_); }; });

  SplitOpts so;
  auto* split_cmd = add_sub(app, "split", "Adaptive train/val/test split per combination");
  split_cmd->add_option("--catalog", so.catalog, "Catalog CSV")->required();
  split_cmd->add_option("--vocab", so.vocab, "Vocabulary directory");
  split_cmd->add_option("--seed", so.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--out", so.out, "Manifest path");
  split_cmd->add_option("--export-dir", so.export_dir, "Write train.txt, val.txt, test.txt here");
  split_cmd->callback([&] { action = [&] { return cmd_split(so, io_); }; });

  AnalyzeOpts ao;
  auto* analyze_cmd = add_sub(app, "analyze", "Imbalance metrics for a count distribution");
  analyze_cmd->add_option("--counts", ao.counts, "label,count CSV")->required();
  analyze_cmd->add_option("--baseline", ao.baseline, "Baseline counts for a before/after report");
  analyze_cmd->add_option("--out", ao.out, "Report path");
  analyze_cmd->add_option("--format", ao.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  analyze_cmd->callback([&] { action = [&] { return cmd_analyze(ao, io_); }; });

  WeightsOpts wo;
  auto* weights_cmd = add_sub(app, "weights", "Effective-number class weights");
  weights_cmd->add_option("--counts", wo.counts, "label,count CSV")->required();
  weights_cmd->add_option("--beta", wo.beta, "Smoothing in [0, 1)")->capture_default_str();
  weights_cmd->add_option("--cap", wo.cap, "Weight cap")->capture_default_str();
  weights_cmd->add_option("--normalization", wo.normalization, "mean_one, sum_k or none")
      ->check(CLI::IsMember({"mean_one", "sum_k", "none"}));
  weights_cmd->add_option("--out", wo.out, "Output path");
  weights_cmd->callback([&] { action = [&] { return cmd_weights(wo, io_); }; });

  PlanOpts po;
  auto* plan_cmd = add_sub(app, "plan", "Augmentation and synthetic allocation plans");
  plan_cmd->require_subcommand(1);
  auto* trad_cmd = add_sub(*plan_cmd, "traditional", "Threshold-based augmentation plan");
  trad_cmd->add_option("--histogram", po.histogram, "combo,count CSV")->required();
  trad_cmd->add_option("--threshold", po.threshold, "Augment combos below this")->capture_default_str();
  trad_cmd->add_option("--target", po.target, "Target count per augmented combo")->capture_default_str();
  trad_cmd->add_option("--out", po.out, "Plan path");
  trad_cmd->callback([&] { action = [&] { return cmd_plan_traditional(po, io_); }; });
  auto* syn_cmd = add_sub(*plan_cmd, "synthetic", "Tiered synthetic allocation");
  syn_cmd->add_option("--spec", po.spec, "Allocation spec JSON")->required();
  syn_cmd->add_option("--histogram", po.histogram, "combo,count CSV for partial selectors");
  syn_cmd->add_option("--total", po.total, "Reconcile to this total");
  syn_cmd->add_option("--out", po.out, "Plan path");
  syn_cmd->callback([&] { action = [&] { return cmd_plan_synthetic(po, io_); }; });
  auto* mix_cmd = add_sub(*plan_cmd, "mix", "Real train ids plus synthetic ids");
  mix_cmd->add_option("--split", po.split, "Split manifest JSON")->required();
  mix_cmd->add_option("--synthetic", po.synthetic, "Synthetic ids, one per line or JSON lines");
  mix_cmd->add_option("--out", po.out, "Mix manifest path");
  mix_cmd->callback([&] { action = [&] { return cmd_plan_mix(po, io_); }; });

  PromptOpts pr;
  auto* prompts_cmd = add_sub(app, "prompts", "Generation prompts and job manifest");
  prompts_cmd->add_option("--plan", pr.plan, "Allocation plan JSON")->required();
  prompts_cmd->add_option("--lexicon", pr.lexicon, "Prompt lexicon JSON")->required();
  prompts_cmd->add_option("--seed", pr.seed, "Job seed root")->capture_default_str();
  prompts_cmd->add_option("--params", pr.params, "Generation parameter overrides JSON");
  prompts_cmd->add_option("--format", pr.format, "jsonl or json")->check(CLI::IsMember({"jsonl", "json"}));
  prompts_cmd->add_option("--out", pr.out, "Manifest path");
  prompts_cmd->callback([&] { action = [&] { return cmd_prompts(pr, io_); }; });

  GateOpts go;
  auto* gate_cmd = add_sub(app, "gate", "Embedding statistics, FID and quality checks");
  gate_cmd->require_subcommand(1);
  auto* stats_cmd = add_sub(*gate_cmd, "stats", "Mean and covariance summary of an EMB1 file");
  stats_cmd->add_option("--embeddings", go.embeddings, "EMB1 file")->required();
  stats_cmd->add_option("--out", go.out, "Output path");
  stats_cmd->callback([&] { action = [&] { return cmd_gate_stats(go, io_); }; });
  auto* fid_cmd = add_sub(*gate_cmd, "fid", "Fréchet distance between two EMB1 files");
  fid_cmd->add_option("--real", go.real, "Reference EMB1 file")->required();
  fid_cmd->add_option("--synthetic", go.synthetic, "Candidate EMB1 file")->required();
  fid_cmd->add_option("--out", go.out, "Output path");
  fid_cmd->callback([&] { action = [&] { return cmd_gate_fid(go, io_); }; });
  auto* check_cmd = add_sub(*gate_cmd, "check", "Automated checks over item metadata");
  check_cmd->add_option("--metadata", go.metadata, "Metadata CSV")->required();
  check_cmd->add_option("--config", go.config, "Gate config JSON");
  check_cmd->add_option("--out", go.out, "Decisions path");
  check_cmd->callback([&] { action = [&] { return cmd_gate_check(go, io_); }; });
  auto* report_cmd = add_sub(*gate_cmd, "report", "Pass rate and failure reasons");
  report_cmd->add_option("--decisions", go.decisions, "Decisions JSON")->required();
  report_cmd->add_option("--out", go.out, "Output path");
  report_cmd->callback([&] { action = [&] { return cmd_gate_report(go, io_); }; });

  EvalOpts eo;
  auto* eval_cmd = add_sub(app, "evaluate", "Metrics from a prediction file");
  eval_cmd->add_option("--preds", eo.preds, "Scores or predicted labels")->required();
  eval_cmd->add_option("--truth", eo.truth, "True labels, one per line");
  eval_cmd->add_option("--task", eo.task, "dynasty, kiln, glaze or type")->required();
  eval_cmd->add_option("--labels", eo.labels, "Class names, one per line");
  eval_cmd->add_option("--topk", eo.topk, "k values for top-k accuracy")->delimiter(',');
  eval_cmd->add_option("--format", eo.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  eval_cmd->add_option("--out", eo.out, "Report path");
  eval_cmd->callback([&] { action = [&] { return cmd_evaluate(eo, io_); }; });

  CompareOpts co;
  auto* compare_cmd = add_sub(app, "compare", "Before/after comparison of two evaluation reports");
  compare_cmd->add_option("--before", co.before, "Baseline report JSON")->required();
  compare_cmd->add_option("--after", co.after, "New report JSON")->required();
  compare_cmd->add_option("--pairs", co.pairs, "truth,pred confusion pairs CSV");
  compare_cmd->add_option("--supports", co.supports, "Training support per class (label,count)");
  compare_cmd->add_option("--threshold", co.threshold, "Minority support threshold")->capture_default_str();
  compare_cmd->add_option("--format", co.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  compare_cmd->add_option("--out", co.out, "Output path");
  compare_cmd->callback([&] { action = [&] { return cmd_compare(co, io_); }; });

  AggregateOpts ago;
  auto* agg_cmd = add_sub(app, "aggregate", "Four-task macro F1 average");
  agg_cmd->add_option("--reports", ago.reports, "One evaluation report per task")->required()->expected(4);
  agg_cmd->add_option("--format", ago.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  agg_cmd->add_option("--out", ago.out, "Output path");
  agg_cmd->callback([&] { action = [&] { return cmd_aggregate(ago, io_); }; });

  std::string pipeline_config, pipeline_out;
  auto* pipe_cmd = add_sub(app, "pipeline", "Run every stage from one config file");
  pipe_cmd->add_option("--config", pipeline_config, "Pipeline config JSON")->required();
  pipe_cmd->add_option("--out", pipeline_out, "Output directory (overrides the config)");
  pipe_cmd->callback([&] { action = [&] { return cmd_pipeline(pipeline_config, pipeline_out, io_); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    // --help / --version on the app or a subcommand.
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* ctx = &app;
    for (bool descended = true; descended;) {
      descended = false;
      for (const auto* sub : ctx->get_subcommands()) {
        ctx = sub;
        descended = true;
        break;
      }
    }
    err << ctx->help();
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace porcelain::cli
