#include "porcelain/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/kernels.hpp"

namespace porcelain {

using nlohmann::json;

std::uint64_t ConfusionMatrix::row_sum(std::size_t t) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < num_classes; ++j) s += at(t, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t p) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < num_classes; ++i) s += at(i, p);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(cells.begin(), cells.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < num_classes; ++i) s += at(i, i);
  return s;
}

std::string ConfusionMatrix::label(std::size_t i) const {
  return i < labels.size() ? labels[i] : std::to_string(i);
}

std::optional<std::size_t> ConfusionMatrix::find(std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (io::iequals(labels[i], name)) return i;
  }
  long long idx;
  if (io::parse_int(name, idx) && idx >= 0 && static_cast<std::size_t>(idx) < num_classes) {
    return static_cast<std::size_t>(idx);
  }
  return std::nullopt;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  if (o.num_classes != num_classes) throw ShapeMismatch("confusion matrices differ in class count");
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
  return *this;
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth,
                          std::size_t num_classes) {
  if (preds.size() != truth.size()) {
    throw RangeError("predictions and truth differ in length (" + std::to_string(preds.size()) +
                     " vs " + std::to_string(truth.size()) + ")");
  }
  if (num_classes == 0) throw RangeError("class count must be positive");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (int v : {preds[i], truth[i]}) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_classes) {
        throw RangeError("sample " + std::to_string(i) + ": label " + std::to_string(v) +
                         " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  }
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.cells = kernels::parallel::confusion_tally(truth, preds, num_classes);
  return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ClassPRF> per_class_prf(const ConfusionMatrix& cm) {
  std::vector<ClassPRF> out(cm.num_classes);
  for (std::size_t c = 0; c < cm.num_classes; ++c) {
    const auto tp = cm.at(c, c);
    auto& r = out[c];
    r.support = cm.row_sum(c);
    r.precision = ratio(tp, cm.col_sum(c));
    r.recall = ratio(tp, r.support);
    // 2TP / (2TP + FP + FN) equals the harmonic mean and is exact in integers.
    r.f1 = ratio(2 * tp, cm.col_sum(c) + r.support);
  }
  return out;
}

double f1_macro(const ConfusionMatrix& cm) {
  if (cm.num_classes == 0) return 0.0;
  double s = 0.0;
  for (const auto& r : per_class_prf(cm)) s += r.f1;
  return s / static_cast<double>(cm.num_classes);
}

double f1_weighted(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) return 0.0;
  // Supports are reduced by their gcd so uniform supports give unit weights
  // and the result is bit-identical to f1_macro.
  const auto prf = per_class_prf(cm);
  std::uint64_t g = 0;
  for (const auto& r : prf) g = std::gcd(g, r.support);
  double s = 0.0;
  for (const auto& r : prf) s += static_cast<double>(r.support / g) * r.f1;
  return s / static_cast<double>(n / g);
}

double accuracy(const ConfusionMatrix& cm) { return ratio(cm.trace(), cm.total()); }

// ---------------------------------------------------------------------------

void ScoreMatrix::validate() const {
  if (num_classes == 0) throw ShapeMismatch("score matrix has zero classes");
  if (scores.size() != labels.size() * num_classes) {
    throw ShapeMismatch("score matrix has " + std::to_string(scores.size()) + " entries, expected " +
                        std::to_string(labels.size()) + " x " + std::to_string(num_classes));
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw NonFiniteInput("score matrix contains NaN or infinity");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw RangeError("row " + std::to_string(i) + ": label out of range");
    }
  }
}

std::vector<int> ScoreMatrix::argmax() const {
  std::vector<int> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) {
    const double* row = scores.data() + i * num_classes;
    std::size_t best = 0;
    for (std::size_t c = 1; c < num_classes; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

double topk_accuracy(const ScoreMatrix& s, std::size_t k) {
  s.validate();
  if (k < 1 || k > s.num_classes) {
    throw RangeError("k=" + std::to_string(k) + " outside [1, " + std::to_string(s.num_classes) + "]");
  }
  if (s.rows() == 0) return 0.0;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double* row = s.scores.data() + i * s.num_classes;
    const auto y = static_cast<std::size_t>(s.labels[i]);
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < s.num_classes; ++j) {
      if (row[j] > row[y] || (row[j] == row[y] && j < y)) ++ahead;
    }
    if (ahead < k) ++hits;
  }
  return ratio(hits, s.rows());
}

// ---------------------------------------------------------------------------

EvalReport evaluate(std::string task, const ConfusionMatrix& cm) {
  EvalReport r;
  r.task = std::move(task);
  r.confusion = cm;
  r.per_class = per_class_prf(cm);
  r.accuracy = accuracy(cm);
  r.f1_macro = f1_macro(cm);
  r.f1_weighted = f1_weighted(cm);
  return r;
}

EvalReport evaluate(std::string task, const ScoreMatrix& scores, const std::vector<std::size_t>& ks,
                    const std::vector<std::string>& labels) {
  scores.validate();
  auto cm = confusion(scores.argmax(), scores.labels, scores.num_classes);
  if (!labels.empty()) {
    if (labels.size() != scores.num_classes) {
      throw ShapeMismatch("label list has " + std::to_string(labels.size()) + " entries for " +
                          std::to_string(scores.num_classes) + " classes");
    }
    cm.labels = labels;
  }
  auto r = evaluate(std::move(task), cm);
  for (auto k : ks) r.topk[k] = topk_accuracy(scores, k);
  return r;
}

MultiTaskReport multitask_f1_avg(const std::map<Task, EvalReport>& reports) {
  MultiTaskReport m;
  for (const auto& [t, r] : reports) m.macro[t] = r.f1_macro;
  m.f1_avg = multitask_f1_avg(m.macro);
  m.tasks = reports;
  return m;
}

double multitask_f1_avg(const std::map<Task, double>& macro_f1) {
  for (Task t : kTasks) {
    if (!macro_f1.count(t)) throw MissingTask("no report for task " + std::string(task_name(t)));
  }
  if (macro_f1.size() != kTasks.size()) throw MissingTask("expected exactly four tasks");
  double s = 0.0;
  for (Task t : kTasks) s += macro_f1.at(t);
  return s / 4.0;
}

GroupBreakdown minority_majority_breakdown(const ConfusionMatrix& cm, const CountDistribution& supports,
                                           std::uint64_t threshold) {
  if (supports.counts.size() != cm.num_classes) {
    throw ShapeMismatch("supports have " + std::to_string(supports.counts.size()) + " classes, matrix has " +
                        std::to_string(cm.num_classes));
  }
  const auto prf = per_class_prf(cm);
  GroupBreakdown g;
  g.threshold = threshold;
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t c = 0; c < cm.num_classes; ++c) {
    const auto name = c < supports.labels.size() ? supports.labels[c] : cm.label(c);
    if (supports.counts[c] <= threshold) {
      g.minority_classes.push_back(name);
      lo_sum += prf[c].f1;
    } else {
      g.majority_classes.push_back(name);
      hi_sum += prf[c].f1;
    }
  }
  if (!g.minority_classes.empty()) g.minority_f1 = lo_sum / static_cast<double>(g.minority_classes.size());
  if (!g.majority_classes.empty()) g.majority_f1 = hi_sum / static_cast<double>(g.majority_classes.size());
  return g;
}

std::vector<PairDelta> confusion_pair_delta(const ConfusionMatrix& before, const ConfusionMatrix& after,
                                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (before.num_classes != after.num_classes) {
    throw ShapeMismatch("confusion matrices differ in class count");
  }
  if (!before.labels.empty() && !after.labels.empty() && before.labels != after.labels) {
    throw ShapeMismatch("confusion matrices have different label vocabularies");
  }
  std::vector<PairDelta> out;
  for (const auto& [t, p] : pairs) {
    if (t >= before.num_classes || p >= before.num_classes) {
      throw RangeError("pair (" + std::to_string(t) + ", " + std::to_string(p) + ") outside the matrix");
    }
    const auto rb = before.row_sum(t);
    const auto ra = after.row_sum(t);
    if (rb == 0 || ra == 0) {
      throw ZeroSupport("class " + before.label(t) + " has no samples in the " +
                        (rb == 0 ? "before" : "after") + " matrix");
    }
    PairDelta d;
    d.truth = t;
    d.pred = p;
    d.truth_label = before.label(t);
    d.pred_label = before.label(p);
    d.rate_before = ratio(before.at(t, p), rb);
    d.rate_after = ratio(after.at(t, p), ra);
    d.delta_points = (d.rate_after - d.rate_before) * 100.0;
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

int to_label(const std::string& field, std::size_t line) {
  long long v;
  if (!io::parse_int(field, v)) {
    throw FormatError("line " + std::to_string(line) + ": bad label '" + field + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string EvalReport::to_table() const {
  std::ostringstream os;
  std::size_t w = 8;
  for (std::size_t c = 0; c < confusion.num_classes; ++c) w = std::max(w, confusion.label(c).size() + 2);
  os << "Task: " << (task.empty() ? "-" : task) << "\n";
  os << std::left << std::setw(static_cast<int>(w)) << "Class" << std::right << std::setw(11) << "Precision"
     << std::setw(9) << "Recall" << std::setw(9) << "F1" << std::setw(9) << "Support" << "\n";
  os << std::string(w + 38, '-') << "\n";
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const auto& r = per_class[c];
    os << std::left << std::setw(static_cast<int>(w)) << confusion.label(c) << std::right << std::setw(11)
       << fmt(r.precision, 4) << std::setw(9) << fmt(r.recall, 4) << std::setw(9) << fmt(r.f1, 4)
       << std::setw(9) << r.support << "\n";
  }
  os << std::string(w + 38, '-') << "\n";
  os << "accuracy     " << fmt(accuracy, 4) << "\n";
  os << "f1_macro     " << fmt(f1_macro, 4) << "\n";
  os << "f1_weighted  " << fmt(f1_weighted, 4) << "\n";
  for (const auto& [k, v] : topk) os << "top" << k << "_accuracy " << fmt(v, 4) << "\n";
  return os.str();
}

std::string MultiTaskReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "Task" << std::right << std::setw(10) << "F1 macro" << "\n";
  os << std::string(20, '-') << "\n";
  for (Task t : kTasks) {
    auto it = macro.find(t);
    if (it == macro.end()) continue;
    os << std::left << std::setw(10) << task_name(t) << std::right << std::setw(10) << fmt(it->second, 4)
       << "\n";
  }
  os << std::string(20, '-') << "\n";
  os << std::left << std::setw(10) << "F1 avg" << std::right << std::setw(10) << fmt(f1_avg, 4) << "\n";
  return os.str();
}

ScoreMatrix read_score_file(std::string_view text) {
  ScoreMatrix s;
  for (const auto& row : io::parse_csv(text)) {
    if (row.fields.size() < 2) {
      throw FormatError("line " + std::to_string(row.line) + ": need scores and a label");
    }
    const std::size_t c = row.fields.size() - 1;
    if (s.num_classes == 0) s.num_classes = c;
    if (c != s.num_classes) {
      throw ShapeMismatch("line " + std::to_string(row.line) + ": expected " +
                          std::to_string(s.num_classes) + " scores");
    }
    for (std::size_t i = 0; i < c; ++i) {
      double v;
      if (!io::parse_double(row.fields[i], v)) {
        throw FormatError("line " + std::to_string(row.line) + ": bad score '" + row.fields[i] + "'");
      }
      s.scores.push_back(v);
    }
    s.labels.push_back(to_label(row.fields.back(), row.line));
  }
  return s;
}

std::vector<int> read_label_file(std::string_view text) {
  std::vector<int> out;
  for (const auto& row : io::parse_csv(text)) out.push_back(to_label(row.fields.front(), row.line));
  return out;
}

std::pair<std::vector<int>, std::vector<int>> read_label_pairs(std::string_view text) {
  std::pair<std::vector<int>, std::vector<int>> out;
  for (const auto& row : io::parse_csv(text)) {
    if (row.fields.size() != 2) {
      throw FormatError("line " + std::to_string(row.line) + ": expected 'pred,truth'");
    }
    out.first.push_back(to_label(row.fields[0], row.line));
    out.second.push_back(to_label(row.fields[1], row.line));
  }
  return out;
}

void to_json(json& j, const ConfusionMatrix& cm) {
  json rows = json::array();
  for (std::size_t i = 0; i < cm.num_classes; ++i) {
    rows.push_back(std::vector<std::uint64_t>(cm.cells.begin() + static_cast<std::ptrdiff_t>(i * cm.num_classes),
                                              cm.cells.begin() + static_cast<std::ptrdiff_t>((i + 1) * cm.num_classes)));
  }
  j = json{{"num_classes", cm.num_classes}, {"labels", cm.labels}, {"matrix", rows}};
}

void from_json(const json& j, ConfusionMatrix& cm) {
  try {
    const auto& rows = j.at("matrix");
    cm.num_classes = rows.size();
    cm.cells.clear();
    for (const auto& r : rows) {
      if (r.size() != cm.num_classes) throw ShapeMismatch("confusion matrix is not square");
      for (const auto& v : r) cm.cells.push_back(v.get<std::uint64_t>());
    }
    cm.labels = j.value("labels", std::vector<std::string>{});
    if (!cm.labels.empty() && cm.labels.size() != cm.num_classes) {
      throw ShapeMismatch("confusion matrix label count differs from its size");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("confusion matrix: ") + e.what());
  }
}

void to_json(json& j, const EvalReport& r) {
  json classes = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& p = r.per_class[c];
    classes.push_back({{"label", r.confusion.label(c)},
                       {"precision", p.precision},
                       {"recall", p.recall},
                       {"f1", p.f1},
                       {"support", p.support}});
  }
  json topk = json::object();
  for (const auto& [k, v] : r.topk) topk[std::to_string(k)] = v;
  j = json{{"task", r.task},
           {"accuracy", r.accuracy},
           {"f1_macro", r.f1_macro},
           {"f1_weighted", r.f1_weighted},
           {"topk", topk},
           {"per_class", classes},
           {"confusion", r.confusion}};
}

EvalReport eval_report_from_json(const json& j) {
  ConfusionMatrix cm;
  try {
    from_json(j.at("confusion"), cm);
  } catch (const json::exception& e) {
    throw FormatError(std::string("evaluation report: ") + e.what());
  }
  auto r = evaluate(j.value("task", std::string()), cm);
  if (j.contains("topk")) {
    for (const auto& [k, v] : j.at("topk").items()) {
      long long kk;
      if (io::parse_int(k, kk) && kk > 0) r.topk[static_cast<std::size_t>(kk)] = v.get<double>();
    }
  }
  return r;
}

void to_json(json& j, const MultiTaskReport& r) {
  json macro = json::object();
  for (const auto& [t, v] : r.macro) macro[std::string(task_name(t))] = v;
  j = json{{"f1_macro", macro}, {"f1_avg", r.f1_avg}};
}

void to_json(json& j, const GroupBreakdown& g) {
  j = json{{"threshold", g.threshold},
           {"minority_classes", g.minority_classes},
           {"majority_classes", g.majority_classes},
           {"minority_f1", g.minority_f1 ? json(*g.minority_f1) : json()},
           {"majority_f1", g.majority_f1 ? json(*g.majority_f1) : json()}};
}

void to_json(json& j, const PairDelta& d) {
  j = json{{"truth", d.truth_label},
           {"pred", d.pred_label},
           {"rate_before", d.rate_before},
           {"rate_after", d.rate_after},
           {"delta_points", d.delta_points}};
}

}  // namespace porcelain
