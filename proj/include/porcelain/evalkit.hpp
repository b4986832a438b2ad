#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "porcelain/balance.hpp"
#include "porcelain/weighting.hpp"

namespace porcelain {

/// C x C tally; cell (i, j) counts samples of true class i predicted as j.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> cells;  // row-major
  std::vector<std::string> labels;   // optional, size C when present

  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return cells[truth * num_classes + pred];
  }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::string label(std::size_t i) const;
  /// Index of a class by label, or by integer index when there are no labels.
  std::optional<std::size_t> find(std::string_view name) const;

  /// Cell-wise sum. Throws ShapeMismatch on differing class counts.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws RangeError on length mismatch or a label outside [0, C).
ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth,
                          std::size_t num_classes);

struct ClassPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

/// 0/0 is taken as 0 for precision, recall and F1.
std::vector<ClassPRF> per_class_prf(const ConfusionMatrix& cm);
double f1_macro(const ConfusionMatrix& cm);
double f1_weighted(const ConfusionMatrix& cm);  // 0 when the matrix is empty
double accuracy(const ConfusionMatrix& cm);     // 0 when the matrix is empty

/// N x C row-major scores with N true labels.
struct ScoreMatrix {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t rows() const { return labels.size(); }
  /// Throws ShapeMismatch, NonFiniteInput, RangeError.
  void validate() const;
  /// Highest score per row, lowest index on ties.
  std::vector<int> argmax() const;
};

/// Fraction of rows whose label ranks in the top k. A label ranks ahead of
/// class j when its score is higher, or equal with a lower index.
/// Throws RangeError unless 1 <= k <= C.
double topk_accuracy(const ScoreMatrix& scores, std::size_t k);

struct EvalReport {
  std::string task;
  ConfusionMatrix confusion;
  std::vector<ClassPRF> per_class;
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_weighted = 0.0;
  std::map<std::size_t, double> topk;

  std::string to_table() const;
};

/// Builds a report from a confusion matrix; top-k entries need scores.
EvalReport evaluate(std::string task, const ConfusionMatrix& cm);
EvalReport evaluate(std::string task, const ScoreMatrix& scores, const std::vector<std::size_t>& ks,
                    const std::vector<std::string>& labels = {});

struct MultiTaskReport {
  std::map<Task, EvalReport> tasks;
  std::map<Task, double> macro;
  double f1_avg = 0.0;

  std::string to_table() const;
};

/// Mean of the four macro F1 scores. Throws MissingTask unless exactly the
/// four tasks are present.
MultiTaskReport multitask_f1_avg(const std::map<Task, EvalReport>& reports);
double multitask_f1_avg(const std::map<Task, double>& macro_f1);

struct GroupBreakdown {
  std::uint64_t threshold = 0;
  std::vector<std::string> minority_classes;  // support <= threshold
  std::vector<std::string> majority_classes;  // support > threshold
  std::optional<double> minority_f1;          // unweighted mean, absent for an empty group
  std::optional<double> majority_f1;
};

/// Groups by training support. Throws ShapeMismatch unless supports has one
/// count per class.
GroupBreakdown minority_majority_breakdown(const ConfusionMatrix& cm, const CountDistribution& supports,
                                           std::uint64_t threshold);

struct PairDelta {
  std::size_t truth = 0;
  std::size_t pred = 0;
  std::string truth_label;
  std::string pred_label;
  double rate_before = 0.0;  // fraction of the true class predicted as `pred`
  double rate_after = 0.0;
  double delta_points = 0.0;  // (after - before) * 100
};

/// Throws ShapeMismatch on differing class counts or labels, RangeError for an
/// index outside the matrix and ZeroSupport when a true-class row is empty.
std::vector<PairDelta> confusion_pair_delta(const ConfusionMatrix& before, const ConfusionMatrix& after,
                                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// One sample per line: C scores then the integer true label.
ScoreMatrix read_score_file(std::string_view text);
/// One integer per line, or the first integer column of a delimited file.
std::vector<int> read_label_file(std::string_view text);
/// Two integer columns per line: predicted label, true label.
std::pair<std::vector<int>, std::vector<int>> read_label_pairs(std::string_view text);

void to_json(nlohmann::json& j, const ConfusionMatrix& cm);
void from_json(const nlohmann::json& j, ConfusionMatrix& cm);
void to_json(nlohmann::json& j, const EvalReport& r);
/// Reads the confusion matrix and task back and recomputes every metric.
EvalReport eval_report_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const MultiTaskReport& r);
void to_json(nlohmann::json& j, const GroupBreakdown& g);
void to_json(nlohmann::json& j, const PairDelta& d);

}  // namespace porcelain
