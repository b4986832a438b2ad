#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "porcelain/balance.hpp"

namespace porcelain {

enum class Task { Dynasty, Kiln, Glaze, Type };

inline constexpr std::array<Task, 4> kTasks{Task::Dynasty, Task::Kiln, Task::Glaze, Task::Type};

std::string_view task_name(Task t);
/// Throws MissingTask for an unknown name.
Task parse_task(std::string_view name);

enum class WeightNormalization {
  /// Support-weighted mean is one: sum_c n_c w_c / sum_c n_c = 1. The expected
  /// per-sample weight is 1, so the weighted loss stays on the scale of plain
  /// cross-entropy.
  MeanOne,
  /// Weights sum to the number of classes (class-averaged mean is one).
  SumK,
  /// Raw (1 - beta) / (1 - beta^n).
  None,
};

std::string_view normalization_name(WeightNormalization n);
WeightNormalization parse_normalization(std::string_view name);

struct WeightingConfig {
  double beta = 0.999;
  double weight_cap = 10.0;
  WeightNormalization normalization = WeightNormalization::MeanOne;
};

struct ClassWeights {
  std::vector<double> weights;
  std::vector<std::string> labels;
  std::vector<double> raw;  // before normalization and capping
  std::size_t capped = 0;   // how many weights the cap clipped
};

/// (1 - beta^n) / (1 - beta), evaluated as -expm1(n log beta) / (1 - beta).
double effective_number(std::uint64_t n, double beta);

/// raw_c = 1 / effective_number(n_c), normalized per cfg, then min(w, cap).
/// Throws DomainError for beta outside [0, 1), a non-positive cap or a zero count.
ClassWeights effective_number_weights(const CountDistribution& counts, const WeightingConfig& cfg = {});

/// p_c proportional to n_c^{-1/2}. Throws DomainError on zero counts.
std::vector<double> inv_sqrt_sampling_probs(const CountDistribution& counts);

/// Inverse-CDF sampling over the cumulative array built left to right.
/// Deterministic given seed. Throws DomainError if probs are not a distribution.
std::vector<std::uint64_t> simulate_sampler(const std::vector<double>& probs, std::uint64_t draws,
                                            std::uint64_t seed);

/// Row-major N x C probabilities and N labels in [0, C).
struct PredictionBatch {
  std::vector<double> probabilities;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t rows() const { return labels.size(); }
  /// Throws ShapeMismatch or DomainError (entries outside [0,1], row sums off
  /// by more than 1e-6, labels out of range).
  void validate() const;

  /// Delimited text, one row per line: C probabilities then the label.
  static PredictionBatch from_csv(std::string_view text);
};

inline constexpr double kProbabilityClamp = 1e-12;

/// -(1/N) sum_i w[y_i] ln max(p[i, y_i], 1e-12). Throws ShapeMismatch.
double weighted_ce_loss(const PredictionBatch& batch, const std::vector<double>& class_weights);

struct TaskWeights {
  std::map<Task, double> lambda{
      {Task::Dynasty, 1.0}, {Task::Kiln, 1.2}, {Task::Glaze, 2.0}, {Task::Type, 1.5}};
};

/// sum_t lambda_t L_t, summed in dynasty, kiln, glaze, type order. Throws
/// MissingTask unless both maps cover the same tasks.
double multitask_loss(const std::map<Task, double>& task_losses, const TaskWeights& tw = {});

void to_json(nlohmann::json& j, const ClassWeights& w);

}  // namespace porcelain
