#include "porcelain/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/kernels.hpp"
#include "porcelain/rng.hpp"

namespace porcelain {

std::string_view task_name(Task t) {
  switch (t) {
    case Task::Dynasty: return "dynasty";
    case Task::Kiln: return "kiln";
    case Task::Glaze: return "glaze";
    case Task::Type: return "type";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (Task t : kTasks) {
    if (io::iequals(name, task_name(t))) return t;
  }
  throw MissingTask("unknown task '" + std::string(name) + "'");
}

std::string_view normalization_name(WeightNormalization n) {
  switch (n) {
    case WeightNormalization::MeanOne: return "mean_one";
    case WeightNormalization::SumK: return "sum_k";
    case WeightNormalization::None: return "none";
  }
  return "?";
}

WeightNormalization parse_normalization(std::string_view name) {
  for (auto n : {WeightNormalization::MeanOne, WeightNormalization::SumK, WeightNormalization::None}) {
    if (io::iequals(name, normalization_name(n))) return n;
  }
  throw DomainError("unknown normalization '" + std::string(name) + "'");
}

double effective_number(std::uint64_t n, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw DomainError("beta must lie in [0, 1)");
  }
  if (n == 0) throw DomainError("effective number needs a positive count");
  if (beta == 0.0) return 1.0;
  // beta^n = exp(n log beta); log1p(beta - 1) keeps precision for beta near 1
  // and the log-domain form never underflows at large n.
  const double log_beta = std::log1p(beta - 1.0);
  return -std::expm1(static_cast<double>(n) * log_beta) / (1.0 - beta);
}

ClassWeights effective_number_weights(const CountDistribution& counts, const WeightingConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw DomainError("beta must lie in [0, 1)");
  if (!(cfg.weight_cap > 0.0)) throw DomainError("weight cap must be positive");
  if (counts.counts.empty()) throw DomainError("no classes to weight");

  ClassWeights out;
  out.labels = counts.labels;
  out.raw.reserve(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts.counts[c] == 0) {
      throw DomainError("class " + (c < counts.labels.size() ? counts.labels[c] : std::to_string(c)) +
                        " has a zero count");
    }
    out.raw.push_back(1.0 / effective_number(counts.counts[c], cfg.beta));
  }

  out.weights = out.raw;
  double scale = 1.0;
  switch (cfg.normalization) {
    case WeightNormalization::MeanOne: {
      double weighted = 0.0, total = 0.0;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        weighted += static_cast<double>(counts.counts[c]) * out.raw[c];
        total += static_cast<double>(counts.counts[c]);
      }
      scale = total / weighted;
      break;
    }
    case WeightNormalization::SumK: {
      double sum = 0.0;
      for (double w : out.raw) sum += w;
      scale = static_cast<double>(counts.size()) / sum;
      break;
    }
    case WeightNormalization::None: break;
  }
  for (double& w : out.weights) {
    w *= scale;
    if (w > cfg.weight_cap) {
      w = cfg.weight_cap;
      ++out.capped;
    }
  }
  return out;
}

std::vector<double> inv_sqrt_sampling_probs(const CountDistribution& counts) {
  if (counts.counts.empty()) throw DomainError("no classes to sample");
  std::vector<double> p;
  p.reserve(counts.size());
  double sum = 0.0;
  for (auto n : counts.counts) {
    if (n == 0) throw DomainError("inverse-sqrt sampling needs strictly positive counts");
    p.push_back(1.0 / std::sqrt(static_cast<double>(n)));
    sum += p.back();
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<std::uint64_t> simulate_sampler(const std::vector<double>& probs, std::uint64_t draws,
                                            std::uint64_t seed) {
  if (probs.empty()) throw DomainError("empty probability vector");
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw DomainError("probabilities must be finite and non-negative");
    }
    acc += probs[i];
    cdf[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9) throw DomainError("probabilities must sum to 1");

  std::vector<std::uint64_t> counts(probs.size(), 0);
  std::mt19937_64 gen(rng::splitmix64(seed));
  for (std::uint64_t d = 0; d < draws; ++d) {
    const double u = rng::uniform_unit(gen) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto idx = static_cast<std::size_t>(it - cdf.begin());
    // First cdf strictly above u, so zero-probability classes are never drawn.
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

// ---------------------------------------------------------------------------

void PredictionBatch::validate() const {
  if (num_classes == 0) throw ShapeMismatch("prediction batch has zero classes");
  if (probabilities.size() != labels.size() * num_classes) {
    throw ShapeMismatch("probability matrix has " + std::to_string(probabilities.size()) +
                        " entries, expected " + std::to_string(labels.size()) + " x " +
                        std::to_string(num_classes));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw DomainError("row " + std::to_string(i) + ": label out of range");
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double p = probabilities[i * num_classes + c];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("row " + std::to_string(i) + ": probability outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw DomainError("row " + std::to_string(i) + ": probabilities sum to " + std::to_string(sum));
    }
  }
}

PredictionBatch PredictionBatch::from_csv(std::string_view text) {
  PredictionBatch b;
  for (const auto& row : io::parse_csv(text)) {
    if (row.fields.size() < 2) {
      throw FormatError("line " + std::to_string(row.line) + ": need probabilities and a label");
    }
    const std::size_t c = row.fields.size() - 1;
    if (b.num_classes == 0) b.num_classes = c;
    if (c != b.num_classes) {
      throw ShapeMismatch("line " + std::to_string(row.line) + ": expected " +
                          std::to_string(b.num_classes) + " probabilities");
    }
    for (std::size_t i = 0; i < c; ++i) {
      double p;
      if (!io::parse_double(row.fields[i], p)) {
        throw FormatError("line " + std::to_string(row.line) + ": bad probability '" +
                          row.fields[i] + "'");
      }
      b.probabilities.push_back(p);
    }
    long long y;
    if (!io::parse_int(row.fields.back(), y)) {
      throw FormatError("line " + std::to_string(row.line) + ": bad label '" + row.fields.back() + "'");
    }
    b.labels.push_back(static_cast<int>(y));
  }
  return b;
}

double weighted_ce_loss(const PredictionBatch& batch, const std::vector<double>& class_weights) {
  if (class_weights.size() != batch.num_classes) {
    throw ShapeMismatch("class weights have length " + std::to_string(class_weights.size()) +
                        ", batch has " + std::to_string(batch.num_classes) + " classes");
  }
  batch.validate();
  if (batch.rows() == 0) throw ShapeMismatch("empty prediction batch");
  const double sum = kernels::parallel::weighted_nll_sum(batch.probabilities, batch.num_classes,
                                                         batch.labels, class_weights,
                                                         kProbabilityClamp);
  return sum / static_cast<double>(batch.rows());
}

double multitask_loss(const std::map<Task, double>& task_losses, const TaskWeights& tw) {
  for (const auto& [t, l] : task_losses) {
    if (!tw.lambda.count(t)) {
      throw MissingTask("no task weight for " + std::string(task_name(t)));
    }
  }
  double total = 0.0;
  for (Task t : kTasks) {
    auto w = tw.lambda.find(t);
    if (w == tw.lambda.end()) continue;
    auto l = task_losses.find(t);
    if (l == task_losses.end()) {
      throw MissingTask("no loss for task " + std::string(task_name(t)));
    }
    total += w->second * l->second;
  }
  return total;
}

void to_json(nlohmann::json& j, const ClassWeights& w) {
  nlohmann::json weights = nlohmann::json::object();
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    weights[i < w.labels.size() ? w.labels[i] : std::to_string(i)] = w.weights[i];
  }
  j = nlohmann::json{{"weights", weights}, {"capped", w.capped}};
}

}  // namespace porcelain
