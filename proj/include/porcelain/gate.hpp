#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace porcelain {

// ---------------------------------------------------------------------------
// Embeddings and Fréchet distance
// ---------------------------------------------------------------------------

/// N x D embedding vectors, one row per item.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string source = "real";  // "real" or "synthetic"

  Eigen::Index count() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }

  /// Binary layout: "EMB1", u32 LE N, u32 LE D, then N*D f32 LE row-major.
  /// Throws MissingFile, FormatError, NonFiniteInput, EmptyInput (N or D zero).
  static EmbeddingSet read(const std::filesystem::path& path);
  static EmbeddingSet decode(std::string_view bytes);
  /// Values are narrowed to f32.
  std::string encode() const;
};

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::Index samples = 0;
};

/// Sample mean and 1/(N-1) covariance; the covariance is zero for N = 1.
/// Throws EmptyInput for N = 0 and NonFiniteInput on NaN or infinity.
GaussianStats gaussian_stats(const EmbeddingSet& e);
GaussianStats gaussian_stats(const Eigen::MatrixXd& x);

inline constexpr double kEigenClamp = 1e-10;
inline constexpr double kNegativeResultTolerance = 1e-6;

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}). The square-root
/// trace is sum sqrt(lambda) over the eigenvalues of S_a^{1/2} S_b S_a^{1/2};
/// eigenvalues below 1e-10 count as 0. Results in [-1e-6, 0) become 0.
/// Throws DimensionMismatch, NonFiniteInput, NumericalFailure (including a
/// result below -1e-6).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

// Reference FID values for a vanilla and an adapter-tuned generator. The
// embeddings behind them are unavailable, so they are informational only.
inline constexpr double kReferenceFidBaseline = 223.6;
inline constexpr double kReferenceFidAdapted = 42.3;

nlohmann::json to_json_summary(const GaussianStats& s);

// ---------------------------------------------------------------------------
// Automated checks
// ---------------------------------------------------------------------------

struct ItemMetadata {
  std::string item_id;
  int width = 0;
  int height = 0;
  bool intact = false;
  std::vector<double> channel_means;      // per channel, pixel scale [0, 1]
  std::vector<double> channel_variances;  // per channel
};

struct Band {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct GateConfig {
  int expected_width = 512;
  int expected_height = 512;
  Band channel_mean{0.05, 0.95};
  Band channel_variance{0.001, 0.25};

  static GateConfig from_json(const nlohmann::json& j);  // missing keys keep defaults
};

nlohmann::json to_json(const GateConfig& c);

struct GateDecision {
  std::string item_id;
  bool passed = true;
  std::vector<std::string> reasons;  // failed check names, in check order
};

/// Runs every check and records each failure: "resolution", "integrity",
/// "channel_mean", "channel_variance". A missing stat counts as out of band.
GateDecision auto_check(const ItemMetadata& meta, const GateConfig& cfg = {});

/// CSV header: id,width,height,intact,mean_r,mean_g,mean_b,var_r,var_g,var_b.
/// `intact` accepts 1/0/true/false/yes/no.
std::vector<ItemMetadata> read_metadata_csv(std::string_view text);

struct GateSummary {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double pass_rate = 0.0;          // fraction rounded to 4 decimals
  double pass_rate_percent = 0.0;  // pass_rate * 100 at 2 decimals
  std::map<std::string, std::size_t> reason_counts;
};

/// Throws EmptyInput for no decisions.
GateSummary gate_report(const std::vector<GateDecision>& decisions);

void to_json(nlohmann::json& j, const GateDecision& d);
void from_json(const nlohmann::json& j, GateDecision& d);
void to_json(nlohmann::json& j, const GateSummary& s);

}  // namespace porcelain
