#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "porcelain/gate.hpp"
#include "porcelain/weighting.hpp"

namespace porcelain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "PORCELAIN_OUT_DIR";

/// Inputs and overrides for the `pipeline` subcommand. Relative paths resolve
/// against the config file's directory.
struct PipelineConfig {
  std::filesystem::path catalog;
  std::filesystem::path vocab_dir;
  std::filesystem::path lexicon;            // optional, enables prompts
  std::filesystem::path allocation_spec;    // optional, enables synthetic planning
  std::filesystem::path gate_metadata;      // optional, enables gate check
  std::filesystem::path out_dir;
  std::int64_t seed = 42;
  WeightingConfig weighting;
  std::int64_t aug_threshold = 50;
  std::int64_t aug_target = 100;
  std::optional<std::int64_t> synthetic_total;
  GateConfig gate;

  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Runs one command line. Data goes to files or `out`, logs and errors to
/// `err`. Returns 0 on success, 1 on input or data errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace porcelain::cli
