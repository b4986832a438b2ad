#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "porcelain/catalog.hpp"

namespace porcelain::test {

inline std::filesystem::path source_dir() { return PORCELAIN_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

inline const VocabularySet& bundled_vocab() {
  static const VocabularySet v = VocabularySet::load(data_dir() / "vocab");
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("porcelain_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace porcelain::test
