#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace porcelain {

enum class Axis { Dynasty = 0, Kiln = 1, Glaze = 2, Type = 3 };

inline constexpr std::array<Axis, 4> kAxes{Axis::Dynasty, Axis::Kiln, Axis::Glaze, Axis::Type};

std::string_view axis_name(Axis axis);
std::optional<Axis> parse_axis(std::string_view name);

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct VocabEntry {
  std::string token;    // canonical form stored in records and combo keys
  std::string display;  // human readable name, defaults to token
  std::string code;     // optional 2-3 letter mnemonic
};

/// Ordered token set for one axis. Lookups are case-insensitive and accept
/// the token, its display name or its mnemonic code.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(Axis axis, std::vector<VocabEntry> entries);

  /// File format: one token per line; optional tab-separated display name and
  /// mnemonic code. Lines starting with '#' are comments.
  static Vocabulary load(Axis axis, const std::filesystem::path& path);

  Axis axis() const { return axis_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  /// Canonical token for `text`, if it names a member.
  std::optional<std::string> canonical(std::string_view text) const;
  std::optional<std::size_t> index_of(std::string_view text) const;
  const VocabEntry* find(std::string_view text) const;

 private:
  Axis axis_ = Axis::Dynasty;
  std::vector<VocabEntry> entries_;
  std::map<std::string, std::size_t> lookup_;  // lower-cased alias -> entry
};

struct VocabularySet {
  Vocabulary dynasty;
  Vocabulary kiln;
  Vocabulary glaze;
  Vocabulary type;

  const Vocabulary& operator[](Axis axis) const;

  /// Product of the four vocabulary sizes.
  std::uint64_t theoretical_combinations() const;

  /// Loads dynasty.txt, kiln.txt, glaze.txt and type.txt from a directory.
  static VocabularySet load(const std::filesystem::path& dir);
};

// ---------------------------------------------------------------------------
// Records and combinations
// ---------------------------------------------------------------------------

enum class Source { PMBJ, PMTP };

std::string_view source_name(Source s);
std::optional<Source> parse_source(std::string_view text);

/// The dynasty|kiln|glaze|type tuple. Ordering is lexicographic on the
/// canonical string so every container keyed by ComboKey iterates in
/// canonical combo order.
struct ComboKey {
  std::string dynasty;
  std::string kiln;
  std::string glaze;
  std::string vessel_type;

  std::string str() const;
  const std::string& operator[](Axis axis) const;

  /// Parses "DY|KL|GL|TP". Throws FormatError unless there are exactly four
  /// non-empty parts.
  static ComboKey parse(std::string_view text);

  bool operator==(const ComboKey&) const = default;
  std::strong_ordering operator<=>(const ComboKey& other) const { return str() <=> other.str(); }
};

struct PorcelainRecord {
  std::string record_id;
  std::string image_path;
  std::string dynasty;
  std::string kiln;
  std::string glaze;
  std::string vessel_type;
  Source source = Source::PMBJ;
  std::size_t row = 0;  // source row when parsed from a file; not part of identity

  ComboKey combo() const { return {dynasty, kiln, glaze, vessel_type}; }

  bool operator==(const PorcelainRecord& o) const {
    return record_id == o.record_id && image_path == o.image_path && dynasty == o.dynasty &&
           kiln == o.kiln && glaze == o.glaze && vessel_type == o.vessel_type &&
           source == o.source;
  }
};

enum class Severity { Info, Warning, Error };
std::string_view severity_name(Severity s);

struct Diagnostic {
  Severity severity = Severity::Error;
  std::size_t row = 0;  // 1-based, header is row 1; 0 when not row specific
  std::string message;

  std::string to_string() const;
};

struct Catalog {
  std::vector<PorcelainRecord> records;
  std::vector<Diagnostic> diagnostics;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Parses a comma-delimited catalog with a header naming at least
/// id, image_path, dynasty, kiln, glaze, type and source (any order, any case).
/// A `pattern` column and unknown columns are ignored. Invalid rows become
/// diagnostics instead of failing the whole file.
/// Throws MissingFile, MalformedHeader.
Catalog parse_catalog(const std::filesystem::path& path, const VocabularySet& vocab);
Catalog parse_catalog_text(std::string_view text, const VocabularySet& vocab);

/// Inverse of parse_catalog for valid records (header + one line per record).
std::string serialize_catalog(const Catalog& catalog);

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

/// Per-combination sample counts. Zero counts are never stored.
class ComboHistogram {
 public:
  void add(const ComboKey& key, std::uint64_t n = 1);
  /// Replaces the count; zero erases the entry.
  void set(const ComboKey& key, std::uint64_t n);
  std::uint64_t count(const ComboKey& key) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  const std::map<ComboKey, std::uint64_t>& entries() const { return counts_; }

  /// Two-column CSV "combo,count" with a header line.
  std::string to_csv() const;
  static ComboHistogram from_csv(std::string_view text);
  static ComboHistogram load(const std::filesystem::path& path);

  bool operator==(const ComboHistogram&) const = default;

 private:
  std::map<ComboKey, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

ComboHistogram combo_histogram(const Catalog& catalog);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::vector<Diagnostic> findings;
  std::size_t record_count = 0;
  std::size_t duplicate_ids = 0;
  std::size_t out_of_vocabulary = 0;
  std::size_t observed_combinations = 0;
  std::uint64_t theoretical_combinations = 0;

  double coverage() const {
    return theoretical_combinations == 0
               ? 0.0
               : static_cast<double>(observed_combinations) /
                     static_cast<double>(theoretical_combinations);
  }
  bool clean() const { return findings.empty(); }
  std::string to_text() const;
};

/// Re-checks ids and tokens of every record and carries over parse
/// diagnostics; reports combination coverage against the vocabularies.
ValidationReport validate(const Catalog& catalog, const VocabularySet& vocab);

void to_json(nlohmann::json& j, const Diagnostic& d);
void to_json(nlohmann::json& j, const ValidationReport& r);

}  // namespace porcelain
