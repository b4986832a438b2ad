#include "porcelain/catalog.hpp"

#include <set>
#include <sstream>
#include <unordered_map>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"

namespace porcelain {

namespace fs = std::filesystem;

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::Dynasty: return "dynasty";
    case Axis::Kiln: return "kiln";
    case Axis::Glaze: return "glaze";
    case Axis::Type: return "type";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view name) {
  for (Axis a : kAxes) {
    if (io::iequals(name, axis_name(a))) return a;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(Axis axis, std::vector<VocabEntry> entries)
    : axis_(axis), entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw DomainError(std::string(axis_name(axis_)) + " vocabulary is empty");
  }
  std::set<std::string> tokens;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (e.token.empty()) {
      throw DomainError(std::string(axis_name(axis_)) + " vocabulary has an empty token");
    }
    if (e.token.find_first_of("|,\t\r\n") != std::string::npos) {
      throw DomainError("vocabulary token may not contain '|', ',' or whitespace separators: " +
                        e.token);
    }
    if (e.display.empty()) e.display = e.token;
    if (!tokens.insert(io::to_lower(e.token)).second) {
      throw DomainError(std::string(axis_name(axis_)) + " vocabulary repeats token " + e.token);
    }
  }
  // Tokens win over aliases; an alias that collides with another entry's
  // token or alias is rejected so lookups stay unambiguous.
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    lookup_[io::to_lower(entries_[i].token)] = i;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const std::string* alias : {&entries_[i].display, &entries_[i].code}) {
      if (alias->empty()) continue;
      auto key = io::to_lower(*alias);
      auto [it, inserted] = lookup_.emplace(key, i);
      if (!inserted && it->second != i) {
        throw DomainError(std::string(axis_name(axis_)) + " vocabulary alias '" + *alias +
                          "' is ambiguous");
      }
    }
  }
}

Vocabulary Vocabulary::load(Axis axis, const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<VocabEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty() || io::trim(line).front() == '#') continue;
    VocabEntry e;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      parts.push_back(io::trim(line.substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    e.token = parts[0];
    if (parts.size() > 1) e.display = parts[1];
    if (parts.size() > 2) e.code = parts[2];
    entries.push_back(std::move(e));
  }
  return Vocabulary(axis, std::move(entries));
}

const VocabEntry* Vocabulary::find(std::string_view text) const {
  auto it = lookup_.find(io::to_lower(io::trim(text)));
  return it == lookup_.end() ? nullptr : &entries_[it->second];
}

std::optional<std::string> Vocabulary::canonical(std::string_view text) const {
  if (const auto* e = find(text)) return e->token;
  return std::nullopt;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view text) const {
  auto it = lookup_.find(io::to_lower(io::trim(text)));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const Vocabulary& VocabularySet::operator[](Axis axis) const {
  switch (axis) {
    case Axis::Dynasty: return dynasty;
    case Axis::Kiln: return kiln;
    case Axis::Glaze: return glaze;
    case Axis::Type: return type;
  }
  return dynasty;
}

std::uint64_t VocabularySet::theoretical_combinations() const {
  return static_cast<std::uint64_t>(dynasty.size()) * kiln.size() * glaze.size() * type.size();
}

VocabularySet VocabularySet::load(const fs::path& dir) {
  VocabularySet v;
  v.dynasty = Vocabulary::load(Axis::Dynasty, dir / "dynasty.txt");
  v.kiln = Vocabulary::load(Axis::Kiln, dir / "kiln.txt");
  v.glaze = Vocabulary::load(Axis::Glaze, dir / "glaze.txt");
  v.type = Vocabulary::load(Axis::Type, dir / "type.txt");
  return v;
}

// ---------------------------------------------------------------------------

std::string_view source_name(Source s) { return s == Source::PMBJ ? "PMBJ" : "PMTP"; }

std::optional<Source> parse_source(std::string_view text) {
  auto t = io::trim(text);
  if (io::iequals(t, "PMBJ")) return Source::PMBJ;
  if (io::iequals(t, "PMTP")) return Source::PMTP;
  return std::nullopt;
}

std::string ComboKey::str() const {
  std::string s;
  s.reserve(dynasty.size() + kiln.size() + glaze.size() + vessel_type.size() + 3);
  s += dynasty;
  s += '|';
  s += kiln;
  s += '|';
  s += glaze;
  s += '|';
  s += vessel_type;
  return s;
}

const std::string& ComboKey::operator[](Axis axis) const {
  switch (axis) {
    case Axis::Dynasty: return dynasty;
    case Axis::Kiln: return kiln;
    case Axis::Glaze: return glaze;
    case Axis::Type: return vessel_type;
  }
  return dynasty;
}

ComboKey ComboKey::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto bar = text.find('|', start);
    parts.push_back(io::trim(text.substr(start, bar == std::string_view::npos ? bar : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (parts.size() != 4) {
    throw FormatError("combo key must have four '|' separated parts: " + std::string(text));
  }
  for (const auto& p : parts) {
    if (p.empty()) throw FormatError("combo key has an empty part: " + std::string(text));
  }
  return {parts[0], parts[1], parts[2], parts[3]};
}

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "?";
}

std::string Diagnostic::to_string() const {
  if (row == 0) return message;
  return "row " + std::to_string(row) + ": " + message;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 7> kRequiredColumns{
    "id", "image_path", "dynasty", "kiln", "glaze", "type", "source"};

struct ColumnMap {
  std::array<std::size_t, kRequiredColumns.size()> index{};
  std::size_t width = 0;
};

ColumnMap map_header(const std::vector<std::string>& header) {
  ColumnMap map;
  map.width = header.size();
  std::vector<std::string> missing;
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) {
    std::optional<std::size_t> found;
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (io::iequals(header[h], kRequiredColumns[c])) {
        if (found) {
          throw MalformedHeader("header repeats column '" + std::string(kRequiredColumns[c]) + "'");
        }
        found = h;
      }
    }
    if (!found) {
      missing.emplace_back(kRequiredColumns[c]);
    } else {
      map.index[c] = *found;
    }
  }
  if (!missing.empty()) {
    std::string msg = "header is missing required column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw MalformedHeader(msg);
  }
  return map;
}

}  // namespace

Catalog parse_catalog_text(std::string_view text, const VocabularySet& vocab) {
  auto rows = io::parse_csv(text);
  if (rows.empty()) {
    throw MalformedHeader("catalog has no header row");
  }
  const ColumnMap cols = map_header(rows.front().fields);

  Catalog catalog;
  std::unordered_map<std::string, std::size_t> first_seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    // Record-based row numbering: header is row 1. Differs from the physical
    // line only when a quoted field spans lines.
    const std::size_t row_no = r + 1;
    auto diag = [&](std::string msg) {
      catalog.diagnostics.push_back({Severity::Error, row_no, std::move(msg)});
    };
    if (fields.size() != cols.width) {
      diag("expected " + std::to_string(cols.width) + " fields, found " +
           std::to_string(fields.size()));
      continue;
    }
    auto field = [&](std::size_t c) -> const std::string& { return fields[cols.index[c]]; };

    PorcelainRecord rec;
    rec.row = row_no;
    rec.record_id = field(0);
    rec.image_path = field(1);
    bool ok = true;
    if (rec.record_id.empty()) {
      diag("empty record id");
      ok = false;
    }
    std::array<std::string*, 4> dest{&rec.dynasty, &rec.kiln, &rec.glaze, &rec.vessel_type};
    for (Axis a : kAxes) {
      const auto& raw = field(2 + static_cast<std::size_t>(a));
      if (auto tok = vocab[a].canonical(raw)) {
        *dest[static_cast<std::size_t>(a)] = *tok;
      } else {
        diag(std::string(axis_name(a)) + " token not in vocabulary (" + raw + ")");
        ok = false;
      }
    }
    if (auto src = parse_source(field(6))) {
      rec.source = *src;
    } else {
      diag("source token not recognised (" + field(6) + ")");
      ok = false;
    }
    if (!ok) continue;

    auto [it, inserted] = first_seen.emplace(rec.record_id, row_no);
    if (!inserted) {
      diag("duplicate record id " + rec.record_id + " (first seen at row " +
           std::to_string(it->second) + ")");
      continue;
    }
    catalog.records.push_back(std::move(rec));
  }
  return catalog;
}

Catalog parse_catalog(const fs::path& path, const VocabularySet& vocab) {
  return parse_catalog_text(io::read_file(path), vocab);
}

std::string serialize_catalog(const Catalog& catalog) {
  std::string out = "id,image_path,dynasty,kiln,glaze,type,source\n";
  for (const auto& r : catalog.records) {
    out += io::join_csv({r.record_id, r.image_path, r.dynasty, r.kiln, r.glaze, r.vessel_type,
                         std::string(source_name(r.source))});
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

void ComboHistogram::add(const ComboKey& key, std::uint64_t n) {
  if (n == 0) return;
  counts_[key] += n;
  total_ += n;
}

void ComboHistogram::set(const ComboKey& key, std::uint64_t n) {
  auto it = counts_.find(key);
  if (it != counts_.end()) {
    total_ -= it->second;
    if (n == 0) {
      counts_.erase(it);
      return;
    }
    it->second = n;
    total_ += n;
  } else {
    add(key, n);
  }
}

std::uint64_t ComboHistogram::count(const ComboKey& key) const {
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

std::string ComboHistogram::to_csv() const {
  std::string out = "combo,count\n";
  for (const auto& [k, n] : counts_) {
    out += io::csv_escape(k.str());
    out += ',';
    out += std::to_string(n);
    out += '\n';
  }
  return out;
}

ComboHistogram ComboHistogram::from_csv(std::string_view text) {
  ComboHistogram h;
  auto rows = io::parse_csv(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    long long n = 0;
    if (f.size() != 2 || !io::parse_int(f[1], n)) {
      if (i == 0) continue;  // header
      throw FormatError("histogram line " + std::to_string(rows[i].line) +
                        ": expected 'combo,count'");
    }
    if (n < 0) {
      throw FormatError("histogram line " + std::to_string(rows[i].line) + ": negative count");
    }
    h.add(ComboKey::parse(f[0]), static_cast<std::uint64_t>(n));
  }
  return h;
}

ComboHistogram ComboHistogram::load(const fs::path& path) { return from_csv(io::read_file(path)); }

ComboHistogram combo_histogram(const Catalog& catalog) {
  ComboHistogram h;
  for (const auto& r : catalog.records) h.add(r.combo());
  return h;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate(const Catalog& catalog, const VocabularySet& vocab) {
  ValidationReport rep;
  rep.record_count = catalog.records.size();
  rep.theoretical_combinations = vocab.theoretical_combinations();

  for (const auto& d : catalog.diagnostics) {
    rep.findings.push_back(d);
    if (d.message.starts_with("duplicate record id")) ++rep.duplicate_ids;
    if (d.message.find("not in vocabulary") != std::string::npos) ++rep.out_of_vocabulary;
  }

  std::unordered_map<std::string, std::size_t> seen;
  std::set<ComboKey> combos;
  for (std::size_t i = 0; i < catalog.records.size(); ++i) {
    const auto& r = catalog.records[i];
    const std::size_t row = r.row;
    auto [it, inserted] = seen.emplace(r.record_id, row);
    if (!inserted) {
      ++rep.duplicate_ids;
      rep.findings.push_back({Severity::Error, row,
                              "duplicate record id " + r.record_id + " (first seen at row " +
                                  std::to_string(it->second) + ")"});
    }
    bool in_vocab = true;
    for (Axis a : kAxes) {
      const auto& tok = r.combo()[a];
      const auto* e = vocab[a].find(tok);
      if (e == nullptr || e->token != tok) {
        in_vocab = false;
        ++rep.out_of_vocabulary;
        rep.findings.push_back({Severity::Error, row,
                                std::string(axis_name(a)) + " token not in vocabulary (" + tok +
                                    ")"});
      }
    }
    if (in_vocab) combos.insert(r.combo());
  }
  rep.observed_combinations = combos.size();
  return rep;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << "records:                  " << record_count << "\n"
     << "findings:                 " << findings.size() << "\n"
     << "duplicate ids:            " << duplicate_ids << "\n"
     << "out-of-vocabulary tokens: " << out_of_vocabulary << "\n"
     << "observed combinations:    " << observed_combinations << "\n"
     << "theoretical combinations: " << theoretical_combinations << "\n"
     << "coverage:                 " << observed_combinations << "/" << theoretical_combinations;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << " (" << coverage() * 100.0 << "%)\n";
  for (const auto& f : findings) {
    os << severity_name(f.severity) << ": " << f.to_string() << "\n";
  }
  return os.str();
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
  j = nlohmann::json{{"severity", severity_name(d.severity)}, {"row", d.row}, {"message", d.message}};
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json{{"records", r.record_count},
                     {"duplicate_ids", r.duplicate_ids},
                     {"out_of_vocabulary", r.out_of_vocabulary},
                     {"observed_combinations", r.observed_combinations},
                     {"theoretical_combinations", r.theoretical_combinations},
                     {"coverage", r.coverage()},
                     {"findings", r.findings}};
}

}  // namespace porcelain
