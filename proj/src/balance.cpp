#include "porcelain/balance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/kernels.hpp"

namespace porcelain {

std::uint64_t CountDistribution::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<double> CountDistribution::as_double() const {
  return {counts.begin(), counts.end()};
}

CountDistribution CountDistribution::from_csv(std::string_view text) {
  CountDistribution d;
  auto rows = io::parse_csv(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    long long n = 0;
    if (f.size() != 2 || !io::parse_int(f[1], n)) {
      if (i == 0) continue;
      throw FormatError("counts line " + std::to_string(rows[i].line) + ": expected 'label,count'");
    }
    if (n < 0) throw FormatError("counts line " + std::to_string(rows[i].line) + ": negative count");
    d.labels.push_back(f[0]);
    d.counts.push_back(static_cast<std::uint64_t>(n));
  }
  return d;
}

CountDistribution CountDistribution::load(const std::filesystem::path& path) {
  return from_csv(io::read_file(path));
}

CountDistribution CountDistribution::from_histogram(const ComboHistogram& hist) {
  CountDistribution d;
  for (const auto& [k, n] : hist.entries()) {
    d.labels.push_back(k.str());
    d.counts.push_back(n);
  }
  return d;
}

std::string CountDistribution::to_csv() const {
  std::string out = "label,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out += io::csv_escape(i < labels.size() ? labels[i] : std::to_string(i));
    out += ',' + std::to_string(counts[i]) + '\n';
  }
  return out;
}

namespace {

void require_positive_total(const CountDistribution& d) {
  if (d.counts.empty() || d.total() == 0) {
    throw AllZero("count distribution has no positive count");
  }
}

}  // namespace

double imbalance_ratio(const CountDistribution& d) {
  require_positive_total(d);
  std::uint64_t lo = 0, hi = 0;
  for (auto c : d.counts) {
    if (c == 0) continue;
    if (lo == 0 || c < lo) lo = c;
    hi = std::max(hi, c);
  }
  return static_cast<double>(hi) / static_cast<double>(lo);
}

double gini(const CountDistribution& d) {
  require_positive_total(d);
  const auto x = d.as_double();
  const double k = static_cast<double>(x.size());
  const double mean = static_cast<double>(d.total()) / k;
  return kernels::parallel::abs_diff_sum(x) / (2.0 * k * k * mean);
}

double normalized_entropy(const CountDistribution& d) {
  if (d.counts.size() < 2) {
    throw DomainError("normalized entropy needs at least two classes");
  }
  require_positive_total(d);
  const double total = static_cast<double>(d.total());
  double h = 0.0;
  for (auto c : d.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(d.counts.size()));
}

std::vector<std::pair<double, double>> lorenz_points(const CountDistribution& d) {
  require_positive_total(d);
  std::vector<std::uint64_t> sorted = d.counts;
  std::sort(sorted.begin(), sorted.end());
  const double k = static_cast<double>(sorted.size());
  const double total = static_cast<double>(d.total());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(sorted.size() + 1);
  pts.emplace_back(0.0, 0.0);
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    pts.emplace_back(static_cast<double>(i + 1) / k, static_cast<double>(cum) / total);
  }
  // Integer cumulative sums make the last point exact, but pin it anyway.
  pts.back() = {1.0, 1.0};
  return pts;
}

double gini_from_lorenz(const std::vector<std::pair<double, double>>& points) {
  double area2 = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area2 += (points[i].first - points[i - 1].first) * (points[i].second + points[i - 1].second);
  }
  return 1.0 - area2;
}

BalanceReport balance_report(const CountDistribution& d) {
  require_positive_total(d);
  BalanceReport r;
  r.n_classes = d.counts.size();
  r.total = d.total();
  const auto x = d.as_double();
  const double k = static_cast<double>(x.size());
  r.min = *std::min_element(x.begin(), x.end());
  r.max = *std::max_element(x.begin(), x.end());
  r.zero_classes = static_cast<std::size_t>(std::count(d.counts.begin(), d.counts.end(), 0u));
  r.mean = static_cast<double>(r.total) / k;
  double ss = 0.0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.std_dev = std::sqrt(ss / k);
  r.coefficient_of_variation = r.std_dev / r.mean;
  r.imbalance_ratio = imbalance_ratio(d);
  std::uint64_t lo = 0;
  for (auto c : d.counts) {
    if (c != 0 && (lo == 0 || c < lo)) lo = c;
  }
  r.min_positive = static_cast<double>(lo);
  r.gini = gini(d);
  if (d.counts.size() >= 2) r.normalized_entropy = normalized_entropy(d);
  r.lorenz = lorenz_points(d);
  if (r.zero_classes > 0) {
    r.notes.push_back(std::to_string(r.zero_classes) +
                      " zero-count class(es): min over all classes is 0 while the imbalance "
                      "ratio uses the smallest positive count (" +
                      std::to_string(static_cast<std::uint64_t>(r.min_positive)) +
                      "); mean, std, gini and entropy include the zero classes");
  }
  return r;
}

// ---------------------------------------------------------------------------

const MetricChange& PairedBalanceReport::change(std::string_view metric) const {
  for (const auto& c : changes) {
    if (c.metric == metric) return c;
  }
  throw DomainError("no metric named " + std::string(metric));
}

PairedBalanceReport balance_report(const CountDistribution& before, const CountDistribution& after) {
  PairedBalanceReport p;
  p.before = balance_report(before);
  p.after = balance_report(after);
  auto add = [&](std::string name, double b, double a) {
    MetricChange c{std::move(name), b, a, std::nullopt};
    if (b != 0.0) {
      c.change_percent = (a - b) / b * 100.0;
    } else if (a == 0.0) {
      c.change_percent = 0.0;
    }
    p.changes.push_back(std::move(c));
  };
  add("total_classes", static_cast<double>(p.before.n_classes), static_cast<double>(p.after.n_classes));
  add("total_samples", static_cast<double>(p.before.total), static_cast<double>(p.after.total));
  add("min_samples", p.before.min_positive, p.after.min_positive);
  add("min_samples_all_classes", p.before.min, p.after.min);
  add("max_samples", p.before.max, p.after.max);
  add("mean_samples", p.before.mean, p.after.mean);
  add("std_dev", p.before.std_dev, p.after.std_dev);
  add("imbalance_ratio", p.before.imbalance_ratio, p.after.imbalance_ratio);
  add("coefficient_of_variation", p.before.coefficient_of_variation,
      p.after.coefficient_of_variation);
  add("gini", p.before.gini, p.after.gini);
  if (p.before.normalized_entropy && p.after.normalized_entropy) {
    add("normalized_entropy", *p.before.normalized_entropy, *p.after.normalized_entropy);
  }
  return p;
}

namespace {

std::string fmt(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

int precision_for(std::string_view metric) {
  if (metric == "total_classes" || metric == "total_samples" || metric.starts_with("min_samples") ||
      metric == "max_samples") {
    return 0;
  }
  if (metric == "mean_samples" || metric == "std_dev" || metric == "imbalance_ratio") return 1;
  return 3;
}

}  // namespace

std::string PairedBalanceReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(28) << "Metric" << std::right << std::setw(14) << "Before"
     << std::setw(14) << "After" << std::setw(12) << "Change" << "\n";
  os << std::string(68, '-') << "\n";
  for (const auto& c : changes) {
    const int prec = precision_for(c.metric);
    std::string change = "n/a";
    if (c.change_percent) {
      change = (*c.change_percent > 0 ? "+" : "") + fmt(*c.change_percent, 1) + "%";
    }
    os << std::left << std::setw(28) << c.metric << std::right << std::setw(14)
       << fmt(c.before, prec) << std::setw(14) << fmt(c.after, prec) << std::setw(12) << change
       << "\n";
  }
  for (const auto& n : before.notes) os << "note (before): " << n << "\n";
  for (const auto& n : after.notes) os << "note (after): " << n << "\n";
  return os.str();
}

std::string to_table(const BalanceReport& r) {
  std::ostringstream os;
  auto row = [&](std::string_view name, const std::string& v) {
    os << std::left << std::setw(28) << name << std::right << std::setw(14) << v << "\n";
  };
  row("Metric", "Value");
  os << std::string(42, '-') << "\n";
  row("total_classes", std::to_string(r.n_classes));
  row("total_samples", std::to_string(r.total));
  row("min_samples", fmt(r.min_positive, 0));
  row("min_samples_all_classes", fmt(r.min, 0));
  row("max_samples", fmt(r.max, 0));
  row("mean_samples", fmt(r.mean, 1));
  row("std_dev", fmt(r.std_dev, 1));
  row("imbalance_ratio", fmt(r.imbalance_ratio, 1));
  row("coefficient_of_variation", fmt(r.coefficient_of_variation, 3));
  row("gini", fmt(r.gini, 3));
  row("normalized_entropy", r.normalized_entropy ? fmt(*r.normalized_entropy, 3) : "n/a");
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

void to_json(nlohmann::json& j, const BalanceReport& r) {
  nlohmann::json lorenz = nlohmann::json::array();
  for (const auto& [x, y] : r.lorenz) lorenz.push_back({x, y});
  j = nlohmann::json{{"n_classes", r.n_classes},
                     {"zero_classes", r.zero_classes},
                     {"total", r.total},
                     {"min", r.min},
                     {"min_positive", r.min_positive},
                     {"max", r.max},
                     {"mean", r.mean},
                     {"std_dev", r.std_dev},
                     {"imbalance_ratio", r.imbalance_ratio},
                     {"coefficient_of_variation", r.coefficient_of_variation},
                     {"gini", r.gini},
                     {"normalized_entropy",
                      r.normalized_entropy ? nlohmann::json(*r.normalized_entropy) : nlohmann::json()},
                     {"lorenz", lorenz},
                     {"notes", r.notes}};
}

void to_json(nlohmann::json& j, const PairedBalanceReport& r) {
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& c : r.changes) {
    changes.push_back({{"metric", c.metric},
                       {"before", c.before},
                       {"after", c.after},
                       {"change_percent",
                        c.change_percent ? nlohmann::json(*c.change_percent) : nlohmann::json()}});
  }
  j = nlohmann::json{{"before", r.before}, {"after", r.after}, {"changes", changes}};
}

}  // namespace porcelain
