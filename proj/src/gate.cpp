#include "porcelain/gate.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <Eigen/Eigenvalues>

#include "porcelain/errors.hpp"
#include "porcelain/io.hpp"
#include "porcelain/kernels.hpp"

namespace porcelain {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "EMB1";

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteInput(std::string(what) + " contains NaN or infinity");
}

}  // namespace

EmbeddingSet EmbeddingSet::decode(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != kMagic) {
    throw FormatError("embedding file must start with EMB1 and two u32 sizes");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t n = read_u32le(p + 4);
  const std::uint64_t d = read_u32le(p + 8);
  if (n == 0 || d == 0) throw EmptyInput("embedding file declares N=" + std::to_string(n) +
                                         ", D=" + std::to_string(d));
  const std::uint64_t expected = 12 + 4 * n * d;
  if (bytes.size() != expected) {
    throw FormatError("embedding file has " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
  EmbeddingSet e;
  e.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const unsigned char* q = p + 12;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j, q += 4) {
      const float f = std::bit_cast<float>(read_u32le(q));
      e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f;
    }
  }
  require_finite(e.vectors, "embedding file");
  return e;
}

EmbeddingSet EmbeddingSet::read(const std::filesystem::path& path) {
  return decode(io::read_file(path));
}

std::string EmbeddingSet::encode() const {
  if (vectors.rows() == 0 || vectors.cols() == 0) throw EmptyInput("empty embedding set");
  std::string out(kMagic);
  write_u32le(out, static_cast<std::uint32_t>(vectors.rows()));
  write_u32le(out, static_cast<std::uint32_t>(vectors.cols()));
  out.reserve(out.size() + 4 * static_cast<std::size_t>(vectors.size()));
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      write_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(vectors(i, j))));
    }
  }
  return out;
}

GaussianStats gaussian_stats(const Eigen::MatrixXd& x) {
  if (x.rows() == 0 || x.cols() == 0) throw EmptyInput("gaussian_stats needs at least one vector");
  require_finite(x, "embedding set");
  GaussianStats s;
  s.samples = x.rows();
  s.mean = kernels::parallel::column_means(x);
  if (x.rows() == 1) {
    s.covariance = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  } else {
    s.covariance = kernels::parallel::scatter(x, s.mean) / static_cast<double>(x.rows() - 1);
  }
  return s;
}

GaussianStats gaussian_stats(const EmbeddingSet& e) { return gaussian_stats(e.vectors); }

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const auto d = a.mean.size();
  if (b.mean.size() != d || a.covariance.rows() != d || a.covariance.cols() != d ||
      b.covariance.rows() != d || b.covariance.cols() != d) {
    throw DimensionMismatch("Gaussian statistics have dimensions " + std::to_string(d) + " and " +
                            std::to_string(b.mean.size()));
  }
  require_finite(a.mean, "mean");
  require_finite(b.mean, "mean");
  require_finite(a.covariance, "covariance");
  require_finite(b.covariance, "covariance");

  // Symmetrize to absorb round-off from the accumulation.
  const Eigen::MatrixXd sa = 0.5 * (a.covariance + a.covariance.transpose());
  const Eigen::MatrixXd sb = 0.5 * (b.covariance + b.covariance.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
  if (ea.info() != Eigen::Success) throw NumericalFailure("eigen-decomposition of S_a did not converge");
  Eigen::VectorXd root = ea.eigenvalues();
  for (Eigen::Index i = 0; i < root.size(); ++i) root(i) = root(i) < kEigenClamp ? 0.0 : std::sqrt(root(i));
  const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * root.asDiagonal() * ea.eigenvectors().transpose();

  Eigen::MatrixXd m = sqrt_a * sb * sqrt_a;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m, Eigen::EigenvaluesOnly);
  if (em.info() != Eigen::Success) throw NumericalFailure("eigen-decomposition of the product did not converge");
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < em.eigenvalues().size(); ++i) {
    const double l = em.eigenvalues()(i);
    if (l >= kEigenClamp) tr_sqrt += std::sqrt(l);
  }

  const double result =
      (a.mean - b.mean).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
  if (!std::isfinite(result)) throw NumericalFailure("Fréchet distance is not finite");
  if (result < 0.0) {
    if (result < -kNegativeResultTolerance) {
      throw NumericalFailure("Fréchet distance came out at " + std::to_string(result) +
                             "; are the covariances positive semi-definite?");
    }
    return 0.0;
  }
  return result;
}

json to_json_summary(const GaussianStats& s) {
  return json{{"samples", s.samples},
              {"dim", s.mean.size()},
              {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
              {"covariance_trace", s.covariance.trace()}};
}

// ---------------------------------------------------------------------------

GateConfig GateConfig::from_json(const json& j) {
  GateConfig c;
  try {
    c.expected_width = j.value("expected_width", c.expected_width);
    c.expected_height = j.value("expected_height", c.expected_height);
    if (j.contains("channel_mean")) {
      c.channel_mean = {j.at("channel_mean").at(0).get<double>(), j.at("channel_mean").at(1).get<double>()};
    }
    if (j.contains("channel_variance")) {
      c.channel_variance = {j.at("channel_variance").at(0).get<double>(),
                            j.at("channel_variance").at(1).get<double>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("gate config: ") + e.what());
  }
  if (c.channel_mean.lo > c.channel_mean.hi || c.channel_variance.lo > c.channel_variance.hi) {
    throw DomainError("gate band lower bound exceeds upper bound");
  }
  return c;
}

json to_json(const GateConfig& c) {
  return json{{"expected_width", c.expected_width},
              {"expected_height", c.expected_height},
              {"channel_mean", {c.channel_mean.lo, c.channel_mean.hi}},
              {"channel_variance", {c.channel_variance.lo, c.channel_variance.hi}}};
}

GateDecision auto_check(const ItemMetadata& meta, const GateConfig& cfg) {
  GateDecision d;
  d.item_id = meta.item_id;
  auto all_in = [](const std::vector<double>& v, const Band& b) {
    if (v.empty()) return false;
    for (double x : v) {
      if (!std::isfinite(x) || !b.contains(x)) return false;
    }
    return true;
  };
  if (meta.width != cfg.expected_width || meta.height != cfg.expected_height) {
    d.reasons.emplace_back("resolution");
  }
  if (!meta.intact) d.reasons.emplace_back("integrity");
  if (!all_in(meta.channel_means, cfg.channel_mean)) d.reasons.emplace_back("channel_mean");
  if (!all_in(meta.channel_variances, cfg.channel_variance)) d.reasons.emplace_back("channel_variance");
  d.passed = d.reasons.empty();
  return d;
}

std::vector<ItemMetadata> read_metadata_csv(std::string_view text) {
  auto rows = io::parse_csv(text);
  if (rows.empty()) throw MalformedHeader("metadata file has no header");
  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[io::to_lower(io::trim(header[i]))] = i;
  for (const char* need : {"id", "width", "height", "intact"}) {
    if (!col.count(need)) throw MalformedHeader(std::string("metadata header lacks '") + need + "'");
  }
  static constexpr const char* kMeans[] = {"mean_r", "mean_g", "mean_b"};
  static constexpr const char* kVars[] = {"var_r", "var_g", "var_b"};

  std::vector<ItemMetadata> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto where = "metadata line " + std::to_string(rows[r].line);
    if (f.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields");
    }
    ItemMetadata m;
    m.item_id = f[col["id"]];
    long long w = 0, h = 0;
    if (!io::parse_int(f[col["width"]], w) || !io::parse_int(f[col["height"]], h)) {
      throw FormatError(where + ": width and height must be integers");
    }
    m.width = static_cast<int>(w);
    m.height = static_cast<int>(h);
    const auto flag = io::to_lower(f[col["intact"]]);
    if (flag == "1" || flag == "true" || flag == "yes") m.intact = true;
    else if (flag == "0" || flag == "false" || flag == "no") m.intact = false;
    else throw FormatError(where + ": intact must be a boolean");
    auto read_stats = [&](const char* const* names, std::vector<double>& into) {
      for (int c = 0; c < 3; ++c) {
        auto it = col.find(names[c]);
        if (it == col.end()) continue;
        double v;
        if (!io::parse_double(f[it->second], v)) throw FormatError(where + ": bad " + names[c]);
        into.push_back(v);
      }
    };
    read_stats(kMeans, m.channel_means);
    read_stats(kVars, m.channel_variances);
    out.push_back(std::move(m));
  }
  return out;
}

GateSummary gate_report(const std::vector<GateDecision>& decisions) {
  if (decisions.empty()) throw EmptyInput("gate report needs at least one decision");
  GateSummary s;
  s.total = decisions.size();
  for (const auto& d : decisions) {
    if (d.passed != d.reasons.empty()) {
      throw DomainError("decision " + d.item_id + " is inconsistent: passed must equal no reasons");
    }
    if (d.passed) ++s.passed;
    for (const auto& r : d.reasons) ++s.reason_counts[r];
  }
  s.failed = s.total - s.passed;
  const double fraction = static_cast<double>(s.passed) / static_cast<double>(s.total);
  const double scaled = std::round(fraction * 1e4);
  s.pass_rate = scaled / 1e4;
  s.pass_rate_percent = scaled / 1e2;
  return s;
}

void to_json(json& j, const GateDecision& d) {
  j = json{{"item_id", d.item_id}, {"passed", d.passed}, {"reasons", d.reasons}};
}

void from_json(const json& j, GateDecision& d) {
  d.item_id = j.at("item_id").get<std::string>();
  d.passed = j.at("passed").get<bool>();
  d.reasons = j.value("reasons", std::vector<std::string>{});
}

void to_json(json& j, const GateSummary& s) {
  j = json{{"total", s.total},
           {"passed", s.passed},
           {"failed", s.failed},
           {"pass_rate", s.pass_rate},
           {"pass_rate_percent", s.pass_rate_percent},
           {"reason_counts", s.reason_counts}};
}

}  // namespace porcelain
