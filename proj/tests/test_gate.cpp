#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "porcelain/errors.hpp"
#include "porcelain/gate.hpp"
#include "porcelain/kernels.hpp"
#include "support.hpp"

using namespace porcelain;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GaussianStats stats(VectorXd mean, MatrixXd cov) {
  GaussianStats s;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  s.samples = 100;
  return s;
}

MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n(0, 1);
  MatrixXd a(d, d + 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(gen);
  return a * a.transpose() / static_cast<double>(d + 3);
}

VectorXd random_vec(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n(0, 2);
  VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n(gen);
  return v;
}

MatrixXd random_rotation(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n(0, 1);
  MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(gen);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  return qr.householderQ();
}

// Trace of (Sa Sb)^{1/2} from the eigenvalues of the non-symmetric product.
double oracle_fid(const GaussianStats& a, const GaussianStats& b) {
  Eigen::EigenSolver<MatrixXd> es(a.covariance * b.covariance, false);
  double tr = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    tr += std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
  }
  return (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2 * tr;
}

// Reasons recomputed from the metadata alone.
std::vector<std::string> oracle_reasons(const ItemMetadata& m, const GateConfig& c) {
  std::vector<std::string> r;
  if (m.width != c.expected_width || m.height != c.expected_height) r.push_back("resolution");
  if (!m.intact) r.push_back("integrity");
  auto in_band = [](const std::vector<double>& v, const Band& b) {
    if (v.empty()) return false;
    for (double x : v) {
      if (!(x >= b.lo && x <= b.hi)) return false;
    }
    return true;
  };
  if (!in_band(m.channel_means, c.channel_mean)) r.push_back("channel_mean");
  if (!in_band(m.channel_variances, c.channel_variance)) r.push_back("channel_variance");
  return r;
}

ItemMetadata good_item(const std::string& id = "g") {
  return {id, 512, 512, true, {0.5, 0.4, 0.3}, {0.05, 0.04, 0.06}};
}

}  // namespace

TEST(Embeddings, EncodeDecodeRoundTrip) {
  EmbeddingSet e;
  e.vectors = MatrixXd{{1.5, -2.0, 0.25}, {3.0, 0.0, -1.0}};
  const auto bytes = e.encode();
  EXPECT_EQ(bytes.size(), 12u + 6u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);
  const auto back = EmbeddingSet::decode(bytes);
  EXPECT_EQ(back.vectors, e.vectors);

  const auto dir = test::scratch_dir("emb");
  std::ofstream(dir / "a.emb", std::ios::binary) << bytes;
  EXPECT_EQ(EmbeddingSet::read(dir / "a.emb").vectors, e.vectors);
  EXPECT_THROW(EmbeddingSet::read(dir / "missing.emb"), MissingFile);
}

TEST(Embeddings, BadFiles) {
  EmbeddingSet e;
  e.vectors = MatrixXd::Ones(2, 2);
  const auto bytes = e.encode();
  EXPECT_THROW(EmbeddingSet::decode("EMB2" + bytes.substr(4)), FormatError);
  EXPECT_THROW(EmbeddingSet::decode(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(EmbeddingSet::decode(bytes + "x"), FormatError);
  EXPECT_THROW(EmbeddingSet::decode("EMB"), FormatError);
  std::string empty = bytes.substr(0, 12);
  empty[4] = 0;
  EXPECT_THROW(EmbeddingSet::decode(empty.substr(0, 12)), EmptyInput);
  std::string nan = bytes;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 12, &q, 4);
  EXPECT_THROW(EmbeddingSet::decode(nan), NonFiniteInput);
}

TEST(Stats, Examples) {
  const auto one = gaussian_stats(MatrixXd{{3.0, -1.0}});
  EXPECT_EQ(one.mean, (VectorXd(2) << 3.0, -1.0).finished());
  EXPECT_EQ(one.covariance, MatrixXd::Zero(2, 2));
  const auto two = gaussian_stats(MatrixXd{{0.0, 0.0}, {2.0, 0.0}});
  EXPECT_EQ(two.mean, (VectorXd(2) << 1.0, 0.0).finished());
  EXPECT_EQ(two.covariance, (MatrixXd(2, 2) << 2.0, 0.0, 0.0, 0.0).finished());
  EXPECT_THROW(gaussian_stats(MatrixXd(0, 3)), EmptyInput);
  EXPECT_THROW(gaussian_stats(MatrixXd{{1.0, std::nan("")}}), NonFiniteInput);
}

TEST(Stats, SymmetricAndMatchesSerialReference) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0, 1);
  MatrixXd x(5000, 12);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(gen);
  const auto s = gaussian_stats(x);
  EXPECT_EQ(s.covariance, s.covariance.transpose());
  const VectorXd mean = kernels::serial::column_means(x);
  const MatrixXd cov = kernels::serial::scatter(x, mean) / 4999.0;
  EXPECT_LT((s.mean - mean).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((s.covariance - cov).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Stats, DuplicatedSetRelation) {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> u(-8, 8);
  const Eigen::Index n = 64, d = 5;
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(gen);
  MatrixXd dup(2 * n, d);
  dup << x, x;
  const auto a = gaussian_stats(x);
  const auto b = gaussian_stats(dup);
  EXPECT_EQ(a.mean, b.mean);
  // scatter doubles; normalization goes from n-1 to 2n-1.
  const MatrixXd expected = a.covariance * (2.0 * (n - 1)) / static_cast<double>(2 * n - 1);
  EXPECT_LT((b.covariance - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Frechet, Examples) {
  const auto a = stats(VectorXd::Constant(1, 0.0), MatrixXd::Constant(1, 1, 1.0));
  const auto b = stats(VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 4.0));
  EXPECT_NEAR(frechet_distance(a, b), 2.0, 1e-9);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-6);
  EXPECT_THROW(frechet_distance(a, stats(VectorXd::Zero(2), MatrixXd::Identity(2, 2))), DimensionMismatch);
  auto bad = a;
  bad.covariance(0, 0) = std::nan("");
  EXPECT_THROW(frechet_distance(bad, a), NonFiniteInput);
}

TEST(Frechet, IdenticalStatsGiveZero) {
  std::mt19937_64 gen(1);
  for (Eigen::Index d : {1, 2, 8, 16, 64}) {
    const auto s = stats(random_vec(gen, d), random_spd(gen, d));
    EXPECT_NEAR(frechet_distance(s, s), 0.0, 1e-6) << d;
  }
}

TEST(Frechet, DiagonalClosedForm) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> var(0.01, 5.0);
  std::uniform_int_distribution<Eigen::Index> dim(1, 16);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index d = dim(gen);
    VectorXd va(d), vb(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      va[i] = var(gen);
      vb[i] = var(gen);
    }
    const auto a = stats(random_vec(gen, d), va.asDiagonal().toDenseMatrix());
    const auto b = stats(random_vec(gen, d), vb.asDiagonal().toDenseMatrix());
    const double closed = (a.mean - b.mean).squaredNorm() + (va.cwiseSqrt() - vb.cwiseSqrt()).squaredNorm();
    EXPECT_NEAR(frechet_distance(a, b), closed, 1e-8);
  }
}

TEST(Frechet, GeneralMatchesProductEigenOracleAndIsSymmetric) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<Eigen::Index> dim(1, 16);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index d = dim(gen);
    const auto a = stats(random_vec(gen, d), random_spd(gen, d));
    const auto b = stats(random_vec(gen, d), random_spd(gen, d));
    const double ab = frechet_distance(a, b);
    EXPECT_NEAR(ab, oracle_fid(a, b), 1e-8);
    EXPECT_NEAR(ab, frechet_distance(b, a), 1e-8);
    EXPECT_GE(ab, 0.0);
  }
}

TEST(Frechet, RotationInvariant) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<Eigen::Index> dim(2, 16);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index d = dim(gen);
    const auto a = stats(random_vec(gen, d), random_spd(gen, d));
    const auto b = stats(random_vec(gen, d), random_spd(gen, d));
    const MatrixXd q = random_rotation(gen, d);
    const auto ra = stats(q * a.mean, q * a.covariance * q.transpose());
    const auto rb = stats(q * b.mean, q * b.covariance * q.transpose());
    EXPECT_NEAR(frechet_distance(ra, rb), frechet_distance(a, b), 1e-6);
  }
}

TEST(Frechet, RankDeficientCovariance) {
  std::mt19937_64 gen(5);
  MatrixXd x(3, 10);
  std::normal_distribution<double> n(0, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(gen);
  const auto a = gaussian_stats(x);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-6);
}

TEST(AutoCheck, Examples) {
  EXPECT_TRUE(auto_check(good_item()).passed);
  auto small = good_item();
  small.width = small.height = 256;
  const auto d = auto_check(small);
  EXPECT_FALSE(d.passed);
  EXPECT_EQ(d.reasons, std::vector<std::string>{"resolution"});
  auto dark = good_item();
  dark.channel_means[1] = 0.01;
  EXPECT_EQ(auto_check(dark).reasons, std::vector<std::string>{"channel_mean"});
  ItemMetadata worst{"w", 10, 10, false, {}, {}};
  EXPECT_EQ(auto_check(worst).reasons,
            (std::vector<std::string>{"resolution", "integrity", "channel_mean", "channel_variance"}));
}

TEST(AutoCheck, MatchesIndependentRecheck) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> mean(0.0, 1.0), var(0.0, 0.3);
  std::bernoulli_distribution coin(0.9);
  GateConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    ItemMetadata m{"i" + std::to_string(i), coin(gen) ? 512 : 511, 512, coin(gen), {}, {}};
    for (int c = 0; c < 3; ++c) {
      m.channel_means.push_back(mean(gen));
      m.channel_variances.push_back(var(gen));
    }
    const auto d = auto_check(m, cfg);
    EXPECT_EQ(d.reasons, oracle_reasons(m, cfg));
    EXPECT_EQ(d.passed, d.reasons.empty());
  }
}

TEST(AutoCheck, BundledDemoMetadata) {
  const auto items = read_metadata_csv(
      [] {
        std::ifstream in(test::data_dir() / "demo" / "gate_metadata.csv");
        return std::string(std::istreambuf_iterator<char>(in), {});
      }());
  ASSERT_EQ(items.size(), 200u);
  for (const auto& m : items) EXPECT_EQ(auto_check(m).reasons, oracle_reasons(m, GateConfig{}));
  EXPECT_THROW(read_metadata_csv("id,width\nx,1\n"), MalformedHeader);
}

TEST(Report, PassRateExact) {
  std::vector<GateDecision> ds;
  for (int i = 0; i < 1000; ++i) {
    GateDecision d{"i" + std::to_string(i), i < 912, {}};
    if (!d.passed) d.reasons = i % 2 ? std::vector<std::string>{"resolution"}
                                     : std::vector<std::string>{"integrity", "channel_mean"};
    ds.push_back(d);
  }
  const auto r = gate_report(ds);
  EXPECT_EQ(r.total, 1000u);
  EXPECT_EQ(r.passed, 912u);
  EXPECT_EQ(r.failed, 88u);
  EXPECT_EQ(r.pass_rate, 0.912);
  EXPECT_EQ(r.pass_rate_percent, 91.2);
  std::size_t reasons = 0;
  for (const auto& d : ds) reasons += d.reasons.size();
  std::size_t counted = 0;
  for (const auto& [name, n] : r.reason_counts) counted += n;
  EXPECT_EQ(counted, reasons);
  EXPECT_EQ(r.reason_counts.at("resolution"), 44u);

  const auto all = gate_report({GateDecision{"a", true, {}}});
  EXPECT_EQ(all.pass_rate_percent, 100.0);
  EXPECT_THROW(gate_report({}), EmptyInput);
  EXPECT_THROW(gate_report({GateDecision{"a", false, {}}}), DomainError);
}

TEST(Report, FourDecimalRounding) {
  std::vector<GateDecision> ds(3, GateDecision{"x", true, {}});
  ds[2] = GateDecision{"y", false, {"integrity"}};
  const auto r = gate_report(ds);
  EXPECT_EQ(r.pass_rate, 0.6667);
  EXPECT_EQ(r.pass_rate_percent, 66.67);
}
