#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "decaygraph/errors.hpp"
#include "decaygraph/kernels.hpp"
#include "decaygraph/logit.hpp"

using namespace decaygraph;

namespace {

struct Data {
  std::vector<std::vector<double>> cols;
  std::vector<int> y;
  std::vector<std::span<const double>> spans() const {
    return {cols.begin(), cols.end()};
  }
  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (std::size_t k = 0; k < cols.size(); ++k) n.push_back("x" + std::to_string(k));
    return n;
  }
  std::vector<double> row(std::size_t r) const {
    std::vector<double> v;
    for (const auto& c : cols) v.push_back(c[r]);
    return v;
  }
};

Data planted(std::uint64_t seed, std::size_t n, std::vector<double> beta, double b0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  Data d;
  d.cols.assign(beta.size(), std::vector<double>(n));
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = b0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
      d.cols[k][i] = g(rng);
      z += beta[k] * d.cols[k][i];
    }
    d.y[i] = u(rng) < 1 / (1 + std::exp(-z));
  }
  return d;
}

}  // namespace

TEST(Logit, Link) {
  EXPECT_EQ(sigmoid(0), 0.5);
  LogitModel m{{"x"}, 0.0, {1.0}, {}};
  const std::vector<double> zero{0.0};
  EXPECT_EQ(m.predict_proba(zero), 0.5);
  m.intercept = -0.7;
  EXPECT_DOUBLE_EQ(m.predict_proba(zero), 1 / (1 + std::exp(0.7)));
  EXPECT_GT(sigmoid(800), 0.999);
  EXPECT_LT(sigmoid(-800), 1e-300);
}

TEST(Logit, ProbabilityMatchesFormula) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    LogitModel m;
    m.intercept = g(rng);
    std::vector<double> x(6);
    double z = m.intercept;
    for (std::size_t k = 0; k < x.size(); ++k) {
      m.feature_names.push_back("f" + std::to_string(k));
      m.coefficients.push_back(g(rng));
      x[k] = g(rng);
      z += m.coefficients[k] * x[k];
    }
    EXPECT_NEAR(m.predict_proba(x), 1 / (1 + std::exp(-z)), 1e-12);
    EXPECT_EQ(m.predict_class(x), m.predict_proba(x) >= 1 - m.predict_proba(x) ? 1 : 0);
  }
}

TEST(Logit, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = planted(100 + trial, 40, {g(rng), g(rng), g(rng), g(rng), g(rng)}, g(rng));
    std::vector<double> beta(5);
    for (auto& b : beta) b = 0.5 * g(rng);
    const double b0 = 0.5 * g(rng);
    const double ridge = 0.01;
    const auto grad = logit_gradient(d.spans(), d.y, b0, beta, ridge);
    const double h = 1e-5;
    for (std::size_t k = 0; k <= beta.size(); ++k) {
      auto plus = beta, minus = beta;
      double p0 = b0, m0 = b0;
      if (k == 0) {
        p0 += h, m0 -= h;
      } else {
        plus[k - 1] += h, minus[k - 1] -= h;
      }
      const double fd = (logit_objective(d.spans(), d.y, p0, plus, ridge) -
                         logit_objective(d.spans(), d.y, m0, minus, ridge)) /
                        (2 * h);
      EXPECT_LE(std::abs(fd - grad[k]), 1e-6 * std::max(1.0, std::abs(grad[k])));
    }
  }
}

TEST(Logit, RecoversPlantedCoefficients) {
  const auto d = planted(3, 20000, {1.0, -0.5, 0.0}, 0.3);
  const auto m = train_logit(d.spans(), d.names(), d.y);
  EXPECT_TRUE(m.training.converged);
  EXPECT_NEAR(m.intercept, 0.3, 0.06);
  EXPECT_NEAR(m.coefficients[0], 1.0, 0.06);
  EXPECT_NEAR(m.coefficients[1], -0.5, 0.06);
  EXPECT_NEAR(m.coefficients[2], 0.0, 0.06);
}

TEST(Logit, NullModel) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Data d;
  d.cols.assign(4, std::vector<double>(10000));
  d.y.resize(10000);
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    for (auto& c : d.cols) c[i] = u(rng);
    d.y[i] = u(rng) < 0.6;
  }
  const auto m = train_logit(d.spans(), d.names(), d.y);
  const double n1 = static_cast<double>(std::count(d.y.begin(), d.y.end(), 1));
  const double n0 = static_cast<double>(d.y.size()) - n1;
  double centered = m.intercept;
  for (std::size_t k = 0; k < m.coefficients.size(); ++k) {
    EXPECT_LT(std::abs(m.coefficients[k]), 0.2);
    centered += 0.5 * m.coefficients[k];
  }
  EXPECT_NEAR(centered, std::log(n1 / n0), 0.02);

  Data flat;
  flat.cols.assign(2, std::vector<double>(10000, 0.0));
  flat.y = d.y;
  const auto f = train_logit(flat.spans(), flat.names(), flat.y);
  EXPECT_NEAR(f.intercept, std::log(n1 / n0), 1e-8);
  for (double b : f.coefficients) EXPECT_LT(std::abs(b), 0.05);
}

TEST(Logit, SeparableDataSaturates) {
  Data d;
  d.cols.assign(1, {});
  for (int i = -20; i <= 20; ++i) {
    if (i == 0) continue;
    d.cols[0].push_back(i);
    d.y.push_back(i > 0);
  }
  LogitConfig cfg;
  cfg.max_iter = 50;
  const auto m = train_logit(d.spans(), d.names(), d.y, cfg);
  for (std::size_t r = 0; r < d.y.size(); ++r) {
    const double p = m.predict_proba(d.row(r));
    if (d.y[r]) {
      EXPECT_GE(p, 0.99);
    } else {
      EXPECT_LE(p, 0.01);
    }
  }
}

TEST(Logit, ObjectiveNeverIncreases) {
  const auto d = planted(5, 3000, {2.0, -1.0, 0.5}, -0.2);
  double prev = INFINITY;
  for (std::size_t it = 1; it <= 8; ++it) {
    LogitConfig cfg;
    cfg.max_iter = it;
    const auto m = train_logit(d.spans(), d.names(), d.y, cfg);
    const double obj = logit_objective(d.spans(), d.y, m.intercept, m.coefficients, cfg.ridge);
    EXPECT_LE(obj, prev + 1e-9);
    prev = obj;
  }
}

TEST(Logit, SingleClassAndNonFiniteAreErrors) {
  Data d;
  d.cols = {{1, 2, 3}};
  d.y = {1, 1, 1};
  EXPECT_THROW(train_logit(d.spans(), d.names(), d.y), DataError);
  d.y = {0, 1, 1};
  d.cols[0][1] = NAN;
  EXPECT_THROW(train_logit(d.spans(), d.names(), d.y), DataError);
}

TEST(Logit, RowOrderDoesNotMatter) {
  auto d = planted(6, 2000, {0.8, -0.3}, 0.1);
  const auto a = train_logit(d.spans(), d.names(), d.y);
  std::vector<std::size_t> perm(d.y.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(7);
  std::shuffle(perm.begin(), perm.end(), rng);
  Data s = d;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t k = 0; k < d.cols.size(); ++k) s.cols[k][i] = d.cols[k][perm[i]];
    s.y[i] = d.y[perm[i]];
  }
  const auto b = train_logit(s.spans(), s.names(), s.y);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_NEAR(a.predict_proba(d.row(r)), b.predict_proba(d.row(r)), 1e-8);
}

TEST(Logit, DuplicatedConstantFeatureLeavesProbabilitiesAlone) {
  const auto d = planted(8, 2000, {0.9, -0.4}, 0.2);
  const auto base = train_logit(d.spans(), d.names(), d.y);
  Data dup = d;
  dup.cols.push_back(std::vector<double>(d.y.size(), 1.0));
  dup.cols.push_back(std::vector<double>(d.y.size(), 1.0));
  const auto m = train_logit(dup.spans(), dup.names(), dup.y);
  for (std::size_t r = 0; r < 100; ++r) {
    EXPECT_NEAR(base.predict_proba(d.row(r)), m.predict_proba(dup.row(r)), 1e-6);
  }
}

TEST(Logit, StandardizedFitReportsRawScale) {
  auto d = planted(9, 5000, {0.7, -1.2}, 0.4);
  for (auto& v : d.cols[0]) v = 50 + 20 * v;
  LogitConfig raw, std_cfg;
  std_cfg.standardize = true;
  const auto a = train_logit(d.spans(), d.names(), d.y, raw);
  const auto b = train_logit(d.spans(), d.names(), d.y, std_cfg);
  EXPECT_TRUE(b.training.standardized);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(a.coefficients[k], b.coefficients[k], 1e-6);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-5);
}

TEST(Logit, KernelChoiceDoesNotChangeFit) {
  if (!kernels::avx2_table()) GTEST_SKIP() << "AVX2 variant not available";
  const auto d = planted(10, 3000, {0.5, 0.5, -1.0}, 0.0);
  kernels::force_isa(kernels::Isa::scalar);
  const auto a = train_logit(d.spans(), d.names(), d.y);
  kernels::force_isa(kernels::Isa::avx2);
  const auto b = train_logit(d.spans(), d.names(), d.y);
  kernels::force_isa(std::nullopt);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.coefficients[k], b.coefficients[k], 1e-9);
}

TEST(Logit, OddsAreExpBeta) {
  LogitModel m{{"c_ij", "edate", "zero"}, 0.0, {0.0373, 2.9218, 0.0}, {}};
  const auto rows = report_odds(m);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].odds, 1.0380, 5e-5);
  EXPECT_NEAR(rows[1].odds, 18.5747, 1e-3);
  EXPECT_EQ(rows[2].odds, 1.0);
  for (const auto& r : rows) EXPECT_EQ(r.odds, std::exp(r.beta));
}

TEST(Logit, JsonRoundTrip) {
  const auto d = planted(11, 500, {0.3, 0.1}, 0.0);
  const auto m = train_logit(d.spans(), d.names(), d.y);
  const auto back = LogitModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.coefficients, m.coefficients);
  EXPECT_EQ(back.intercept, m.intercept);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(m.to_json()["model"], "logit");
}
