#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "barrier/error.hpp"
#include "barrier/potential.hpp"
#include "barrier/spectrum.hpp"

using namespace barrier;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(v.size());
  std::copy(v.begin(), v.end(), x.data());
  return x;
}

std::vector<PotentialModel> analytic_models() {
  Eigen::MatrixXd Q(2, 2);
  Q << 1.0, 0.3, 0.3, 2.0;
  return {PotentialModel::gaussian(0.5, 1), PotentialModel::gaussian(0.5, 2), PotentialModel::anisotropic_gaussian(0.7, Q),
          PotentialModel::gaussian_plus_cubic(0.5, Q, {{{2, 1}, 0.1}, {{0, 3}, -0.05}}),
          PotentialModel::quadratic_local(0.5, {1.0, 2.0})};
}

}  // namespace

TEST(Potential, EvalExamples) {
  EXPECT_DOUBLE_EQ(PotentialModel::gaussian(0.5, 1).eval(vec({0.0})), 0.5);
  EXPECT_NEAR(PotentialModel::quadratic_local(0.5, {1.0}).eval(vec({1.0})), 0.0, 1e-15);
  EXPECT_NEAR(PotentialModel::gaussian(0.5, 2).eval(vec({1.0, 1.0})), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(PotentialModel::gaussian(0.5, 2).eval(vec({1.0, 1.0})), 0.18394, 1e-5);
}

TEST(Potential, DerivativeTensorExamples) {
  const auto g = PotentialModel::gaussian(0.5, 1);
  for (const auto& [a, v] : g.derivative_tensor(3)) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(g.derivative_tensor(4).at(MultiIndex{4}), 1.5, 1e-14);
  for (const auto& [a, v] : PotentialModel::quadratic_local(0.5, {1.0, 3.0}).derivative_tensor(4)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(g.derivative_tensor(5), PreconditionError);
}

// Order-k tensors against central differences (step 1e-3) of the model's own lower derivatives.
TEST(Potential, DerivativeTensorMatchesFiniteDifferences) {
  const double s = 1e-3;
  for (const auto& m : analytic_models()) {
    const int n = m.dim();
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(n);
    auto e = [&](int j) { return Eigen::VectorXd(Eigen::VectorXd::Unit(n, j) * s); };
    for (int order = 1; order <= 4; ++order) {
      for (const auto& [a, v] : m.derivative_tensor(order)) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < a[j]; ++k) idx.push_back(j);
        double fd = 0.0;
        if (order == 1) {
          fd = (m.eval(e(idx[0])) - m.eval(-e(idx[0]))) / (2 * s);
        } else if (order == 2) {
          fd = (m.gradient(e(idx[1]))[idx[0]] - m.gradient(-e(idx[1]))[idx[0]]) / (2 * s);
        } else if (order == 3) {
          fd = (m.hessian(e(idx[2]))(idx[0], idx[1]) - m.hessian(-e(idx[2]))(idx[0], idx[1])) / (2 * s);
        } else {
          const Eigen::VectorXd p = e(idx[2]), q = e(idx[3]);
          fd = (m.hessian(p + q) - m.hessian(p - q) - m.hessian(q - p) + m.hessian(-p - q))(idx[0], idx[1]) / (4 * s * s);
        }
        const double scale = std::max(1.0, std::abs(v));
        EXPECT_LE(std::abs(fd - v), 1e-5 * scale) << kind_name(m.kind()) << " " << to_string(a);
      }
    }
  }
}

TEST(Potential, UnknownKindNamed) {
  EXPECT_THROW(parse_kind("lorentzian"), PreconditionError);
  EXPECT_EQ(parse_kind("anisotropic-gaussian"), PotentialKind::AnisotropicGaussian);
}

TEST(Spectrum, IntegerRates) {
  const auto s = spectrum_from_rates({1.0, 2.0}, 0.5, 6);
  ASSERT_GE(s.mu_seq.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s.mu_seq[k], k + 1.0, 1e-14);
  EXPECT_EQ(s.jhat, 2);
}

TEST(Spectrum, IrrationalRatesMatchEnumeration) {
  const double r = std::sqrt(2.0);
  const auto s = spectrum_from_rates({1.0, r}, 0.5, 10);
  std::vector<double> brute;
  for (int a = 0; a <= 12; ++a)
    for (int b = 0; b <= 12; ++b)
      if (a + b > 0) brute.push_back(a + b * r);
  std::sort(brute.begin(), brute.end());
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(s.mu_seq[k], brute[k], 1e-12);
  EXPECT_EQ(s.jhat, 3);
  EXPECT_NEAR(s.mu_seq[s.jhat - 1], 2.0, 1e-14);
  EXPECT_NEAR(s.mu_seq[0], s.lambda1(), 0.0);
}

TEST(Spectrum, AnisotropicGaussianRates) {
  Eigen::MatrixXd Q(2, 2);
  Q << 1.0, 0.0, 0.0, 4.0;
  const auto s = barrier_spectrum(PotentialModel::anisotropic_gaussian(0.5, Q));
  EXPECT_NEAR(s.lambdas[0], std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(s.lambdas[1], std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(s.lambdas[1], 2.0 * s.lambdas[0], 1e-14);
}

TEST(Spectrum, RejectsNonNegativeHessian) {
  const auto m = PotentialModel::user_tabulated(0.5, 2, {{{2, 0}, -1.0}, {{0, 2}, 0.25}});
  try {
    barrier_spectrum(m);
    FAIL() << "expected a failure";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos) << e.what();
  }
}

TEST(Spectrum, IndexSets) {
  const auto a = spectrum_from_rates({1.0, 2.0}, 0.5);
  EXPECT_EQ(a.index_set(1, 2.0), (std::vector<MultiIndex>{{0, 1}}));
  EXPECT_EQ(a.index_set(2, 1.0), (std::vector<MultiIndex>{{2, 0}}));
  EXPECT_TRUE(a.index_set(1, 3.0).empty());
  const auto b = spectrum_from_rates({1.0, 1.0}, 0.5);
  const auto I2 = b.index_set(2, 1.0);
  EXPECT_EQ(I2.size(), 3u);
  for (const MultiIndex& m : {MultiIndex{2, 0}, MultiIndex{1, 1}, MultiIndex{0, 2}})
    EXPECT_NE(std::find(I2.begin(), I2.end(), m), I2.end());
}

TEST(Spectrum, PairCountIdentity) {
  for (const auto& l : std::vector<std::vector<double>>{{1, 1, 1}, {1, 1, 2}, {1, 2, 2}, {0.5, 0.5, 0.5, 3}}) {
    const auto s = spectrum_from_rates(l, 0.5);
    for (double mu : l) {
      const int n1 = s.count(1, mu);
      EXPECT_EQ(s.count(2, mu), n1 * (n1 + 1) / 2);
    }
  }
}

TEST(Potential, DecaySpotCheck) {
  for (const auto& m : analytic_models()) {
    if (!m.decaying()) continue;
    const double C = decay_constant(m, 8.0);
    EXPECT_TRUE(std::isfinite(C));
  }
}
