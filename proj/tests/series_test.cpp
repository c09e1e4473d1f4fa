#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "barrier/coupling.hpp"
#include "barrier/error.hpp"
#include "barrier/transport.hpp"
#include "models.hpp"

using namespace barrier;

namespace {

using C = std::complex<double>;

Eigen::VectorXd v2(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

TruncatedSeries quadratic_phi(const std::vector<double>& lambdas, int N) {
  const int n = static_cast<int>(lambdas.size());
  TruncatedSeries p(n, N);
  for (int j = 0; j < n; ++j) {
    MultiIndex a(n, 0);
    a[j] = 2;
    p.set(a, 0.5 * lambdas[j]);
  }
  return p;
}

PotentialModel cubic_model() { return models::cubic(); }

std::vector<PotentialModel> builtin_models() { return models::builtin(); }

std::vector<MultiIndex> indices_of_degree(int n, int d) {
  const auto B = MonomialBasis::get(n, d);
  return {&(*B)[B->begin(d)], &(*B)[B->begin(d)] + (B->end(d) - B->begin(d))};
}

}  // namespace

TEST(Series, ProductTruncates) {
  const auto one = TruncatedSeries::constant(2, 3, 1.0);
  const auto x = TruncatedSeries::variable(2, 3, 0);
  const auto p = (one + x) * (one - x);
  EXPECT_EQ(p.coeff({0, 0}), C(1.0));
  EXPECT_EQ(p.coeff({2, 0}), C(-1.0));
  EXPECT_EQ(p.coeff({1, 0}), C(0.0));
  const auto x3 = x * x * x;
  EXPECT_EQ(x3.coeff({3, 0}), C(1.0));
  EXPECT_EQ((x3 * x).max_abs(), 0.0);
}

TEST(Series, ProductDegreeIsMinimum) {
  const auto a = TruncatedSeries::variable(1, 4, 0);
  const auto b = TruncatedSeries::variable(1, 2, 0);
  EXPECT_EQ((a * b).degree(), 2);
}

TEST(Series, EvalAndDerivative) {
  TruncatedSeries f(2, 3);
  f.set({1, 1}, 2.0);
  f.set({0, 3}, -1.0);
  EXPECT_NEAR(std::abs(f.eval(std::vector<double>{0.5, 2.0}) - C(2.0 - 8.0)), 0.0, 1e-14);
  EXPECT_EQ(f.derivative_at_zero({0, 3}), C(-6.0));
  EXPECT_EQ(f.partial(1).coeff({0, 2}), C(-3.0));
}

TEST(ApplyL, QuadraticEigenvectors) {
  const std::vector<double> l{1.0, 2.0};
  const auto phi = quadratic_phi(l, 5);
  for (const auto& a : indices_of_degree(2, 3)) {
    TruncatedSeries f(2, 5);
    f.set(a, 1.0);
    const auto Lf = apply_L(phi, f);
    EXPECT_NEAR(std::abs(Lf.coeff(a) - C(l[0] * a[0] + l[1] * a[1])), 0.0, 1e-14);
    EXPECT_NEAR((Lf - f * C(l[0] * a[0] + l[1] * a[1])).max_abs(), 0.0, 1e-14);
  }
  EXPECT_EQ(apply_L(phi, TruncatedSeries::constant(2, 5, 3.0)).max_abs(), 0.0);
}

TEST(ApplyL, CubicPart) {
  // φ₊ = x₁²/2 + x₂² + c x₁²x₂ gives L x₁ = ∂₁φ₊ = x₁ + 2c x₁x₂.
  auto phi = quadratic_phi({1.0, 2.0}, 4);
  phi.set({2, 1}, 0.3);
  const auto Lx = apply_L(phi, TruncatedSeries::variable(2, 4, 0));
  EXPECT_NEAR(std::abs(Lx.coeff({1, 0}) - C(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(Lx.coeff({1, 1}) - C(0.6)), 0.0, 1e-15);
  EXPECT_NEAR((Lx.truncated(1) - TruncatedSeries::variable(2, 4, 0)).max_abs() +
                  std::abs(Lx.coeff({2, 0})) + std::abs(Lx.coeff({0, 2})),
              0.0, 1e-15);
}

TEST(Transport, SubresonantParticularAndKernel) {
  const auto spec = spectrum_from_rates({1.0, 2.0}, 0.5);
  const auto phi = quadratic_phi({1.0, 2.0}, 6);
  const auto sol = solve_transport(phi, spec, 1.0, TruncatedSeries::variable(2, 6, 1), 6);
  ASSERT_TRUE(sol.particular.has_value());
  EXPECT_TRUE(sol.image_report.satisfied);
  EXPECT_NEAR((*sol.particular - TruncatedSeries::variable(2, 6, 1)).max_abs(), 0.0, 1e-14);
  ASSERT_EQ(sol.kernel_basis.size(), 1u);
  EXPECT_NEAR(std::abs(sol.kernel_basis[0].coeff({1, 0}) - C(1.0)), 0.0, 1e-14);
}

TEST(Transport, ResonantKernelWithVanishingPsi) {
  const auto spec = spectrum_from_rates({1.0, 2.0}, 0.5);
  const auto phi = quadratic_phi({1.0, 2.0}, 6);
  const auto sol = solve_transport(phi, spec, 2.0, TruncatedSeries(2, 6), 6);
  EXPECT_EQ(sol.kernel_basis.size(), 2u);
  EXPECT_EQ(psi_map(phi, spec).nullity, 1);
}

TEST(Transport, LinearObstruction) {
  const auto spec = spectrum_from_rates({1.0, 2.0}, 0.5);
  const auto sol = solve_transport(quadratic_phi({1.0, 2.0}, 6), spec, 1.0, TruncatedSeries::variable(2, 6, 0), 6);
  EXPECT_FALSE(sol.image_report.satisfied);
  EXPECT_EQ(sol.image_report.condition, "linear obstruction");
  EXPECT_FALSE(sol.particular.has_value());
}

TEST(Transport, RoundTrip) {
  const auto m = cubic_model();
  const auto frame = diagonal_frame(m, 7);
  const auto phi = eikonal_taylor(frame, 7);
  const int N = 6;
  for (double mu : {frame.spec.lambdas[0], frame.spec.lambdas[1]}) {
    TruncatedSeries g(2, N);
    for (std::size_t k = 0; k < g.basis().size(); ++k)
      if (degree(g.basis()[k]) >= 2) g.at(k) = C(std::sin(1.0 + k), std::cos(2.0 * k));
    const auto sol = solve_transport(phi.resized(N + 1), frame.spec, mu, g, N);
    ASSERT_TRUE(sol.particular.has_value()) << sol.image_report.condition;
    const auto& E = *sol.particular;
    const auto r = apply_L(phi.resized(N), E) - E * C(mu) - g;
    for (std::size_t k = 0; k < r.basis().size(); ++k) {
      if (degree(r.basis()[k]) <= N - 1) {
        EXPECT_LE(std::abs(r.at(k)), 1e-12 * std::max(1.0, std::abs(g.at(k))));
      }
    }
  }
}

TEST(Transport, KernelDimensions) {
  // dim Ker L_μ = n₁(μ) below 2λ₁, n₂(λ₁) + n(Ψ) at 2λ₁, with trivial Ker ∩ Im (resp. Im²).
  std::vector<PotentialModel> models;
  for (const auto& l : std::vector<std::vector<double>>{{1, 2}, {1, 1}, {1, std::sqrt(2.0)}})
    models.push_back(PotentialModel::quadratic_local(0.5, l));
  models.push_back(cubic_model());
  for (const auto& model : models) {
    const auto frame = diagonal_frame(model, 6);
    const auto& l = frame.spec.lambdas;
    const auto phi = eikonal_taylor(frame, 6);
    const auto& spec = frame.spec;
    for (double mu : spec.mu_seq) {
      if (mu > 2.0 * l[0] * (1.0 + 1e-12)) break;
      const auto st = analyze_transport(phi, mu, 6);
      if (spec.equal(mu, 2.0 * l[0])) {
        EXPECT_EQ(st.dim_kernel, spec.count(2, l[0]) + psi_map(phi, spec).nullity);
        EXPECT_EQ(st.dim_kernel_cap_image2, 0);
      } else {
        EXPECT_EQ(st.dim_kernel, spec.count(1, mu));
        EXPECT_EQ(st.dim_kernel_cap_image, 0);
      }
    }
  }
}

TEST(Psi, Examples) {
  const auto s12 = spectrum_from_rates({1.0, 2.0}, 0.5);
  const auto p0 = psi_map(quadratic_phi({1.0, 2.0}, 4), s12);
  EXPECT_EQ(p0.matrix.norm(), 0.0);
  EXPECT_EQ(p0.nullity, s12.count(1, 2.0));
  const auto sr = spectrum_from_rates({1.0, std::sqrt(2.0)}, 0.5);
  EXPECT_EQ(psi_map(quadratic_phi({1.0, std::sqrt(2.0)}, 4), sr).matrix.cols(), 0);
  // x₁²x₂ in V enters φ₊ at degree 3 as −0.1/(2λ₁ + λ₂) x₁²x₂, and Ψ = ∂^{(2,1)}φ₊/2!.
  const auto frame = diagonal_frame(cubic_model(), 6);
  const auto psi = psi_map(eikonal_taylor(frame, 6), frame.spec);
  ASSERT_EQ(psi.matrix.rows(), 1);
  ASSERT_EQ(psi.matrix.cols(), 1);
  EXPECT_NEAR(psi.matrix(0, 0), -0.1 / (2.0 * std::sqrt(0.5) + std::sqrt(2.0)), 1e-14);
  EXPECT_EQ(psi.nullity, 0);
}

TEST(Eikonal, QuadraticLocalIsExact) {
  const auto phi = eikonal_taylor(diagonal_frame(PotentialModel::quadratic_local(0.5, {1.0, 2.0}), 6), 6);
  EXPECT_NEAR((phi - quadratic_phi({1.0, 2.0}, 6)).max_abs(), 0.0, 1e-15);
}

TEST(Eikonal, EvenModelHasEvenSeries) {
  const auto phi = eikonal_taylor(diagonal_frame(PotentialModel::gaussian(0.5, 2), 7), 7);
  for (std::size_t k = 0; k < phi.basis().size(); ++k) {
    if (degree(phi.basis()[k]) % 2 == 1) {
      EXPECT_EQ(phi.at(k), C(0.0));
    }
  }
}

TEST(Eikonal, GaussianFourthOrder) {
  // ∂⁴φ₊(0) = −∂⁴V(0)/(4λ) with ∂⁴V(0) = 3E₀ and λ = 2^{−1/2}.
  const auto phi = eikonal_taylor(diagonal_frame(PotentialModel::gaussian(0.5, 1), 6), 6);
  EXPECT_NEAR(phi.derivative_at_zero({4}).real(), -3.0 / (4.0 * std::sqrt(2.0)), 1e-13);
}

TEST(Eikonal, SolvesEikonalEquation) {
  for (const auto& m : builtin_models()) {
    const auto frame = diagonal_frame(m, 7);
    const auto phi = eikonal_taylor(frame, 7);
    TruncatedSeries e = frame.V.resized(6);
    for (int j = 0; j < frame.dim(); ++j) {
      const auto dj = phi.partial(j).resized(6);
      e += dj * dj * C(0.5);
    }
    EXPECT_LT(e.max_abs(), 1e-13);
  }
}

TEST(ClosedForms, PhiPlusOrdersThreeAndFour) {
  for (const auto& m : builtin_models()) {
    const auto frame = diagonal_frame(m, 6);
    const auto phi = eikonal_taylor(frame, 6);
    for (int d : {3, 4})
      for (const auto& a : indices_of_degree(frame.dim(), d)) {
        const double r = phi.derivative_at_zero(a).real();
        const double c = phi_plus_closed_form(frame, a);
        EXPECT_LE(std::abs(r - c), 1e-10 * std::max(std::abs(r), 1.0));
      }
  }
}

TEST(ClosedForms, PhiOneOrdersTwoAndThree) {
  for (const auto& m : builtin_models()) {
    const auto frame = diagonal_frame(m, 6);
    const auto phi = eikonal_taylor(frame, 6);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(frame.dim());
    g1[0] = -0.6;
    const auto phi1 = phi1_taylor(phi, frame.spec, g1, 5);
    for (int d : {2, 3})
      for (const auto& a : indices_of_degree(frame.dim(), d)) {
        const double r = phi1.derivative_at_zero(a).real();
        const double c = phi1_closed_form(frame, g1, a);
        EXPECT_LE(std::abs(r - c), 1e-10 * std::max(std::abs(r), 1.0));
      }
  }
}

TEST(ClosedForms, PhiOneQuadraticLocalIsLinear) {
  const auto frame = diagonal_frame(PotentialModel::quadratic_local(0.5, {1.0, 2.0}), 6);
  const auto phi1 = phi1_taylor(eikonal_taylor(frame, 6), frame.spec, v2(0.4, 0.0), 5);
  EXPECT_NEAR(std::abs(phi1.coeff({1, 0}) - C(-2.0 * 1.0 * 0.4)), 0.0, 1e-15);
  EXPECT_NEAR((phi1 - phi1.truncated(1)).max_abs(), 0.0, 1e-15);
}

TEST(ClosedForms, PhiJhatTwoTwoWays) {
  for (const auto& m : builtin_models()) {
    const auto frame = diagonal_frame(m, 6);
    const auto phi = eikonal_taylor(frame, 6);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(frame.dim());
    g1[0] = 0.7;
    const auto a = phi_jhat2(frame, g1);
    const auto b = phi_jhat2_from_series(frame.spec, phi, phi1_taylor(phi, frame.spec, g1, 5));
    EXPECT_LE((a - b).max_abs(), 1e-10 * std::max(1.0, a.max_abs()));
  }
}

TEST(ClosedForms, CoefficientDoubleEntry) {
  for (const auto& m : builtin_models()) {
    const auto frame = diagonal_frame(m, 6);
    const auto phi = eikonal_taylor(frame, 6);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(frame.dim());
    g1[0] = -0.55;
    const auto gh = ghat_j_coeffs(frame, g1);
    const auto a = c1_closed_form(frame, g1, gh.g0);
    const auto b = c1_from_series(frame.spec, phi, phi1_taylor(phi, frame.spec, g1, 5), g1, gh.g0, gh.g1);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [alpha, v] : a) EXPECT_LE(std::abs(v - b.at(alpha)), 1e-10 * std::max(1.0, std::abs(v)));
  }
}

// ℳ₂, ℳ₁ and g_ĵ for V = e^{−(x₁²+4x₂²)/2}(½ + 0.1x₁²x₂), where λ = (2^{−1/2}, 2^{1/2}),
// I₁(2λ₁) = {e₂} and I₂(λ₁) = {(2,0)}. By hand: ∂₁²∂₂V = 0.2, ∂₁³V = ∂₂³V = ∂₁∂₂²V = 0,
// ∂₁⁴V = 3/2.
TEST(Coupling, M2Symbolic) {
  const auto frame = diagonal_frame(cubic_model(), 6);
  const double l1 = std::sqrt(0.5), d112 = 0.2;
  const auto gm = v2(-0.64, 0.0), gp = v2(0.31, 0.0);
  const double expected = -1.0 / (8.0 * l1) * (d112 * gm[0] * gm[0] / 2.0) * (d112 * gp[0] * gp[0] / 2.0);
  EXPECT_NEAR(m2_coefficient(frame, gm, gp), expected, 1e-14);
  EXPECT_DOUBLE_EQ(m2_coefficient(frame, gm, gp), m2_coefficient(frame, gp, gm));
  const auto form = phi_jhat2(frame, gm);
  EXPECT_NEAR(form.eval(std::vector<double>{gp[0], gp[1]}).real(), expected, 1e-14);
}

TEST(Coupling, M2VanishesWithoutResonanceOrOddTerms) {
  const auto radial = diagonal_frame(PotentialModel::gaussian(0.5, 2), 6);
  EXPECT_EQ(m2_coefficient(radial, v2(0.3, 0.1), v2(-0.2, 0.5)), 0.0);
  Eigen::MatrixXd Q(2, 2);
  Q << 1, 0, 0, 4;
  const auto even = diagonal_frame(PotentialModel::anisotropic_gaussian(0.5, Q), 6);
  EXPECT_EQ(m2_coefficient(even, v2(0.3, 0.0), v2(-0.2, 0.0)), 0.0);
  EXPECT_EQ(phi_jhat2(radial, v2(0.3, 0.1)).max_abs(), 0.0);
}

TEST(Coupling, M1Symbolic) {
  const auto frame = diagonal_frame(cubic_model(), 6);
  const double l2 = std::sqrt(2.0), d112 = 0.2, d1111 = 1.5;
  const auto gm = v2(-0.64, 0.0), gp = v2(0.31, 0.0);
  const auto hm = v2(0.05, -0.02), hp = v2(-0.03, 0.07);
  const double first = d112 / 2.0 * (gm[0] * gm[0] * hp[1] + hm[1] * gp[0] * gp[0]);
  // C_{(2,0),(2,0)}: the resonant j = 2 is excluded from the middle sum, ∂₁³V = 0 kills j = 1
  // there, and the last sum has γ = δ = (2,0) with (4,0)!/(2!2!) = 6.
  const double Ckernel = -d1111 - 6.0 / (2.0 * l2 * l2) * d112 * d112;
  const double expected = -first + gm[0] * gm[0] / 2.0 * gp[0] * gp[0] / 2.0 * Ckernel;
  EXPECT_NEAR(m1_coefficient(frame, gm, gp, hm, hp), expected, 1e-13);
  EXPECT_NEAR(m1_coefficient(frame, gp, gm, hp, hm), expected, 1e-13);
}

TEST(Coupling, M1RadialGaussian) {
  // Only −∂^{α+β}V survives; Σ a^α b^β ∂^{α+β}V/(α!β!) = E₀(|a|²|b|² + 2(a·b)²)/4 for the
  // quartic term E₀|x|⁴/8.
  const auto frame = diagonal_frame(PotentialModel::gaussian(0.5, 2), 6);
  const Eigen::VectorXd a = v2(0.3, -0.4), b = v2(0.25, 0.6);
  const Eigen::VectorXd ya = frame.to_diagonal(a), yb = frame.to_diagonal(b);
  const double expected = -0.5 * (a.squaredNorm() * b.squaredNorm() + 2.0 * std::pow(a.dot(b), 2)) / 4.0;
  EXPECT_NEAR(m1_coefficient(frame, ya, yb, v2(0.1, 0.2), v2(-0.3, 0.05)), expected, 1e-13);
}

TEST(Coupling, M1QuadraticLocalVanishes) {
  const auto frame = diagonal_frame(PotentialModel::quadratic_local(0.5, {1.0, 2.0}), 6);
  EXPECT_EQ(m1_coefficient(frame, v2(0.3, 0.0), v2(0.2, 0.0), v2(0.1, 0.1), v2(0.2, -0.1)), 0.0);
}

TEST(Coupling, GhatCoefficients) {
  const auto frame = diagonal_frame(cubic_model(), 6);
  const double l1 = std::sqrt(0.5);
  const auto gh = ghat_j_coeffs(frame, v2(-0.64, 0.0));
  // Q₂ = ∂₁²∂₂V/2·g² on the resonant axis; Q₁ = ∂₁³V/2·g² = 0 off it.
  EXPECT_NEAR(gh.g1[1], 0.2 / 2.0 * 0.64 * 0.64 / (4.0 * l1), 1e-15);
  EXPECT_EQ(gh.g1[0], 0.0);
  EXPECT_EQ(gh.g0[0], 0.0);
  EXPECT_FALSE(gh.g0_determined[1]);
  EXPECT_TRUE(gh.g0_determined[0]);
  const auto radial = ghat_j_coeffs(diagonal_frame(PotentialModel::gaussian(0.5, 2), 6), v2(0.4, 0.2));
  EXPECT_EQ(radial.g1.norm(), 0.0);
  EXPECT_EQ(radial.g0.norm(), 0.0);
}

TEST(Coupling, CaseClassification) {
  const auto spec = spectrum_from_rates({1.0, 2.0}, 0.5);
  const auto a = classify_case({v2(1, 0)}, {v2(1, 0)}, 0.0, 0.0, spec);
  EXPECT_EQ(a.case_label, 'a');
  EXPECT_EQ(a.k_min, 1);
  EXPECT_EQ(classify_case({v2(1, 0)}, {v2(0, 1)}, 0.3, 0.0, spec).case_label, 'b');
  EXPECT_EQ(classify_case({v2(1, 0)}, {v2(0, 1)}, 0.0, 0.2, spec).case_label, 'c');
  EXPECT_THROW(classify_case({v2(1, 0)}, {v2(0, 1)}, 0.0, 0.0, spec), Error);
}
