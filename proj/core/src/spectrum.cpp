#include "barrier/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "barrier/error.hpp"

namespace barrier {

namespace {

// Sorted distinct positive ℕ-combinations of `gens`, the first `count` of them, complete
// in the sense that no smaller combination is missing.
std::vector<double> combinations(const std::vector<double>& gens, std::size_t count, double tol) {
  std::vector<double> g;
  for (double v : gens)
    if (v > tol) g.push_back(v);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [tol](double a, double b) { return std::abs(a - b) <= tol; }), g.end());
  const double gmin = g.front();
  std::vector<double> vals{0.0};
  for (int K = 1;; ++K) {
    // all sums of exactly K generators, built from the sums of K-1
    std::vector<double> next;
    std::vector<double> layer{0.0};
    for (int k = 0; k < K; ++k) {
      std::vector<double> nl;
      for (double v : layer)
        for (double x : g) nl.push_back(v + x);
      std::sort(nl.begin(), nl.end());
      nl.erase(std::unique(nl.begin(), nl.end(), [tol](double a, double b) { return std::abs(a - b) <= tol; }),
               nl.end());
      layer = std::move(nl);
    }
    vals.insert(vals.end(), layer.begin(), layer.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end(), [tol](double a, double b) { return std::abs(a - b) <= tol; }),
               vals.end());
    // every combination of K+1 or more generators is ≥ (K+1)gmin
    std::vector<double> pos(vals.begin() + 1, vals.end());
    std::size_t complete = 0;
    while (complete < pos.size() && pos[complete] < (K + 1) * gmin - tol) ++complete;
    if (complete >= count) return {pos.begin(), pos.begin() + count};
    if (K > 64) throw NumericalError("rate enumeration did not terminate");
  }
}

}  // namespace

double BarrierSpectrum::sum() const { return std::accumulate(lambdas.begin(), lambdas.end(), 0.0); }

bool BarrierSpectrum::equal(double a, double b) const {
  return std::abs(a - b) <= kRateTolerance * lambdas.back();
}

std::vector<MultiIndex> BarrierSpectrum::index_set(int m, double mu) const {
  if (m != 1 && m != 2) throw PreconditionError("index_set: m must be 1 or 2");
  const int n = dim();
  std::vector<MultiIndex> out;
  for (const auto& a : monomials_of_degree(n, m)) {
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (a[i] > 0 && !equal(lambdas[i], mu)) ok = false;
    if (ok) out.push_back(a);
  }
  return out;
}

int BarrierSpectrum::mu_position(double mu) const {
  for (std::size_t k = 0; k < mu_seq.size(); ++k)
    if (equal(mu_seq[k], mu)) return static_cast<int>(k) + 1;
  return 0;
}

BarrierSpectrum spectrum_from_rates(std::vector<double> lambdas, double E0, int M) {
  if (lambdas.empty()) throw PreconditionError("spectrum needs at least one rate");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw PreconditionError("rates must be positive and finite");
  std::sort(lambdas.begin(), lambdas.end());
  BarrierSpectrum s;
  s.lambdas = lambdas;
  s.E0 = E0;
  const double tol = kRateTolerance * lambdas.back();
  // enough entries to reach 2λ₁
  std::size_t count = std::max<std::size_t>(M, 1);
  for (;;) {
    s.mu_seq = combinations(lambdas, count, tol);
    s.jhat = s.mu_position(2.0 * lambdas.front());
    if (s.jhat > 0) break;
    count *= 2;
  }
  std::vector<double> hat_gens = lambdas;
  for (double l : lambdas) hat_gens.push_back(l - lambdas.front());
  s.muhat_seq = combinations(hat_gens, std::max(M, 1), tol);
  s.muhat_seq.insert(s.muhat_seq.begin(), 0.0);
  return s;
}

BarrierSpectrum barrier_spectrum(const PotentialModel& model, int M) {
  auto T = model.taylor(2);
  const int n = model.dim();
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = T.derivative_at_zero(add(unit_index(n, i), unit_index(n, j))).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-H);
  std::vector<double> lambdas;
  for (int i = 0; i < n; ++i) {
    const double e = es.eigenvalues()[i];
    if (!(e > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "Hessian at the maximum is not negative definite: eigenvalue " << -e << " of ∇²V(0) is >= 0";
      throw PreconditionError(os.str());
    }
    lambdas.push_back(std::sqrt(e));
  }
  return spectrum_from_rates(lambdas, model.E0(), M);
}

double DiagonalFrame::d(const MultiIndex& a) const {
  if (degree(a) > V.degree()) return 0.0;
  return V.derivative_at_zero(a).real();
}

DiagonalFrame diagonal_frame(const PotentialModel& model, int N, int M) {
  DiagonalFrame f;
  f.spec = barrier_spectrum(model, M);
  const int n = model.dim();
  TruncatedSeries T = model.taylor(N);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = T.derivative_at_zero(add(unit_index(n, i), unit_index(n, j))).real();
  const bool diagonal = (H - Eigen::MatrixXd(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    // permutation sorting the rates, stable so equal rates keep their order
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return -H(a, a) < -H(b, b); });
    f.R = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) f.R(order[k], k) = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-H);
    f.R = es.eigenvectors();
    for (int k = 0; k < n; ++k) {
      Eigen::Index imax;
      f.R.col(k).cwiseAbs().maxCoeff(&imax);
      if (f.R(imax, k) < 0) f.R.col(k) *= -1.0;
    }
  }
  f.V = T.compose_linear(f.R);
  f.V.add_to(MultiIndex(n, 0), -model.E0());
  // clean the degree-2 part to the exact diagonal form
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      MultiIndex a = add(unit_index(n, i), unit_index(n, j));
      f.V.set(a, i == j ? -0.5 * f.spec.lambdas[i] * f.spec.lambdas[i] : 0.0);
    }
  return f;
}

}  // namespace barrier
