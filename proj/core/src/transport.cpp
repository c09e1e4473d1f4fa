#include "barrier/transport.hpp"

#include <algorithm>
#include <cmath>

#include "barrier/error.hpp"

namespace barrier {

namespace {

using cd = std::complex<double>;

int numeric_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double rel) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel * s[0]) ++r;
  return r;
}

int rank_of(const Eigen::MatrixXd& M, double rel = 1e-9) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return numeric_rank(svd, rel);
}

double max_abs(const TruncatedSeries& s) { return s.max_abs(); }

}  // namespace

TruncatedSeries apply_L(const TruncatedSeries& phi_plus, const TruncatedSeries& f) {
  if (phi_plus.dim() != f.dim()) throw PreconditionError("apply_L: dimension mismatch");
  TruncatedSeries out(f.dim(), f.degree());
  for (int j = 0; j < f.dim(); ++j) out += (phi_plus.partial(j) * f.partial(j)).resized(f.degree());
  return out;
}

PsiMap psi_map(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec) {
  PsiMap P;
  const double l1 = spec.lambda1();
  P.rows = spec.index_set(2, l1);
  P.cols = spec.index_set(1, 2.0 * l1);
  P.matrix = Eigen::MatrixXd::Zero(P.rows.size(), P.cols.size());
  for (std::size_t r = 0; r < P.rows.size(); ++r)
    for (std::size_t c = 0; c < P.cols.size(); ++c) {
      const MultiIndex ab = add(P.rows[r], P.cols[c]);
      P.matrix(r, c) = (phi_plus.derivative_at_zero(ab) / factorial(P.rows[r])).real();
    }
  P.nullity = static_cast<int>(P.cols.size()) - rank_of(P.matrix, 1e-10);
  return P;
}

namespace {

Eigen::MatrixXd null_basis(const Eigen::MatrixXd& M) {
  const int cols = static_cast<int>(M.cols());
  if (cols == 0) return Eigen::MatrixXd(0, 0);
  if (M.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const int r = numeric_rank(svd, 1e-10);
  return svd.matrixV().rightCols(cols - r);
}

struct Solver {
  const TruncatedSeries& phi;
  const BarrierSpectrum& spec;
  double mu;
  int N;
  int n;

  bool resonant(const MultiIndex& a) const { return spec.equal(weight(spec.lambdas, a), mu); }

  TruncatedSeries residual(const TruncatedSeries& g, const TruncatedSeries& E) const {
    TruncatedSeries LE = apply_L(phi, E);
    LE -= E * cd(mu);
    return g - LE;
  }

  // One pass of the recursion; returns the report and fills E and the free-choice record.
  ImageReport run(const TruncatedSeries& g, const std::map<MultiIndex, cd>& free_values, TruncatedSeries& E,
                  std::vector<FreeChoice>& choices) const {
    ImageReport rep;
    double free_max = 0.0;
    for (const auto& [a, v] : free_values) free_max = std::max(free_max, std::abs(v));
    const double scale = std::max({max_abs(g), free_max * std::max(1.0, max_abs(phi)), 1e-300});
    const double tol = 1e-10 * scale;
    const auto& B = E.basis();
    auto free_of = [&](const MultiIndex& a) {
      auto it = free_values.find(a);
      return it == free_values.end() ? cd(0) : it->second;
    };
    // constant term
    E.at(0) = g.at(0) / (-mu);
    if (N >= 1) {
      for (std::size_t k = B.begin(1); k < B.end(1); ++k) {
        const MultiIndex& a = B[k];
        const cd r = g.at(k);
        if (resonant(a)) {
          if (std::abs(r) > tol) {
            rep.satisfied = false;
            rep.condition = "linear obstruction";
            rep.where = a;
            rep.residual = std::abs(r);
            return rep;
          }
          E.at(k) = free_of(a);
        } else {
          E.at(k) = r / (weight(spec.lambdas, a) - mu);
        }
      }
    }
    const bool at_double = spec.equal(mu, 2.0 * spec.lambda1());
    if (at_double && N >= 2) {
      PsiMap P = psi_map(phi, spec);
      if (!P.rows.empty()) {
        TruncatedSeries R = residual(g, E);
        Eigen::VectorXd rr(P.rows.size()), ri(P.rows.size());
        for (std::size_t i = 0; i < P.rows.size(); ++i) {
          rr[i] = R.coeff(P.rows[i]).real();
          ri[i] = R.coeff(P.rows[i]).imag();
        }
        Eigen::VectorXd er = Eigen::VectorXd::Zero(P.cols.size()), ei = er;
        if (!P.cols.empty()) {
          Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(P.matrix);
          er = cod.solve(rr);
          ei = cod.solve(ri);
        }
        const double miss = std::hypot((P.matrix * er - rr).norm(), (P.matrix * ei - ri).norm());
        const double rnorm = std::hypot(rr.norm(), ri.norm());
        if (miss > 1e-10 * std::max(scale, rnorm)) {
          rep.satisfied = false;
          rep.condition = "Im Psi membership";
          rep.residual = miss;
          return rep;
        }
        for (std::size_t c = 0; c < P.cols.size(); ++c) E.add_to(P.cols[c], cd(er[c], ei[c]));
      }
    }
    for (std::size_t k = B.begin(1); N >= 1 && k < B.end(1); ++k)
      if (resonant(B[k])) choices.push_back({B[k], E.at(k)});
    for (int d = 2; d <= N; ++d) {
      TruncatedSeries R = residual(g, E);
      for (std::size_t k = B.begin(d); k < B.end(d); ++k) {
        const MultiIndex& a = B[k];
        if (resonant(a)) {
          if (d != 2 || !at_double) throw PreconditionError("solve_transport: resonance λ·α = μ at |α| = " +
                                                            std::to_string(d));
          if (std::abs(R.at(k)) > 1e-8 * std::max(scale, 1.0))
            throw NumericalError("solve_transport: quadratic compatibility lost after correction");
          E.at(k) = free_of(a);
          choices.push_back({a, E.at(k)});
        } else {
          E.at(k) = R.at(k) / (weight(spec.lambdas, a) - mu);
        }
      }
    }
    return rep;
  }
};

}  // namespace

TransportSolution solve_transport(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec, double mu,
                                  const TruncatedSeries& g, int N,
                                  const std::map<MultiIndex, std::complex<double>>& free_values) {
  const int n = spec.dim();
  if (phi_plus.dim() != n || g.dim() != n) throw PreconditionError("solve_transport: dimension mismatch");
  const double l1 = spec.lambda1();
  if (!(mu > 0.0) || (mu > 2.0 * l1 && !spec.equal(mu, 2.0 * l1)))
    throw PreconditionError("solve_transport: μ must lie in ]0, 2λ₁]");
  if (N < 0) throw PreconditionError("solve_transport: N must be non-negative");
  for (int d = 3; d <= N; ++d)
    for (const auto& a : monomials_of_degree(n, d))
      if (spec.equal(weight(spec.lambdas, a), mu)) throw PreconditionError("solve_transport: resonance at |α| >= 3");

  Solver S{phi_plus, spec, mu, N, n};
  TransportSolution sol;
  const TruncatedSeries gN = g.resized(N);
  TruncatedSeries E(n, N);
  sol.image_report = S.run(gN, free_values, E, sol.free_choices);
  if (sol.image_report.satisfied) sol.particular = E;

  // kernel basis
  const TruncatedSeries zero(n, N);
  auto homogeneous = [&](const std::map<MultiIndex, cd>& fv) {
    TruncatedSeries K(n, N);
    std::vector<FreeChoice> dummy;
    ImageReport r = S.run(zero, fv, K, dummy);
    if (!r.satisfied) throw NumericalError("solve_transport: homogeneous solve failed");
    return K;
  };
  const bool at_double = spec.equal(mu, 2.0 * l1);
  if (!at_double) {
    if (N >= 1)
      for (const auto& b : spec.index_set(1, mu)) sol.kernel_basis.push_back(homogeneous({{b, 1.0}}));
  } else {
    if (N >= 2)
      for (const auto& a : spec.index_set(2, l1)) sol.kernel_basis.push_back(homogeneous({{a, 1.0}}));
    if (N >= 1) {
      PsiMap P = psi_map(phi_plus, spec);
      Eigen::MatrixXd Z = null_basis(P.matrix);
      if (P.rows.empty()) Z = Eigen::MatrixXd::Identity(P.cols.size(), P.cols.size());
      for (int c = 0; c < Z.cols(); ++c) {
        std::map<MultiIndex, cd> fv;
        for (std::size_t i = 0; i < P.cols.size(); ++i) fv[P.cols[i]] = Z(i, c);
        sol.kernel_basis.push_back(homogeneous(fv));
      }
    }
  }
  return sol;
}

TruncatedSeries eikonal_taylor(const BarrierSpectrum& spec, const TruncatedSeries& V, int N) {
  const int n = spec.dim();
  if (N < 2) throw PreconditionError("eikonal_taylor: N must be >= 2");
  if (V.dim() != n) throw PreconditionError("eikonal_taylor: dimension mismatch");
  const double lmax2 = spec.lambdas.back() * spec.lambdas.back();
  for (const auto& a : monomials_of_degree(n, 2)) {
    double expect = 0.0;
    for (int i = 0; i < n; ++i)
      if (a[i] == 2) expect = -0.5 * spec.lambdas[i] * spec.lambdas[i];
    if (std::abs(V.coeff(a) - expect) > 1e-10 * lmax2)
      throw PreconditionError("eikonal_taylor: inconsistent degree-2 data (λ mismatch) at " + to_string(a));
  }
  if (std::abs(V.coeff(MultiIndex(n, 0))) > 1e-12 * (1.0 + std::abs(spec.E0)))
    throw PreconditionError("eikonal_taylor: V − E₀ must vanish at 0");
  for (int i = 0; i < n; ++i)
    if (std::abs(V.coeff(unit_index(n, i))) > 1e-12 * lmax2)
      throw PreconditionError("eikonal_taylor: ∇V(0) must vanish");

  const TruncatedSeries VN = V.resized(N);
  TruncatedSeries phi(n, N);
  for (int i = 0; i < n; ++i) phi.set(add(unit_index(n, i), unit_index(n, i)), 0.5 * spec.lambdas[i]);
  const auto& B = phi.basis();
  for (int d = 3; d <= N; ++d) {
    TruncatedSeries S = VN;
    for (int j = 0; j < n; ++j) {
      TruncatedSeries dj = phi.partial(j);
      S += (dj * dj) * cd(0.5);
    }
    for (std::size_t k = B.begin(d); k < B.end(d); ++k) phi.at(k) = -S.at(k) / weight(spec.lambdas, B[k]);
  }
  return phi;
}

TruncatedSeries eikonal_taylor(const DiagonalFrame& frame, int N) {
  TruncatedSeries V = frame.V.resized(N);
  return eikonal_taylor(frame.spec, V, N);
}

TruncatedSeries phi1_taylor(const TruncatedSeries& phi_plus, const BarrierSpectrum& spec, const Eigen::VectorXd& g1,
                            int N) {
  const int n = spec.dim();
  if (g1.size() != n) throw PreconditionError("phi1_taylor: g1 has wrong length");
  if (g1.norm() == 0.0) throw PreconditionError("phi1_taylor: g1 must be nonzero");
  const double l1 = spec.lambda1();
  for (int i = 0; i < n; ++i)
    if (!spec.equal(spec.lambdas[i], l1) && std::abs(g1[i]) > 1e-12 * g1.norm())
      throw PreconditionError("phi1_taylor: g1 must lie in the λ₁ eigenspace");
  std::map<MultiIndex, cd> fv;
  for (int i = 0; i < n; ++i)
    if (spec.equal(spec.lambdas[i], l1)) fv[unit_index(n, i)] = -2.0 * l1 * g1[i];
  TruncatedSeries zero(n, N);
  TransportSolution s = solve_transport(phi_plus, spec, l1, zero, N, fv);
  if (!s.image_report.satisfied || !s.particular)
    throw NumericalError("phi1_taylor: internal consistency failure (homogeneous equation obstructed)");
  return *s.particular;
}

Eigen::MatrixXd transport_matrix(const TruncatedSeries& phi_plus, double mu, int N) {
  const int n = phi_plus.dim();
  const auto B = MonomialBasis::get(n, N);
  const int K = static_cast<int>(B->size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(K, K);
  for (int c = 0; c < K; ++c) {
    TruncatedSeries f(n, N);
    f.at(c) = 1.0;
    TruncatedSeries r = apply_L(phi_plus, f);
    r -= f * cd(mu);
    for (int k = 0; k < K; ++k) T(k, c) = r.at(k).real();
  }
  return T;
}

TransportStructure analyze_transport(const TruncatedSeries& phi_plus, double mu, int N) {
  const Eigen::MatrixXd T = transport_matrix(phi_plus, mu, N);
  const int K = static_cast<int>(T.rows());
  auto ker_im = [K](const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const int r = numeric_rank(svd, 1e-9);
    return std::make_pair(Eigen::MatrixXd(svd.matrixV().rightCols(K - r)), Eigen::MatrixXd(svd.matrixU().leftCols(r)));
  };
  auto [ker, im] = ker_im(T);
  auto [ker2_unused, im2] = ker_im(T * T);
  (void)ker2_unused;
  auto cap = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& Bm) {
    if (A.cols() == 0 || Bm.cols() == 0) return 0;
    Eigen::MatrixXd M(K, A.cols() + Bm.cols());
    M << A, Bm;
    return static_cast<int>(A.cols() + Bm.cols()) - rank_of(M, 1e-8);
  };
  TransportStructure s;
  s.dim_kernel = static_cast<int>(ker.cols());
  s.dim_kernel_cap_image = cap(ker, im);
  s.dim_kernel_cap_image2 = cap(ker, im2);
  return s;
}

double phi_plus_closed_form(const DiagonalFrame& frame, const MultiIndex& a) {
  const auto& lam = frame.spec.lambdas;
  const int n = frame.dim();
  const int d = degree(a);
  if (d == 3) return -frame.d(a) / weight(lam, a);
  if (d != 4) throw PreconditionError("phi_plus_closed_form: |α| must be 3 or 4");
  const double la = weight(lam, a);
  double s = 0.0;
  const auto twos = monomials_of_degree(n, 2);
  for (int j = 0; j < n; ++j)
    for (const auto& b : twos) {
      if (!dominates(a, b)) continue;
      const MultiIndex c = subtract(a, b);
      const MultiIndex ej = unit_index(n, j);
      s += factorial(a) / (factorial(b) * factorial(c)) * frame.d(add(ej, b)) / (lam[j] + weight(lam, b)) *
           frame.d(add(ej, c)) / (lam[j] + weight(lam, c));
    }
  return -s / (2.0 * la) - frame.d(a) / la;
}

double phi1_closed_form(const DiagonalFrame& frame, const Eigen::VectorXd& g1, const MultiIndex& a) {
  const auto& spec = frame.spec;
  const auto& lam = spec.lambdas;
  const int n = frame.dim();
  const double l1 = spec.lambda1();
  const double la = weight(lam, a);
  const int d = degree(a);
  std::vector<int> I1l1;
  for (int k = 0; k < n; ++k)
    if (spec.equal(lam[k], l1)) I1l1.push_back(k);
  if (d == 2) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += frame.d(add(unit_index(n, j), a)) / factorial(a) * g1[j];
    return 2.0 * l1 * factorial(a) / ((l1 - la) * (l1 + la)) * s;
  }
  if (d != 3) throw PreconditionError("phi1_closed_form: |α| must be 2 or 3");
  const auto twos = monomials_of_degree(n, 2);
  double t1 = 0.0;
  for (int k : I1l1)
    for (int j = 0; j < n; ++j) {
      const MultiIndex aj = add(a, unit_index(n, j));
      for (const auto& b : twos) {
        if (!dominates(aj, b)) continue;
        const MultiIndex c = subtract(aj, b);
        if (degree(c) != 2) continue;
        const double lc = weight(lam, c);
        t1 += factorial(a) * c[j] / (factorial(b) * factorial(c)) * frame.d(add(unit_index(n, j), b)) /
              (lam[j] + weight(lam, b)) * frame.d(add(unit_index(n, k), c)) / ((l1 - lc) * (l1 + lc)) * g1[k];
      }
    }
  t1 *= -2.0 * l1 / (l1 - la);
  double t2 = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j : I1l1) {
      const MultiIndex aj = add(a, unit_index(n, j));
      for (const auto& b : twos) {
        if (!dominates(aj, b)) continue;
        const MultiIndex c = subtract(aj, b);
        t2 += factorial(aj) / (factorial(b) * factorial(c)) * frame.d(add(unit_index(n, k), b)) /
              (lam[k] + weight(lam, b)) * frame.d(add(unit_index(n, k), c)) / (lam[k] + weight(lam, c)) * g1[j];
      }
    }
  t2 *= l1 / ((l1 - la) * (l1 + la));
  double t3 = 0.0;
  for (int j : I1l1) t3 += frame.d(add(unit_index(n, j), a)) * g1[j];
  t3 *= 2.0 * l1 / ((l1 - la) * (l1 + la));
  return t1 + t2 + t3;
}

}  // namespace barrier
