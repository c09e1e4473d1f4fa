#include "barrier/coupling.hpp"

#include <cmath>

#include "barrier/error.hpp"

namespace barrier {

namespace {

double pw(const Eigen::VectorXd& g, const MultiIndex& a) {
  double r = 1.0;
  for (int i = 0; i < g.size(); ++i)
    for (int k = 0; k < a[i]; ++k) r *= g[i];
  return r;
}

int one_position(const MultiIndex& b) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] == 1) return static_cast<int>(i);
  return -1;
}

void check_len(const DiagonalFrame& f, const Eigen::VectorXd& v) {
  if (v.size() != f.dim()) throw PreconditionError("coupling: vector length does not match the dimension");
}

// ∂^β∇φ₁(0) as a vector
Eigen::VectorXd grad_derivative(const TruncatedSeries& phi, const MultiIndex& b) {
  const int n = phi.dim();
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v[j] = phi.derivative_at_zero(add(b, unit_index(n, j))).real();
  return v;
}

}  // namespace

double m2_coefficient(const DiagonalFrame& frame, const Eigen::VectorXd& gm, const Eigen::VectorXd& gp) {
  check_len(frame, gm);
  check_len(frame, gp);
  const auto& spec = frame.spec;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  const auto I2 = spec.index_set(2, l1);
  double s = 0.0;
  for (const auto& jj : spec.index_set(1, 2.0 * l1)) {
    const int j = one_position(jj);
    double left = 0.0, right = 0.0;
    for (const auto& b : I2) left += frame.d(add(unit_index(n, j), b)) * pw(gm, b) / factorial(b);
    for (const auto& a : I2) right += frame.d(add(unit_index(n, j), a)) * pw(gp, a) / factorial(a);
    s += left * right;
  }
  return -s / (8.0 * l1);
}

double c_kernel(const DiagonalFrame& frame, const MultiIndex& a, const MultiIndex& b) {
  const auto& spec = frame.spec;
  const auto& lam = spec.lambdas;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  const MultiIndex ab = add(a, b);
  double c = -frame.d(ab);
  for (int j = 0; j < n; ++j) {
    if (spec.equal(lam[j], 2.0 * l1)) continue;
    const MultiIndex ej = unit_index(n, j);
    const double lj2 = lam[j] * lam[j];
    c += 4.0 * l1 * l1 / (lj2 * (4.0 * l1 * l1 - lj2)) * frame.d(add(a, ej)) * frame.d(add(b, ej));
  }
  const auto I2 = spec.index_set(2, l1);
  for (int j = 0; j < n; ++j) {
    const MultiIndex ej = unit_index(n, j);
    for (const auto& g : I2)
      for (const auto& d : I2) {
        if (add(g, d) != ab) continue;
        c -= factorial(ab) / (factorial(g) * factorial(d)) / (2.0 * lam[j] * lam[j]) * frame.d(add(ej, g)) *
             frame.d(add(ej, d));
      }
  }
  return c;
}

double m1_coefficient(const DiagonalFrame& frame, const Eigen::VectorXd& gm, const Eigen::VectorXd& gp,
                      const Eigen::VectorXd& h0m, const Eigen::VectorXd& h0p) {
  check_len(frame, gm);
  check_len(frame, gp);
  check_len(frame, h0m);
  check_len(frame, h0p);
  const auto& spec = frame.spec;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  const auto I2 = spec.index_set(2, l1);
  double first = 0.0;
  for (int j = 0; j < n; ++j)
    for (const auto& a : I2)
      first += frame.d(add(unit_index(n, j), a)) / factorial(a) * (pw(gm, a) * h0p[j] + h0m[j] * pw(gp, a));
  double second = 0.0;
  for (const auto& a : I2)
    for (const auto& b : I2) second += pw(gm, a) / factorial(a) * pw(gp, b) / factorial(b) * c_kernel(frame, a, b);
  return -first + second;
}

GhatCoefficients ghat_j_coeffs(const DiagonalFrame& frame, const Eigen::VectorXd& g1) {
  check_len(frame, g1);
  const auto& spec = frame.spec;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  GhatCoefficients out;
  out.g1 = Eigen::VectorXd::Zero(n);
  out.g0 = Eigen::VectorXd::Zero(n);
  out.g0_determined.assign(n, true);
  const auto twos = monomials_of_degree(n, 2);
  for (int b = 0; b < n; ++b) {
    const MultiIndex eb = unit_index(n, b);
    double Q = 0.0;
    for (const auto& a : twos) Q += frame.d(add(a, eb)) / factorial(a) * pw(g1, a);
    const double lb = spec.lambdas[b];
    if (spec.equal(lb, 2.0 * l1)) {
      out.g1[b] = Q / (4.0 * l1);
      out.g0_determined[b] = false;
    } else {
      out.g0[b] = -Q / ((2.0 * l1 - lb) * (2.0 * l1 + lb));
    }
  }
  return out;
}

TruncatedSeries phi_jhat2(const DiagonalFrame& frame, const Eigen::VectorXd& g1) {
  check_len(frame, g1);
  const auto& spec = frame.spec;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  const auto I2 = spec.index_set(2, l1);
  TruncatedSeries out(n, 2);
  for (const auto& a : I2) {
    double s = 0.0;
    for (const auto& gg : spec.index_set(1, 2.0 * l1))
      for (const auto& b : I2) s += frame.d(add(b, gg)) * pw(g1, b) / factorial(b) * frame.d(add(a, gg)) / factorial(a);
    out.set(a, -s / (8.0 * l1));
  }
  return out;
}

TruncatedSeries phi_jhat2_from_series(const BarrierSpectrum& spec, const TruncatedSeries& phi_plus,
                                      const TruncatedSeries& phi1) {
  const double l1 = spec.lambda1();
  const int n = spec.dim();
  TruncatedSeries out(n, 2);
  const Eigen::VectorXd grad0 = grad_derivative(phi1, MultiIndex(n, 0));
  for (const auto& a : spec.index_set(2, l1)) {
    double s = 0.0;
    for (const auto& b : spec.index_set(1, 2.0 * l1))
      s += phi_plus.derivative_at_zero(add(a, b)).real() / factorial(a) * grad0.dot(grad_derivative(phi1, b));
    out.set(a, 0.5 * s);
  }
  return out;
}

std::map<MultiIndex, double> c1_from_series(const BarrierSpectrum& spec, const TruncatedSeries& phi_plus,
                                            const TruncatedSeries& phi1, const Eigen::VectorXd& g1,
                                            const Eigen::VectorXd& ghat0, const Eigen::VectorXd& ghat1) {
  const double l1 = spec.lambda1();
  const int n = spec.dim();
  const Eigen::VectorXd grad0 = grad_derivative(phi1, MultiIndex(n, 0));
  const auto I1l1 = spec.index_set(1, l1);
  const auto I1d = spec.index_set(1, 2.0 * l1);
  std::map<MultiIndex, double> c0;
  for (const auto& b : I1d) {
    const int k = one_position(b);
    c0[b] = -4.0 * l1 * ghat0[k] + 2.0 * ghat1[k] - grad_derivative(phi1, b).dot(g1);
  }
  std::map<MultiIndex, double> out;
  for (const auto& a : spec.index_set(2, l1)) {
    double c = -grad_derivative(phi1, a).dot(grad0) / factorial(a);
    double pairs = 0.0;
    for (const auto& b : I1l1)
      for (const auto& g : I1l1)
        if (add(b, g) == a) pairs += grad_derivative(phi1, b).dot(grad_derivative(phi1, g));
    c -= 0.5 * pairs;
    for (const auto& b : I1d) c -= phi_plus.derivative_at_zero(add(a, b)).real() / factorial(a) * c0[b];
    for (int k = 0; k < n; ++k) {
      const MultiIndex b = unit_index(n, k);
      if (spec.equal(spec.lambdas[k], 2.0 * l1)) continue;
      c -= phi_plus.derivative_at_zero(add(a, b)).real() / factorial(a) * grad0.dot(grad_derivative(phi1, b)) /
           (2.0 * l1 - spec.lambdas[k]);
    }
    out[a] = c;
  }
  return out;
}

std::map<MultiIndex, double> c1_closed_form(const DiagonalFrame& frame, const Eigen::VectorXd& g1,
                                            const Eigen::VectorXd& ghat0) {
  const auto& spec = frame.spec;
  const auto& lam = spec.lambdas;
  const double l1 = spec.lambda1();
  const int n = frame.dim();
  const auto I2 = spec.index_set(2, l1);
  std::map<MultiIndex, double> out;
  for (const auto& a : I2) {
    double c = 0.0;
    for (const auto& gg : spec.index_set(1, 2.0 * l1))
      c -= frame.d(add(a, gg)) / factorial(a) * ghat0[one_position(gg)];
    for (const auto& b : I2) {
      double brace = 0.0;
      for (int k = 0; k < n; ++k) {
        const MultiIndex ek = unit_index(n, k);
        const double lg = lam[k];
        if (spec.equal(lg, 2.0 * l1)) {
          brace += frame.d(add(a, ek)) * frame.d(add(b, ek)) / (4.0 * l1 * l1);
        } else {
          brace += 8.0 * l1 * l1 / ((2.0 * l1 - lg) * lg * (2.0 * l1 + lg) * (2.0 * l1 + lg)) * frame.d(add(a, ek)) *
                   frame.d(add(b, ek));
        }
      }
      brace -= frame.d(add(a, b));
      const MultiIndex ab = add(a, b);
      double quartic = 0.0;
      for (const auto& g : I2)
        for (const auto& d : I2) {
          if (add(g, d) != ab) continue;
          for (int j = 0; j < n; ++j) {
            const MultiIndex ej = unit_index(n, j);
            quartic += 1.0 / (lam[j] * lam[j]) * frame.d(add(ej, g)) / factorial(g) * frame.d(add(ej, d)) / factorial(d);
          }
        }
      brace -= factorial(ab) / 2.0 * quartic;
      for (int j = 0; j < n; ++j) {
        const MultiIndex ej = unit_index(n, j);
        const double lj = lam[j];
        brace += 4.0 * l1 * l1 / (lj * lj * (2.0 * l1 + lj) * (2.0 * l1 + lj)) * frame.d(add(ej, a)) * frame.d(add(ej, b));
      }
      c += pw(g1, b) / factorial(b) / factorial(a) * brace;
    }
    out[a] = c;
  }
  return out;
}

CouplingData classify_case(const std::vector<Eigen::VectorXd>& gm, const std::vector<Eigen::VectorXd>& gp, double M2,
                           double M1, const BarrierSpectrum& spec, double tol_ip, double tol_m) {
  const std::size_t below = static_cast<std::size_t>(std::max(spec.jhat - 1, 0));
  if (gm.size() < below || gp.size() < below)
    throw PreconditionError("classify_case: g_m must be supplied for every m < ĵ");
  CouplingData c;
  c.M2 = M2;
  c.M1 = M1;
  for (std::size_t m = 0; m < below; ++m) {
    const double ip = gm[m].dot(gp[m]);
    c.inner_products.push_back(ip);
    if (c.k_min == 0 && std::abs(ip) > tol_ip * gm[m].norm() * gp[m].norm() && ip != 0.0)
      c.k_min = static_cast<int>(m) + 1;
  }
  if (c.k_min > 0) {
    c.case_label = 'a';
  } else if (std::abs(M2) > tol_m) {
    c.case_label = 'b';
  } else if (std::abs(M1) > tol_m) {
    c.case_label = 'c';
  } else {
    throw Error("no coupling case applies: inner products, M2 and M1 all vanish");
  }
  return c;
}

}  // namespace barrier
