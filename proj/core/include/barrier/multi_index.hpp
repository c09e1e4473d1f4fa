#pragma once

#include <complex>
#include <string>
#include <vector>

namespace barrier {

/// Multi-index α = (α_1, ..., α_n) of non-negative integers.
using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& a) {
  int d = 0;
  for (int v : a) d += v;
  return d;
}

/// α! = Π α_j!
inline double factorial(const MultiIndex& a) {
  double f = 1.0;
  for (int v : a)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

inline MultiIndex unit_index(int n, int j) {
  MultiIndex a(n, 0);
  a[j] = 1;
  return a;
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex c(a);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

/// True when b ≤ a componentwise.
inline bool dominates(const MultiIndex& a, const MultiIndex& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] > a[i]) return false;
  return true;
}

inline MultiIndex subtract(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex c(a);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

/// All multi-indices of length n and total degree d, in reverse lexicographic order
/// (x_1^d first).
std::vector<MultiIndex> monomials_of_degree(int n, int d);

/// x^α for real or complex x.
template <class T>
T monomial(const std::vector<T>& x, const MultiIndex& a) {
  T r(1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < a[i]; ++k) r *= x[i];
  return r;
}

/// λ·α = Σ λ_j α_j
inline double weight(const std::vector<double>& lambdas, const MultiIndex& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += lambdas[i] * a[i];
  return s;
}

std::string to_string(const MultiIndex& a);

/// Parses "2,1,0" style keys.
MultiIndex parse_multi_index(const std::string& s);

}  // namespace barrier
